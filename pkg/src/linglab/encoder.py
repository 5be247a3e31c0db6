"""Attribute feature encoder and the integration-mode selector.

Each attribute value v_i is mapped to an embedding E_i = v_i * w + c + T_i
through a single shared linear map plus a per-attribute type embedding.
Masked attributes are excluded from aggregation entirely (their values can
never influence the result, bit for bit); the global feature is the mean
of the surviving embeddings, or the zero vector when everything is masked.
"""

from __future__ import annotations

from enum import Enum

import torch
import torch.nn as nn


class IntegrationMode(str, Enum):
    """Where the global attribute feature enters the decoder."""

    SOS = "sos"        # added to the start-token input embedding only
    ALL = "all"        # added to every input embedding
    OUTPUT = "output"  # added to every final hidden state before the head
    LOGITS = "logits"  # projected to vocab size and added to every logit row


class FeatureEncoder(nn.Module):
    def __init__(self, n_attributes: int, hidden_size: int):
        super().__init__()
        self.n_attributes = n_attributes
        self.hidden_size = hidden_size
        self.value_weight = nn.Parameter(torch.empty(hidden_size))
        self.value_bias = nn.Parameter(torch.empty(hidden_size))
        self.type_embeddings = nn.Parameter(torch.empty(n_attributes, hidden_size))
        nn.init.normal_(self.value_weight, std=0.02)
        nn.init.zeros_(self.value_bias)
        nn.init.normal_(self.type_embeddings, std=0.02)

    def forward(self, values: torch.Tensor, masked: torch.Tensor) -> torch.Tensor:
        """Pool unmasked attribute embeddings into one global feature per row.

        values: (B, k) normalized attribute values; masked: (B, k) bool,
        True = hidden from the model. Returns (B, d).
        """
        if values.shape[-1] != self.n_attributes or masked.shape != values.shape:
            raise ValueError(
                f"expected values/masked of shape (B, {self.n_attributes})"
            )
        # (B, k, d); masked rows are multiplied by exactly 0 so they can
        # neither change the sum nor receive gradient
        embeddings = values.unsqueeze(-1) * self.value_weight + self.value_bias
        embeddings = embeddings + self.type_embeddings
        keep = (~masked).to(embeddings.dtype).unsqueeze(-1)
        kept_count = keep.sum(dim=1).clamp(min=1.0)
        return (embeddings * keep).sum(dim=1) / kept_count
