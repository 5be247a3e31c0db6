"""Tiny transformer stacks: a causal decoder and a bidirectional regressor.

Pre-norm residual blocks, learned positional embeddings, GELU feed-forward,
Normal(0, 0.02) init. The decoder conditions on the pooled attribute
feature according to its integration mode; the regressor mean-pools
non-pad hidden states into a linear head predicting the attribute vector.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from .encoder import FeatureEncoder, IntegrationMode
from .vocab import PAD_ID


@dataclass(frozen=True)
class ModelConfig:
    d: int = 128
    n_layers: int = 4
    n_heads: int = 4
    ffn_size: int = 512
    max_len: int = 100
    vocab_size: int = 0
    integration_mode: str = "sos"
    dropout: float = 0.0

    def __post_init__(self):
        if self.d % self.n_heads != 0:
            raise ValueError("hidden size must be divisible by the head count")
        if self.max_len < 2:
            raise ValueError("max_len must be at least 2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


def _init_module(module: nn.Module) -> None:
    if isinstance(module, nn.Linear):
        nn.init.normal_(module.weight, std=0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.Embedding):
        nn.init.normal_(module.weight, std=0.02)


class SelfAttention(nn.Module):
    def __init__(self, config: ModelConfig, causal: bool):
        super().__init__()
        self.n_heads = config.n_heads
        self.head_dim = config.d // config.n_heads
        self.causal = causal
        self.qkv = nn.Linear(config.d, 3 * config.d)
        self.proj = nn.Linear(config.d, config.d)
        self.dropout = nn.Dropout(config.dropout)

    def forward(self, x: torch.Tensor, key_pad: torch.Tensor | None) -> torch.Tensor:
        B, T, d = x.shape
        q, k, v = self.qkv(x).split(d, dim=2)
        q = q.view(B, T, self.n_heads, self.head_dim).transpose(1, 2)
        k = k.view(B, T, self.n_heads, self.head_dim).transpose(1, 2)
        v = v.view(B, T, self.n_heads, self.head_dim).transpose(1, 2)
        attn_mask = None
        if key_pad is not None:
            # (B, 1, 1, T) additive mask shutting pad keys out of every head
            attn_mask = torch.zeros(B, 1, 1, T, dtype=x.dtype, device=x.device)
            attn_mask = attn_mask.masked_fill(key_pad[:, None, None, :], float("-inf"))
        y = F.scaled_dot_product_attention(
            q, k, v, attn_mask=attn_mask, is_causal=self.causal
        )
        y = y.transpose(1, 2).reshape(B, T, d)
        return self.dropout(self.proj(y))


class Block(nn.Module):
    def __init__(self, config: ModelConfig, causal: bool):
        super().__init__()
        self.ln1 = nn.LayerNorm(config.d)
        self.attn = SelfAttention(config, causal)
        self.ln2 = nn.LayerNorm(config.d)
        self.ff = nn.Sequential(
            nn.Linear(config.d, config.ffn_size),
            nn.GELU(),
            nn.Linear(config.ffn_size, config.d),
            nn.Dropout(config.dropout),
        )

    def forward(self, x: torch.Tensor, key_pad: torch.Tensor | None = None) -> torch.Tensor:
        x = x + self.attn(self.ln1(x), key_pad)
        return x + self.ff(self.ln2(x))


class DecoderLM(nn.Module):
    """Causal decoder generating text conditioned on attribute targets."""

    def __init__(self, config: ModelConfig, n_attributes: int):
        super().__init__()
        self.config = config
        self.n_attributes = n_attributes
        self.mode = IntegrationMode(config.integration_mode)
        self.tok_emb = nn.Embedding(config.vocab_size, config.d)
        self.pos_emb = nn.Embedding(config.max_len, config.d)
        self.drop = nn.Dropout(config.dropout)
        self.blocks = nn.ModuleList(Block(config, causal=True) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d)
        self.head = nn.Linear(config.d, config.vocab_size)
        self.feature_encoder = FeatureEncoder(n_attributes, config.d)
        if self.mode is IntegrationMode.LOGITS:
            self.logit_proj = nn.Linear(config.d, config.vocab_size, bias=False)
        self.apply(_init_module)
        if self.mode is IntegrationMode.LOGITS:
            nn.init.zeros_(self.logit_proj.weight)

    def forward(
        self,
        input_ids: torch.Tensor,
        attr_values: torch.Tensor | None = None,
        attr_masked: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """Per-position next-token logits; unconditioned when values are None."""
        B, T = input_ids.shape
        if T > self.config.max_len:
            raise ValueError(f"sequence length {T} exceeds max_len {self.config.max_len}")
        g = None
        if attr_values is not None:
            if attr_masked is None:
                raise ValueError("attr_masked must accompany attr_values")
            g = self.feature_encoder(attr_values, attr_masked)

        pos = torch.arange(T, device=input_ids.device)
        x = self.tok_emb(input_ids) + self.pos_emb(pos)
        if g is not None:
            if self.mode is IntegrationMode.SOS:
                x = torch.cat([(x[:, :1] + g.unsqueeze(1)), x[:, 1:]], dim=1)
            elif self.mode is IntegrationMode.ALL:
                x = x + g.unsqueeze(1)
        x = self.drop(x)
        for block in self.blocks:
            x = block(x)
        x = self.ln_f(x)
        if g is not None and self.mode is IntegrationMode.OUTPUT:
            x = x + g.unsqueeze(1)
        logits = self.head(x)
        if g is not None and self.mode is IntegrationMode.LOGITS:
            logits = logits + self.logit_proj(g).unsqueeze(1)
        return logits


def lm_loss(
    model: DecoderLM,
    input_ids: torch.Tensor,
    attr_values: torch.Tensor | None = None,
    attr_masked: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean next-token cross-entropy in nats, pad targets excluded."""
    logits = model(input_ids, attr_values, attr_masked)
    targets = input_ids[:, 1:]
    if (targets != PAD_ID).sum() == 0:
        raise ValueError("batch contains no non-pad targets")
    return F.cross_entropy(
        logits[:, :-1].reshape(-1, logits.shape[-1]),
        targets.reshape(-1),
        ignore_index=PAD_ID,
    )


class AttrRegressor(nn.Module):
    """Bidirectional encoder regressing the attribute vector from tokens."""

    def __init__(self, config: ModelConfig, n_attributes: int):
        super().__init__()
        self.config = config
        self.n_attributes = n_attributes
        self.tok_emb = nn.Embedding(config.vocab_size, config.d)
        self.pos_emb = nn.Embedding(config.max_len, config.d)
        self.drop = nn.Dropout(config.dropout)
        self.blocks = nn.ModuleList(Block(config, causal=False) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d)
        self.head = nn.Linear(config.d, n_attributes)
        self.apply(_init_module)

    def forward(self, input_ids: torch.Tensor) -> torch.Tensor:
        """Predict (B, k) normalized attribute values from (B, T) token ids."""
        B, T = input_ids.shape
        if T > self.config.max_len:
            raise ValueError(f"sequence length {T} exceeds max_len {self.config.max_len}")
        key_pad = input_ids == PAD_ID
        pos = torch.arange(T, device=input_ids.device)
        x = self.drop(self.tok_emb(input_ids) + self.pos_emb(pos))
        for block in self.blocks:
            x = block(x, key_pad)
        x = self.ln_f(x)
        keep = (~key_pad).to(x.dtype).unsqueeze(-1)
        pooled = (x * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)
        return self.head(pooled)
