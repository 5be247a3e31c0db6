"""Sampling-based generation from a trained decoder checkpoint.

Requests give raw-unit target values for any subset of the schema;
uncontrolled attributes are masked exactly as during training. Sampling
decisions run through caller-provided numpy generators (one per sequence),
so results are reproducible regardless of batching.
"""

from __future__ import annotations

import numpy as np
import torch

from .checkpoint import Checkpoint
from .errors import UnknownAttributeError
from .vocab import EOS_ID, PAD_ID, SOS_ID, UNK_ID, detokenize

BANNED_AT_SAMPLING = (PAD_ID, SOS_ID, UNK_ID)


def condition_from_request(
    ckpt: Checkpoint, request: dict[str, float]
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized value vector and mask for a raw-unit target request."""
    k = len(ckpt.schema)
    values = np.zeros(k, dtype=np.float64)
    masked = np.ones(k, dtype=bool)
    for attr_id, raw in request.items():
        idx = ckpt.schema.index_of(attr_id)
        values[idx] = (float(raw) - ckpt.normstats.means[idx]) / ckpt.normstats.stds[idx]
        masked[idx] = False
    return values, masked


def _pick_token(logits_row: np.ndarray, rng: np.random.Generator,
                temperature: float, top_p: float) -> int:
    if temperature <= 0.0:
        return int(np.argmax(logits_row))
    scaled = logits_row / temperature
    scaled = scaled - scaled.max()
    probs = np.exp(scaled)
    probs /= probs.sum()
    order = np.argsort(-probs, kind="stable")
    cum = np.cumsum(probs[order])
    cut = int(np.searchsorted(cum, top_p)) + 1
    kept = order[:cut]
    kept_probs = probs[kept]
    r = rng.random() * kept_probs.sum()
    return int(kept[np.searchsorted(np.cumsum(kept_probs), r)])


def sample_token_ids(
    ckpt: Checkpoint,
    values: np.ndarray,
    masked: np.ndarray,
    rngs: list[np.random.Generator],
    temperature: float = 1.0,
    top_p: float = 0.95,
    max_new_tokens: int | None = None,
) -> list[list[int]]:
    """Ancestral sampling for a batch of condition rows; returns content ids."""
    model = ckpt.model
    model.eval()
    B = values.shape[0]
    if max_new_tokens is None:
        max_new_tokens = ckpt.config.max_len - 1
    max_new_tokens = min(max_new_tokens, ckpt.config.max_len - 1)

    values_t = torch.from_numpy(np.ascontiguousarray(values)).to(torch.float32)
    masked_t = torch.from_numpy(np.ascontiguousarray(masked))
    seq = torch.full((B, 1), SOS_ID, dtype=torch.long)
    out: list[list[int]] = [[] for _ in range(B)]
    finished = np.zeros(B, dtype=bool)

    with torch.no_grad():
        for _ in range(max_new_tokens):
            logits = model(seq, values_t, masked_t)[:, -1, :]
            logits[:, list(BANNED_AT_SAMPLING)] = float("-inf")
            rows = logits.to(torch.float64).numpy()
            next_ids = np.full(B, PAD_ID, dtype=np.int64)
            for i in range(B):
                if finished[i]:
                    continue
                token = _pick_token(rows[i], rngs[i], temperature, top_p)
                if token == EOS_ID:
                    finished[i] = True
                else:
                    out[i].append(token)
                    next_ids[i] = token
            if finished.all():
                break
            seq = torch.cat([seq, torch.from_numpy(next_ids).unsqueeze(1)], dim=1)
    return out


def generate_batch(
    ckpt: Checkpoint,
    requests: list[dict[str, float]],
    rngs: list[np.random.Generator],
    temperature: float = 1.0,
    top_p: float = 0.95,
    max_new_tokens: int | None = None,
    batch_size: int = 64,
) -> list[str]:
    """Generate one document per request; empty string marks a degenerate output."""
    if len(requests) != len(rngs):
        raise ValueError("one random generator per request is required")
    conditions = [condition_from_request(ckpt, r) for r in requests]
    texts: list[str] = []
    for start in range(0, len(requests), batch_size):
        chunk = conditions[start : start + batch_size]
        values = np.stack([c[0] for c in chunk])
        masked = np.stack([c[1] for c in chunk])
        ids = sample_token_ids(
            ckpt, values, masked, rngs[start : start + len(chunk)],
            temperature=temperature, top_p=top_p, max_new_tokens=max_new_tokens,
        )
        for row in ids:
            texts.append(detokenize(ckpt.vocab.decode(row)))
    return texts


def generate(
    ckpt: Checkpoint,
    request: dict[str, float],
    rng: np.random.Generator,
    temperature: float = 1.0,
    top_p: float = 0.95,
    max_new_tokens: int | None = None,
) -> str:
    """Generate a single document for a raw-unit target request."""
    return generate_batch(
        ckpt, [request], [rng],
        temperature=temperature, top_p=top_p, max_new_tokens=max_new_tokens,
    )[0]


def generate_vanilla(
    ckpt: Checkpoint,
    rng: np.random.Generator,
    temperature: float = 1.0,
    top_p: float = 0.95,
    max_new_tokens: int | None = None,
) -> str:
    """Uncontrolled baseline: every attribute masked (empty request)."""
    return generate(ckpt, {}, rng, temperature=temperature, top_p=top_p,
                    max_new_tokens=max_new_tokens)
