"""Prediction and evaluation helpers for the attribute regressor."""

from __future__ import annotations

import numpy as np
import torch

from .checkpoint import Checkpoint
from .data import PreparedRecord
from .errors import EmptyDocumentError, InsufficientDataError
from .textstats import TERMINATORS
from .vocab import lm_tokenize


def _tokens_or_raise(text: str) -> list[str]:
    tokens = lm_tokenize(text)
    if not any(t not in TERMINATORS for t in tokens):
        raise EmptyDocumentError("no word tokens to regress on")
    return tokens


def predict(ckpt: Checkpoint, text: str) -> np.ndarray:
    """Predict the normalized attribute vector of one document."""
    tokens = _tokens_or_raise(text)
    ids = torch.tensor([ckpt.vocab.encode(tokens[: ckpt.config.max_len])], dtype=torch.long)
    ckpt.model.eval()
    with torch.no_grad():
        out = ckpt.model(ids)
    return out[0].to(torch.float64).numpy()


def predict_batch(ckpt: Checkpoint, texts: list[str], batch_size: int = 64) -> np.ndarray:
    """Batched :func:`predict`; rows of texts map to rows of predictions."""
    ckpt.model.eval()
    rows = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            chunk = texts[start : start + batch_size]
            encoded = []
            for text in chunk:
                tokens = _tokens_or_raise(text)
                encoded.append(ckpt.vocab.encode(tokens[: ckpt.config.max_len]))
            width = max(len(e) for e in encoded)
            ids = torch.zeros(len(encoded), width, dtype=torch.long)
            for i, e in enumerate(encoded):
                ids[i, : len(e)] = torch.tensor(e, dtype=torch.long)
            rows.append(ckpt.model(ids).to(torch.float64).numpy())
    return np.concatenate(rows, axis=0)


def pearson_r(a: np.ndarray, b: np.ndarray) -> float | None:
    """Pearson correlation; None when either column is constant."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        return None
    return float((da * db).sum() / denom)


def correlation_report(
    predictions: np.ndarray, gold: np.ndarray, ids: tuple[str, ...]
) -> dict:
    """Normalized MSE plus per-attribute Pearson r with constant-column guard."""
    predictions = np.asarray(predictions, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.float64)
    if predictions.shape != gold.shape or predictions.ndim != 2:
        raise ValueError("predictions and gold must share shape (n, k)")
    if predictions.shape[0] < 2:
        raise InsufficientDataError("need at least 2 samples")
    mse = float(((predictions - gold) ** 2).mean())
    per_attr = {}
    flagged = []
    defined = []
    for j, attr_id in enumerate(ids):
        r = pearson_r(predictions[:, j], gold[:, j])
        per_attr[attr_id] = r
        if r is None:
            flagged.append(attr_id)
        else:
            defined.append(r)
    macro = float(np.mean(defined)) if defined else float("nan")
    return {
        "mse": mse,
        "per_attribute_r": per_attr,
        "macro_r": macro,
        "constant_columns": flagged,
    }


def evaluate_discriminator(ckpt: Checkpoint, records: list[PreparedRecord]) -> dict:
    """Held-out evaluation against the extractor's gold normalized attributes."""
    if len(records) < 2:
        raise InsufficientDataError("need at least 2 records")
    predictions = predict_batch(ckpt, [r.text for r in records])
    gold = np.stack([r.attrs_norm for r in records])
    return correlation_report(predictions, gold, ckpt.schema.ids)
