"""Training loops for the decoder and the attribute regressor.

Batches are bucketed by length to keep padding small; batch order is
reshuffled and per-sample attribute masks are redrawn every epoch. The
returned checkpoint is the one with the best validation loss. Identical
seeds and configs give bit-identical loss traces.
"""

from __future__ import annotations

import copy
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .checkpoint import Checkpoint
from .data import PreparedCorpus, PreparedRecord
from .errors import InsufficientDataError, TrainingDivergedError
from .masking import MaskingStrategy, NoMasking, draw_mask
from .model import AttrRegressor, DecoderLM, ModelConfig, lm_loss
from .vocab import EOS_ID, PAD_ID, SOS_ID


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 3e-4
    betas: tuple[float, float] = (0.9, 0.999)
    warmup_steps: int = 100
    batch_size: int = 64
    max_steps: int = 2000
    val_every: int = 200
    val_subset: int | None = 1000
    grad_clip: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class LogRow:
    step: int
    train_loss: float
    val_loss: float


def write_training_log(rows: list[LogRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "train_loss", "val_loss"])
        for row in rows:
            writer.writerow([row.step, repr(row.train_loss), repr(row.val_loss)])


def _sequence(record: PreparedRecord, max_len: int) -> list[int]:
    ids = list(record.token_ids)[: max_len - 2]
    return [SOS_ID] + ids + [EOS_ID]


def _length_bucketed_batches(lengths: list[int], batch_size: int) -> list[list[int]]:
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    return [order[i : i + batch_size] for i in range(0, len(order), batch_size)]


def _collate_ids(seqs: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    out = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = torch.tensor(s, dtype=torch.long)
    return out


def _mask_tensor(draws, k: int) -> torch.Tensor:
    out = torch.zeros(len(draws), k, dtype=torch.bool)
    for i, draw in enumerate(draws):
        for idx in draw.masked:
            out[i, idx] = True
    return out


class _LmBatcher:
    """Precollated token batches; values fixed, masks redrawn per epoch."""

    def __init__(self, records: list[PreparedRecord], k: int, max_len: int, batch_size: int):
        if not records:
            raise InsufficientDataError("empty split")
        seqs = [_sequence(r, max_len) for r in records]
        self.batches = _length_bucketed_batches([len(s) for s in seqs], batch_size)
        self.input_ids = [_collate_ids([seqs[i] for i in batch]) for batch in self.batches]
        values = np.stack([r.attrs_norm for r in records]).astype(np.float32)
        self.values = [torch.from_numpy(values[batch]) for batch in self.batches]
        self.k = k
        self.n_records = len(records)

    def masks(self, rng: np.random.Generator, strategy: MaskingStrategy) -> list[torch.Tensor]:
        draws = [draw_mask(rng, self.k, strategy) for _ in range(self.n_records)]
        return [_mask_tensor([draws[i] for i in batch], self.k) for batch in self.batches]


def _validation_loss_lm(model, batcher: _LmBatcher, masks: list[torch.Tensor]) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for ids, vals, mask in zip(batcher.input_ids, batcher.values, masks):
            n_targets = int((ids[:, 1:] != PAD_ID).sum())
            loss = lm_loss(model, ids, vals, mask)
            total += float(loss) * n_targets
            count += n_targets
    model.train()
    return total / count


def train_lm(
    prepared: PreparedCorpus,
    model_config: ModelConfig,
    train_config: TrainConfig,
    strategy: MaskingStrategy,
) -> tuple[Checkpoint, list[LogRow]]:
    """Teacher-forced training with per-epoch mask redraws and best-val selection."""
    torch.manual_seed(train_config.seed)
    rng = np.random.default_rng(train_config.seed)
    val_rng = np.random.default_rng((train_config.seed, 1))

    config = model_config
    if config.vocab_size != len(prepared.vocab):
        config = ModelConfig(**{**config.to_dict(), "vocab_size": len(prepared.vocab)})
    k = len(prepared.schema)
    model = DecoderLM(config, k)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.lr,
                                 betas=train_config.betas)

    train_records = prepared.split("train")
    val_records = prepared.split("val") or train_records
    if train_config.val_subset is not None:
        val_records = val_records[: train_config.val_subset]
    batcher = _LmBatcher(train_records, k, config.max_len, train_config.batch_size)
    val_batcher = _LmBatcher(val_records, k, config.max_len, train_config.batch_size)
    val_masks = val_batcher.masks(val_rng, strategy)

    best_state = None
    best_val = float("inf")
    best_step = 0
    log: list[LogRow] = []
    recent: list[float] = []
    step = 0
    done = False

    while not done:
        epoch_masks = batcher.masks(rng, strategy)
        order = rng.permutation(len(batcher.batches))
        for batch_idx in order:
            step += 1
            warm = min(1.0, step / max(train_config.warmup_steps, 1))
            for group in optimizer.param_groups:
                group["lr"] = train_config.lr * warm
            loss = lm_loss(
                model,
                batcher.input_ids[batch_idx],
                batcher.values[batch_idx],
                epoch_masks[batch_idx],
            )
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss {float(loss)} at step {step}"
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            if train_config.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), train_config.grad_clip)
            optimizer.step()
            recent.append(float(loss.detach()))

            if step % train_config.val_every == 0 or step == train_config.max_steps:
                val_loss = _validation_loss_lm(model, val_batcher, val_masks)
                log.append(LogRow(step, float(np.mean(recent)), val_loss))
                recent = []
                if val_loss < best_val:
                    best_val = val_loss
                    best_step = step
                    best_state = copy.deepcopy(model.state_dict())
            if step >= train_config.max_steps:
                done = True
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    ckpt = Checkpoint(
        role="lm",
        config=config,
        schema=prepared.schema,
        normstats=prepared.normstats,
        vocab=prepared.vocab,
        model=model,
        step=best_step,
        val_loss=best_val if best_state is not None else float("nan"),
    )
    return ckpt, log


class _DiscBatcher:
    """Token batches without specials, plus gold normalized attribute targets."""

    def __init__(self, records: list[PreparedRecord], max_len: int, batch_size: int):
        if not records:
            raise InsufficientDataError("empty split")
        seqs = [list(r.token_ids)[:max_len] for r in records]
        self.batches = _length_bucketed_batches([len(s) for s in seqs], batch_size)
        self.input_ids = [_collate_ids([seqs[i] for i in batch]) for batch in self.batches]
        targets = np.stack([r.attrs_norm for r in records]).astype(np.float32)
        self.targets = [torch.from_numpy(targets[batch]) for batch in self.batches]


def _validation_loss_disc(model, batcher: _DiscBatcher) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for ids, target in zip(batcher.input_ids, batcher.targets):
            pred = model(ids)
            total += float(F.mse_loss(pred, target, reduction="sum"))
            count += target.numel()
    model.train()
    return total / count


def train_discriminator(
    prepared: PreparedCorpus,
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> tuple[Checkpoint, list[LogRow]]:
    """Squared-error regression of normalized attributes from token sequences."""
    torch.manual_seed(train_config.seed)
    rng = np.random.default_rng(train_config.seed)

    config = model_config
    if config.vocab_size != len(prepared.vocab):
        config = ModelConfig(**{**config.to_dict(), "vocab_size": len(prepared.vocab)})
    k = len(prepared.schema)
    model = AttrRegressor(config, k)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.lr,
                                 betas=train_config.betas)

    train_records = prepared.split("train")
    val_records = prepared.split("val") or train_records
    if train_config.val_subset is not None:
        val_records = val_records[: train_config.val_subset]
    batcher = _DiscBatcher(train_records, config.max_len, train_config.batch_size)
    val_batcher = _DiscBatcher(val_records, config.max_len, train_config.batch_size)

    best_state = None
    best_val = float("inf")
    best_step = 0
    log: list[LogRow] = []
    recent: list[float] = []
    step = 0
    done = False

    while not done:
        order = rng.permutation(len(batcher.batches))
        for batch_idx in order:
            step += 1
            warm = min(1.0, step / max(train_config.warmup_steps, 1))
            for group in optimizer.param_groups:
                group["lr"] = train_config.lr * warm
            pred = model(batcher.input_ids[batch_idx])
            loss = F.mse_loss(pred, batcher.targets[batch_idx])
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss {float(loss)} at step {step}"
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            if train_config.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), train_config.grad_clip)
            optimizer.step()
            recent.append(float(loss.detach()))

            if step % train_config.val_every == 0 or step == train_config.max_steps:
                val_loss = _validation_loss_disc(model, val_batcher)
                log.append(LogRow(step, float(np.mean(recent)), val_loss))
                recent = []
                if val_loss < best_val:
                    best_val = val_loss
                    best_step = step
                    best_state = copy.deepcopy(model.state_dict())
            if step >= train_config.max_steps:
                done = True
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    ckpt = Checkpoint(
        role="discriminator",
        config=config,
        schema=prepared.schema,
        normstats=prepared.normstats,
        vocab=prepared.vocab,
        model=model,
        step=best_step,
        val_loss=best_val if best_state is not None else float("nan"),
    )
    return ckpt, log
