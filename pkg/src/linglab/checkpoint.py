"""Single-file checkpoint container.

Layout: 4-byte magic, u32 format version, u64 header length, JSON header
(role, model config, schema, normalizer, vocabulary, parameter manifest,
step counter, validation loss), then raw little-endian float32 parameter
blocks in the order the header declares. Save/load round-trips are
bit-identical for float32 models.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .model import AttrRegressor, DecoderLM, ModelConfig
from .textstats import AttributeDef, AttributeSchema, NormStats
from .vocab import Vocabulary

MAGIC = b"LGLB"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    role: str  # "lm" or "discriminator"
    config: ModelConfig
    schema: AttributeSchema
    normstats: NormStats
    vocab: Vocabulary
    model: torch.nn.Module
    step: int = 0
    val_loss: float = float("nan")


def build_model(role: str, config: ModelConfig, n_attributes: int) -> torch.nn.Module:
    if role == "lm":
        return DecoderLM(config, n_attributes)
    if role == "discriminator":
        return AttrRegressor(config, n_attributes)
    raise ValueError(f"unknown checkpoint role {role!r}")


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    state = ckpt.model.state_dict()
    params = [{"name": name, "shape": list(tensor.shape)} for name, tensor in state.items()]
    header = {
        "role": ckpt.role,
        "config": ckpt.config.to_dict(),
        "schema": [
            {"id": a.id, "name": a.name, "extractor": a.extractor}
            for a in ckpt.schema.attributes
        ],
        "normstats": {
            i: {"mean": float(m), "std": float(s)}
            for i, m, s in zip(ckpt.normstats.ids, ckpt.normstats.means, ckpt.normstats.stds)
        },
        "vocab": list(ckpt.vocab.tokens),
        "step": ckpt.step,
        "val_loss": ckpt.val_loss,
        "params": params,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for name in state:
            block = state[name].detach().cpu().to(torch.float32).numpy()
            fh.write(block.astype("<f4", copy=False).tobytes())


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
        schema = AttributeSchema(
            tuple(AttributeDef(r["id"], r["name"], r["extractor"]) for r in header["schema"])
        )
        ids = tuple(header["normstats"].keys())
        normstats = NormStats(
            ids=ids,
            means=np.array([header["normstats"][i]["mean"] for i in ids]),
            stds=np.array([header["normstats"][i]["std"] for i in ids]),
            floored=tuple(i for i in ids if header["normstats"][i]["std"] <= 1e-6),
        )
        vocab = Vocabulary(tokens=tuple(header["vocab"]))
        model = build_model(header["role"], config, len(schema))
        state = model.state_dict()
        declared = [p["name"] for p in header["params"]]
        if declared != list(state.keys()):
            raise ValueError("checkpoint parameter manifest does not match the model")
        loaded = {}
        for spec in header["params"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 4)
            array = np.frombuffer(raw, dtype="<f4").reshape(shape)
            loaded[spec["name"]] = torch.from_numpy(array.copy())
        model.load_state_dict(loaded)
        model.eval()
    return Checkpoint(
        role=header["role"],
        config=config,
        schema=schema,
        normstats=normstats,
        vocab=vocab,
        model=model,
        step=header["step"],
        val_loss=header["val_loss"],
    )
