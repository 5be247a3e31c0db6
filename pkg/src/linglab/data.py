"""Corpus ingestion: tokenize, truncate, extract attributes, split, normalize.

A prepared corpus directory holds one JSONL shard per split plus the
schema, normalizer, vocabulary, and a manifest with checksums and seeds.
Normalization statistics and the vocabulary come from the train split
only, so validation and test never leak into them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDocumentError, InsufficientDataError
from .textstats import (
    TERMINATORS,
    AttributeSchema,
    Lexicons,
    NormStats,
    extract,
    fit_normalizer,
    normalize,
)
from .vocab import Vocabulary, build_vocab, lm_tokenize_with_spans

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")

    def assign(self, index: int) -> str:
        """Deterministic split by seeded hash of the record index."""
        digest = hashlib.sha256(f"{self.seed}:{index}".encode()).digest()
        u = int.from_bytes(digest[:8], "big") / 2**64
        if u < self.fractions[0]:
            return "train"
        if u < self.fractions[0] + self.fractions[1]:
            return "val"
        return "test"


@dataclass(frozen=True)
class IngestConfig:
    max_len: int = 100
    min_freq: int = 2
    split: SplitSpec = field(default_factory=SplitSpec)


@dataclass(frozen=True)
class PreparedRecord:
    text: str
    token_ids: tuple[int, ...]
    attrs_raw: np.ndarray
    attrs_norm: np.ndarray
    split: str


@dataclass(frozen=True)
class PreparedCorpus:
    root: Path
    schema: AttributeSchema
    normstats: NormStats
    vocab: Vocabulary
    manifest: dict
    records: dict[str, list[PreparedRecord]]

    def split(self, name: str) -> list[PreparedRecord]:
        return self.records[name]


def truncate_tokens(text: str, budget: int) -> tuple[list[str], str]:
    """Cut the model-token stream at ``budget`` tokens; slice the text to match.

    The budget leaves room for the start and end specials, so prepared
    sequences never exceed the model's position table.
    """
    tokens, spans = lm_tokenize_with_spans(text)
    if len(tokens) <= budget:
        return tokens, text
    end = spans[budget - 1][1]
    return tokens[:budget], text[:end]


def ingest(
    input_path: str | Path,
    out_dir: str | Path,
    schema: AttributeSchema,
    lexicons: Lexicons,
    config: IngestConfig = IngestConfig(),
) -> PreparedCorpus:
    """Prepare a JSONL corpus (one object per line, required key ``text``).

    Malformed lines and token-free texts are skipped and counted, never
    fatal. Attributes are recomputed from the truncated text so stored
    vectors always match the stored string.
    """
    input_path = Path(input_path)
    out_dir = Path(out_dir)
    budget = config.max_len - 2
    if budget < 1:
        raise ValueError("max_len must leave room for content tokens")

    rows = []
    skipped_malformed = 0
    skipped_empty = 0
    with open(input_path, encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                text = obj["text"]
                if not isinstance(text, str):
                    raise TypeError("text must be a string")
            except (json.JSONDecodeError, KeyError, TypeError):
                skipped_malformed += 1
                continue
            tokens, truncated = truncate_tokens(text, budget)
            if not any(t not in TERMINATORS for t in tokens):
                skipped_empty += 1
                continue
            try:
                attrs = extract(truncated, schema, lexicons)
            except EmptyDocumentError:
                skipped_empty += 1
                continue
            rows.append((index, config.split.assign(index), truncated, tokens, attrs))

    if not rows:
        raise InsufficientDataError("no usable records in corpus")

    train_rows = [r for r in rows if r[1] == "train"]
    if len(train_rows) < 2:
        raise InsufficientDataError("train split needs at least 2 records")

    stats = fit_normalizer(
        np.stack([r[4] for r in train_rows]), schema.ids
    )
    vocab = build_vocab((r[3] for r in train_rows), min_freq=config.min_freq)

    out_dir.mkdir(parents=True, exist_ok=True)
    shard_dir = out_dir / "shards"
    shard_dir.mkdir(exist_ok=True)
    schema.save(out_dir / "schema.json")
    stats.save(out_dir / "normstats.json")
    vocab.save(out_dir / "vocab.json")

    counts = {s: 0 for s in SPLITS}
    handles = {s: open(shard_dir / f"{s}.jsonl", "w", encoding="utf-8") for s in SPLITS}
    try:
        for _, split_name, text, tokens, attrs in rows:
            counts[split_name] += 1
            record = {
                "text": text,
                "token_ids": vocab.encode(tokens),
                "attrs_raw": [float(v) for v in attrs],
                "attrs_norm": [float(v) for v in normalize(attrs, stats)],
                "split": split_name,
            }
            handles[split_name].write(json.dumps(record) + "\n")
    finally:
        for fh in handles.values():
            fh.close()

    checksums = {
        f"shards/{s}.jsonl": hashlib.sha256((shard_dir / f"{s}.jsonl").read_bytes()).hexdigest()
        for s in SPLITS
    }
    manifest = {
        "counts": counts,
        "skipped": {"malformed": skipped_malformed, "empty": skipped_empty},
        "checksums": checksums,
        "schema": "schema.json",
        "normstats": "normstats.json",
        "vocab": "vocab.json",
        "split_fractions": list(config.split.fractions),
        "split_seed": config.split.seed,
        "max_len": config.max_len,
        "min_freq": config.min_freq,
        "norm_floored": list(stats.floored),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return load_prepared(out_dir)


def load_prepared(prepared_dir: str | Path) -> PreparedCorpus:
    root = Path(prepared_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    schema = AttributeSchema.load(root / manifest["schema"])
    stats = NormStats.load(root / manifest["normstats"])
    vocab = Vocabulary.load(root / manifest["vocab"])
    records: dict[str, list[PreparedRecord]] = {}
    for split_name in SPLITS:
        rows = []
        with open(root / "shards" / f"{split_name}.jsonl", encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                rows.append(
                    PreparedRecord(
                        text=obj["text"],
                        token_ids=tuple(obj["token_ids"]),
                        attrs_raw=np.array(obj["attrs_raw"], dtype=np.float64),
                        attrs_norm=np.array(obj["attrs_norm"], dtype=np.float64),
                        split=split_name,
                    )
                )
        records[split_name] = rows
    return PreparedCorpus(
        root=root,
        schema=schema,
        normstats=stats,
        vocab=vocab,
        manifest=manifest,
        records=records,
    )
