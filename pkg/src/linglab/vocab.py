"""Word-level vocabulary and the tokenization used by the language models.

Model tokens are lowercased word tokens (same scanning rule as the
attribute extractor) plus standalone sentence terminators '.', '!', '?'.
Detokenization joins words with single spaces and attaches terminators to
the preceding token, so synthetic corpora round-trip exactly.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .textstats import CONNECTORS, TERMINATORS

PAD, SOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
SPECIALS = (PAD, SOS, EOS, UNK)
PAD_ID, SOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3


def lm_tokenize_with_spans(text: str) -> tuple[list[str], list[tuple[int, int]]]:
    """Lowercased words and sentence terminators with their character spans."""
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isalnum():
            j = i + 1
            while j < n:
                if text[j].isalnum():
                    j += 1
                elif text[j] in CONNECTORS and j + 1 < n and text[j + 1].isalnum():
                    j += 2
                else:
                    break
            tokens.append(text[i:j].lower())
            spans.append((i, j))
            i = j
        elif ch in TERMINATORS:
            tokens.append(ch)
            spans.append((i, i + 1))
            i += 1
        else:
            i += 1
    return tokens, spans


def lm_tokenize(text: str) -> list[str]:
    return lm_tokenize_with_spans(text)[0]


def detokenize(tokens: list[str]) -> str:
    """Inverse of :func:`lm_tokenize` for generated token streams."""
    parts: list[str] = []
    for tok in tokens:
        if tok in TERMINATORS or not parts:
            parts.append(tok)
        else:
            parts.append(" " + tok)
    return "".join(parts)


@dataclass(frozen=True)
class Vocabulary:
    """Dense token<->id bijection with the four specials at the front."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens[: len(SPECIALS)] != SPECIALS:
            raise ValueError("vocabulary must start with the special tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._ids.get(token, UNK_ID)

    def encode(self, tokens: list[str]) -> list[int]:
        return [self._ids.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"tokens": list(self.tokens)}, indent=0) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(tokens=tuple(data["tokens"]))


def build_vocab(token_sequences, min_freq: int = 2) -> Vocabulary:
    """Frequency-sorted vocabulary, ties broken lexicographically, specials first."""
    counts = Counter()
    for seq in token_sequences:
        counts.update(seq)
    if not counts:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = [t for t, c in counts.items() if c >= min_freq and t not in SPECIALS]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(tokens=SPECIALS + tuple(kept))
