"""Deterministic linguistic-attribute extraction.

Maps a text to a fixed-length vector of surface statistics: word and
character counts, lexical-diversity and sophistication ratios, sentence
averages, the Automated Readability Index, and estimated reading time.
Everything here is a pure function of its inputs, so extraction is safe
to run from any number of workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDocumentError, InsufficientDataError, UnknownAttributeError

TERMINATORS = frozenset(".!?")
CONNECTORS = frozenset("'’-")
VOWELS = frozenset("aeiouy")

# Words-per-minute constant for the reading-time attribute.
READING_WPM = 240.0

# Floor applied to degenerate standard deviations when fitting a normalizer.
STD_FLOOR = 1e-6


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    n_chars: int
    n_syllables: int


@dataclass(frozen=True)
class TokenizedText:
    """Sentences as ordered lists of word tokens; punctuation is dropped."""

    sentences: tuple[tuple[Token, ...], ...]

    @property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(t for sent in self.sentences for t in sent)


@dataclass(frozen=True)
class Lexicons:
    """Stopword set plus a frequency ranking defining word sophistication.

    A word is "sophisticated" when its lowercased form is absent from the
    first ``sophistication_cutoff`` entries of ``frequency_ranking``.
    """

    stopwords: frozenset[str]
    frequency_ranking: tuple[str, ...]
    sophistication_cutoff: int

    def __post_init__(self):
        if len(set(self.frequency_ranking)) != len(self.frequency_ranking):
            raise ValueError("frequency ranking contains duplicates")
        if not 0 < self.sophistication_cutoff <= len(self.frequency_ranking):
            raise ValueError(
                f"cutoff {self.sophistication_cutoff} outside ranking length "
                f"{len(self.frequency_ranking)}"
            )
        object.__setattr__(
            self, "_top_n", frozenset(self.frequency_ranking[: self.sophistication_cutoff])
        )

    def is_sophisticated(self, lower: str) -> bool:
        return lower not in self._top_n

    def is_stopword(self, lower: str) -> bool:
        return lower in self.stopwords

    @classmethod
    def load(cls, dirpath: str | Path, cutoff: int = 2000) -> "Lexicons":
        """Load ``lexicon.txt`` (ranked words) and ``stopwords.txt`` from a directory.

        The cutoff is clamped to the ranking length so short lexicons stay usable.
        """
        dirpath = Path(dirpath)
        ranking = _read_wordlist(dirpath / "lexicon.txt")
        stopwords = _read_wordlist(dirpath / "stopwords.txt")
        return cls(
            stopwords=frozenset(stopwords),
            frequency_ranking=tuple(dict.fromkeys(ranking)),
            sophistication_cutoff=min(cutoff, len(ranking)),
        )

    def save(self, dirpath: str | Path) -> None:
        dirpath = Path(dirpath)
        dirpath.mkdir(parents=True, exist_ok=True)
        (dirpath / "lexicon.txt").write_text(
            "\n".join(self.frequency_ranking) + "\n", encoding="utf-8"
        )
        (dirpath / "stopwords.txt").write_text(
            "\n".join(sorted(self.stopwords)) + "\n", encoding="utf-8"
        )


def _read_wordlist(path: Path) -> list[str]:
    words = []
    for line in path.read_text(encoding="utf-8").splitlines():
        w = line.strip().lower()
        if w:
            words.append(w)
    return words


@dataclass(frozen=True)
class AttributeDef:
    id: str
    name: str
    extractor: str


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attribute set; the order is the canonical vector order everywhere."""

    attributes: tuple[AttributeDef, ...]

    def __post_init__(self):
        ids = [a.id for a in self.attributes]
        if len(set(ids)) != len(ids):
            raise ValueError("attribute ids must be unique")
        for a in self.attributes:
            if a.extractor not in EXTRACTORS:
                raise UnknownAttributeError(f"unknown extractor {a.extractor!r}")

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.attributes)

    def index_of(self, attr_id: str) -> int:
        try:
            return self.ids.index(attr_id)
        except ValueError:
            raise UnknownAttributeError(f"unknown attribute id {attr_id!r}") from None

    @classmethod
    def load(cls, path: str | Path) -> "AttributeSchema":
        records = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(tuple(AttributeDef(r["id"], r["name"], r["extractor"]) for r in records))

    def save(self, path: str | Path) -> None:
        records = [{"id": a.id, "name": a.name, "extractor": a.extractor} for a in self.attributes]
        Path(path).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")


def count_syllables(word: str) -> int:
    """Count maximal vowel groups (a,e,i,o,u,y), dropping a terminal silent 'e'.

    A final 'e' is kept when the word ends in consonant+'le'. Result is
    floored at 1 so every word contributes at least one syllable.
    """
    if not word:
        raise ValueError("word must be non-empty")
    w = word.lower()
    groups = 0
    prev_vowel = False
    for ch in w:
        is_vowel = ch in VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if w.endswith("e"):
        silent = not (len(w) >= 3 and w.endswith("le") and w[-3] not in VOWELS)
        if silent:
            groups -= 1
    return max(groups, 1)


def _scan_words(segment: str) -> list[str]:
    """Maximal runs of alphanumerics, keeping apostrophes/hyphens flanked by alnums."""
    words = []
    i, n = 0, len(segment)
    while i < n:
        if segment[i].isalnum():
            j = i + 1
            while j < n:
                if segment[j].isalnum():
                    j += 1
                elif segment[j] in CONNECTORS and j + 1 < n and segment[j + 1].isalnum():
                    j += 2
                else:
                    break
            words.append(segment[i:j])
            i = j
        else:
            i += 1
    return words


def _split_sentences(text: str) -> list[str]:
    """Split at '.', '!', '?' followed by whitespace or end-of-text."""
    segments = []
    start = 0
    for i, ch in enumerate(text):
        if ch in TERMINATORS and (i + 1 == len(text) or text[i + 1].isspace()):
            segments.append(text[start : i + 1])
            start = i + 1
    if start < len(text):
        segments.append(text[start:])
    return segments


def _make_token(word: str) -> Token:
    lower = word.lower()
    return Token(
        surface=word,
        lower=lower,
        n_chars=sum(ch.isalnum() for ch in word),
        n_syllables=count_syllables(lower),
    )


def segment_and_tokenize(text: str) -> TokenizedText:
    """Deterministic sentence segmentation and word tokenization.

    Segments with no word tokens are dropped; a document with no word
    tokens at all raises :class:`EmptyDocumentError`.
    """
    sentences = []
    for segment in _split_sentences(text):
        words = _scan_words(segment)
        if words:
            sentences.append(tuple(_make_token(w) for w in words))
    if not sentences:
        raise EmptyDocumentError("no word tokens found")
    return TokenizedText(sentences=tuple(sentences))


# ---------------------------------------------------------------------------
# Attribute extractors. Each maps (TokenizedText, Lexicons) to a float; the
# registry key doubles as the default schema's extractor identifier.
# ---------------------------------------------------------------------------


def _counts(tt: TokenizedText, lex: Lexicons) -> dict[str, float]:
    tokens = tt.tokens
    n_words = len(tokens)
    n_sentences = len(tt.sentences)
    n_chars = sum(t.n_chars for t in tokens)
    n_syllables = sum(t.n_syllables for t in tokens)
    uniq = {t.lower for t in tokens}
    uniq_soph = {w for w in uniq if lex.is_sophisticated(w)}
    uniq_lex = {w for w in uniq if not lex.is_stopword(w)}
    uniq_soph_lex = uniq_soph & uniq_lex
    return {
        "n_words": float(n_words),
        "n_unique_words": float(len(uniq)),
        "n_soph_words": float(sum(lex.is_sophisticated(t.lower) for t in tokens)),
        "n_unique_soph_words": float(len(uniq_soph)),
        "n_unique_lexical_words": float(len(uniq_lex)),
        "n_unique_soph_lexical_words": float(len(uniq_soph_lex)),
        "n_stopwords": float(sum(lex.is_stopword(t.lower) for t in tokens)),
        "n_sentences": float(n_sentences),
        "n_chars": float(n_chars),
        "n_syllables": float(n_syllables),
    }


def _safe_ratio(num: float, den: float, flags: set[str], attr_id: str) -> float:
    if den == 0:
        flags.add(attr_id)
        return 0.0
    return num / den


def extract_with_flags(
    text: str, schema: AttributeSchema, lexicons: Lexicons
) -> tuple[np.ndarray, set[str]]:
    """Extract the schema's attribute vector plus ids of degenerate ratios.

    Ratios with a zero denominator yield 0.0 and flag the attribute instead
    of aborting, so batch pipelines survive pathological generations.
    """
    tt = segment_and_tokenize(text)
    c = _counts(tt, lexicons)
    flags: set[str] = set()
    values = np.empty(len(schema), dtype=np.float64)
    for i, attr in enumerate(schema.attributes):
        values[i] = EXTRACTORS[attr.extractor](c, flags, attr.id)
    return values, flags


def extract(text: str, schema: AttributeSchema, lexicons: Lexicons) -> np.ndarray:
    """Extract the schema's attribute vector for one document."""
    values, _ = extract_with_flags(text, schema, lexicons)
    return values


EXTRACTORS = {
    "n_words": lambda c, f, a: c["n_words"],
    "n_unique_words": lambda c, f, a: c["n_unique_words"],
    "unique_word_ratio": lambda c, f, a: _safe_ratio(c["n_unique_words"], c["n_words"], f, a),
    "n_soph_words": lambda c, f, a: c["n_soph_words"],
    "n_unique_soph_words": lambda c, f, a: c["n_unique_soph_words"],
    "n_unique_lexical_words": lambda c, f, a: c["n_unique_lexical_words"],
    "n_unique_soph_lexical_words": lambda c, f, a: c["n_unique_soph_lexical_words"],
    "lexical_sophistication": lambda c, f, a: _safe_ratio(
        c["n_unique_soph_lexical_words"], c["n_unique_lexical_words"], f, a
    ),
    "n_stopwords": lambda c, f, a: c["n_stopwords"],
    "n_sentences": lambda c, f, a: c["n_sentences"],
    "n_chars": lambda c, f, a: c["n_chars"],
    "avg_words_per_sentence": lambda c, f, a: c["n_words"] / c["n_sentences"],
    "avg_chars_per_sentence": lambda c, f, a: c["n_chars"] / c["n_sentences"],
    "avg_chars_per_word": lambda c, f, a: _safe_ratio(c["n_chars"], c["n_words"], f, a),
    "avg_syllables_per_sentence": lambda c, f, a: c["n_syllables"] / c["n_sentences"],
    "ari": lambda c, f, a: (
        4.71 * c["n_chars"] / c["n_words"] + 0.5 * c["n_words"] / c["n_sentences"] - 21.43
    ),
    "reading_time_s": lambda c, f, a: 60.0 * c["n_words"] / READING_WPM,
}

_DEFAULT_ATTRS = [
    ("n_words", "# Total Words"),
    ("n_unique_words", "# Unique Words"),
    ("unique_word_ratio", "Ratio of Unique Words"),
    ("n_soph_words", "# Total Sophisticated Words"),
    ("n_unique_soph_words", "# Unique Sophisticated Words"),
    ("n_unique_lexical_words", "# Unique Lexical Words"),
    ("n_unique_soph_lexical_words", "# Unique Sophisticated Lexical Words"),
    ("lexical_sophistication", "Lexical Sophistication (Unique)"),
    ("n_stopwords", "# Stop Words"),
    ("n_sentences", "# Sentences"),
    ("n_chars", "# Characters"),
    ("avg_words_per_sentence", "Average Words Per Sentence"),
    ("avg_chars_per_sentence", "Average Characters Per Sentence"),
    ("avg_chars_per_word", "Average Characters Per Word"),
    ("avg_syllables_per_sentence", "Average Syllables Per Sentence"),
    ("ari", "Automated Readability Index"),
    ("reading_time_s", "Reading Time (s)"),
]

DEFAULT_SCHEMA = AttributeSchema(
    tuple(AttributeDef(i, n, i) for i, n in _DEFAULT_ATTRS)
)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-attribute z-score statistics, immutable after fitting."""

    ids: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    floored: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def load(cls, path: str | Path) -> "NormStats":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        ids = tuple(data.keys())
        means = np.array([data[i]["mean"] for i in ids], dtype=np.float64)
        stds = np.array([data[i]["std"] for i in ids], dtype=np.float64)
        floored = tuple(i for i, s in zip(ids, stds) if s <= STD_FLOOR)
        return cls(ids=ids, means=means, stds=stds, floored=floored)

    def save(self, path: str | Path) -> None:
        data = {
            i: {"mean": float(m), "std": float(s)}
            for i, m, s in zip(self.ids, self.means, self.stds)
        }
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def fit_normalizer(vectors: np.ndarray, ids: tuple[str, ...]) -> NormStats:
    """Fit per-attribute mean/std (population) over corpus attribute vectors.

    Standard deviations are floored at ``STD_FLOOR``; floored attributes are
    recorded so downstream reports can flag degenerate columns.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != len(ids):
        raise ValueError(f"expected shape (n, {len(ids)}), got {vectors.shape}")
    if vectors.shape[0] < 2:
        raise InsufficientDataError("need at least 2 vectors to fit a normalizer")
    means = vectors.mean(axis=0)
    stds = vectors.std(axis=0)
    floored = tuple(i for i, s in zip(ids, stds) if s < STD_FLOOR)
    stds = np.maximum(stds, STD_FLOOR)
    return NormStats(ids=ids, means=means, stds=stds, floored=floored)


def normalize(values: np.ndarray, stats: NormStats) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != len(stats):
        raise ValueError(f"length mismatch: {values.shape[-1]} != {len(stats)}")
    return (values - stats.means) / stats.stds


def denormalize(values: np.ndarray, stats: NormStats) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != len(stats):
        raise ValueError(f"length mismatch: {values.shape[-1]} != {len(stats)}")
    return values * stats.stds + stats.means
