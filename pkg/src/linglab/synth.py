"""Synthetic corpus generator.

Produces short lowercase documents with controlled variation in sentence
count, sentence length, stopword density, and rare pseudo-word injection,
so every implemented attribute has signal. The generating parameters are
emitted next to each text for diagnostics; the matching lexicon files put
every ordinary word inside the sophistication cutoff and leave the
pseudo-words outside it.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .textstats import Lexicons

STOPWORDS = (
    "the", "a", "of", "and", "to", "in", "it", "is", "was", "on",
    "he", "she", "they", "we", "you", "for", "with", "at", "by", "this",
    "that", "but", "as", "or",
)

COMMON_WORDS = (
    "cat", "dog", "bird", "fish", "horse", "mouse", "tree", "leaf", "root",
    "stone", "river", "lake", "hill", "field", "cloud", "rain", "snow",
    "wind", "storm", "light", "shadow", "house", "door", "window", "roof",
    "wall", "road", "path", "bridge", "garden", "market", "village", "town",
    "child", "friend", "farmer", "sailor", "teacher", "doctor", "baker",
    "hunter", "singer", "writer", "reader", "walker", "runner", "keeper",
    "morning", "evening", "night", "summer", "winter", "spring", "autumn",
    "moment", "season", "journey", "story", "letter", "song", "voice",
    "sound", "silence", "color", "water", "fire", "earth", "metal", "wood",
    "paper", "glass", "bread", "fruit", "apple", "berry", "honey", "milk",
    "walks", "runs", "sees", "finds", "makes", "takes", "gives", "keeps",
    "holds", "brings", "carries", "follows", "leads", "opens", "closes",
    "builds", "breaks", "grows", "falls", "rises", "moves", "stops",
    "waits", "sleeps", "wakes", "sings", "speaks", "listens", "watches",
    "remembers", "forgets", "learns", "teaches", "travels", "returns",
    "small", "large", "old", "young", "new", "long", "short", "high",
    "low", "warm", "cold", "bright", "dark", "quiet", "loud", "soft",
    "hard", "slow", "quick", "heavy", "gentle", "simple", "plain",
    "green", "blue", "red", "white", "black", "grey", "golden", "silver",
    "early", "late", "near", "far", "here", "there", "often", "never",
    "always", "again", "soon", "today", "slowly", "quickly", "quietly",
)

# Invented words; absent from the frequency ranking, hence "sophisticated".
RARE_WORDS = (
    "zorvix", "quellith", "branmore", "tilvane", "oskarith", "pellumar",
    "dravick", "sunthorpe", "grimmold", "ferrowane", "calyptra", "mordwen",
    "ashgrove", "thornfell", "winterbourne", "eldermist", "corvanthe",
    "ironmere", "duskhollow", "ravenstead", "mirebrook", "stormwick",
    "fenwhistle", "galdermoor", "hexworth", "larkspindle", "nightmarsh",
    "oakenshaw", "pyrelight", "quillstone", "rimeholt", "silvergate",
    "tarnwood", "umberfall", "veldicote", "wyrmsend", "yarrowfen",
    "zephyrine", "blackmere", "cinderholt",
)

TERMINATOR_CHOICES = (".", ".", ".", ".", ".", ".", ".", ".", "!", "?")

MIN_SENT_WORDS, MAX_SENT_WORDS = 3, 20
MIN_SENTENCES, MAX_SENTENCES = 1, 4


def synth_sample(rng: np.random.Generator) -> dict:
    """One synthetic document plus its generating parameters."""
    n_sentences = int(rng.integers(MIN_SENTENCES, MAX_SENTENCES + 1))
    stop_density = float(rng.uniform(0.2, 0.7))
    rare_rate = float(rng.choice([0.0, 0.05, 0.1, 0.2, 0.3]))
    sentence_lengths = []
    sentences = []
    for _ in range(n_sentences):
        length = int(rng.integers(MIN_SENT_WORDS, MAX_SENT_WORDS + 1))
        sentence_lengths.append(length)
        words = []
        for _ in range(length):
            if rng.random() < stop_density:
                words.append(STOPWORDS[rng.integers(len(STOPWORDS))])
            elif rng.random() < rare_rate:
                words.append(RARE_WORDS[rng.integers(len(RARE_WORDS))])
            else:
                words.append(COMMON_WORDS[rng.integers(len(COMMON_WORDS))])
        terminator = TERMINATOR_CHOICES[rng.integers(len(TERMINATOR_CHOICES))]
        sentences.append(" ".join(words) + terminator)
    return {
        "text": " ".join(sentences),
        "gen_n_words": int(sum(sentence_lengths)),
        "gen_n_sentences": n_sentences,
        "gen_sentence_lengths": sentence_lengths,
        "gen_stopword_density": stop_density,
        "gen_rare_rate": rare_rate,
    }


def synth_corpus(rng: np.random.Generator, n: int) -> list[dict]:
    if n < 1:
        raise ValueError("need n >= 1")
    return [synth_sample(rng) for _ in range(n)]


def write_corpus(samples: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample) + "\n")


def synth_lexicons() -> Lexicons:
    """Lexicons matching the generator's word pools."""
    ranking = STOPWORDS + COMMON_WORDS
    return Lexicons(
        stopwords=frozenset(STOPWORDS),
        frequency_ranking=ranking,
        sophistication_cutoff=len(ranking),
    )
