"""Synthetic extrinsic benchmark: a separable NER task at desk scale.

Entity surface forms come from a fixed-size gazetteer of invented compound
names with chemistry-flavored suffix regularities, planted in templated
carrier sentences.  Word embeddings are random for carrier words and
tightly clustered for gazetteer words, so a sound tagger must reach
near-perfect span F1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import AnnotatedCorpus, Sentence, Token
from .embeddings import EmbeddingTable

ENTITY_SUFFIXES = ("ol", "ine", "ate", "ide", "ium")
ONSETS = ("br", "cl", "d", "f", "gr", "k", "l", "m", "n", "pr",
          "r", "s", "tr", "v", "z")
VOWELS = ("a", "e", "i", "o", "u")

TEMPLATES = (
    "the solution of {} was heated slowly",
    "we measured the yield of {} after mixing",
    "{} reacts with {} in water",
    "adding {} raised the temperature",
    "the sample contained traces of {}",
    "{} was dissolved before the analysis",
    "researchers compared {} with {} overnight",
    "a dose of {} showed no effect",
    "the mixture of {} and {} turned blue",
    "{} remained stable under pressure",
    "filtering removed most of the {}",
    "the patent describes {} in detail",
)

CONTINUATION = "acid"  # optional second entity token, tagged I-


def make_gazetteer(size: int, rng: np.random.Generator) -> tuple[str, ...]:
    """Invented compound names: pronounceable roots plus regular suffixes."""
    names: list[str] = []
    seen: set[str] = set()
    while len(names) < size:
        syllables = rng.integers(2, 4)
        root = "".join(ONSETS[rng.integers(len(ONSETS))] + VOWELS[rng.integers(len(VOWELS))]
                       for _ in range(syllables))
        name = root + ENTITY_SUFFIXES[len(names) % len(ENTITY_SUFFIXES)]
        if name not in seen:
            seen.add(name)
            names.append(name)
    return tuple(names)


def _sentence(template: str, gazetteer: tuple[str, ...], entity_type: str,
              rng: np.random.Generator) -> Sentence:
    tokens: list[Token] = []
    for word in template.split():
        if word == "{}":
            name = gazetteer[rng.integers(len(gazetteer))]
            tokens.append(Token(name, f"B-{entity_type}"))
            if rng.random() < 0.3:
                tokens.append(Token(CONTINUATION, f"I-{entity_type}"))
        else:
            tokens.append(Token(word, "O"))
    return Sentence(tuple(tokens))


def _corpus(count: int, name: str, gazetteer: tuple[str, ...], entity_type: str,
            rng: np.random.Generator) -> AnnotatedCorpus:
    sentences = tuple(
        _sentence(TEMPLATES[rng.integers(len(TEMPLATES))], gazetteer, entity_type, rng)
        for _ in range(count))
    return AnnotatedCorpus(sentences, name=name)


@dataclass(frozen=True)
class SyntheticBenchmark:
    train: AnnotatedCorpus
    dev: AnnotatedCorpus
    test: AnnotatedCorpus
    embeddings: EmbeddingTable
    gazetteer: tuple[str, ...]


def synthetic_benchmark(seed: int = 0, *, n_train: int = 500, n_dev: int = 100,
                        n_test: int = 100, dim: int = 50,
                        gazetteer_size: int = 50,
                        entity_type: str = "CHEM") -> SyntheticBenchmark:
    """Generate corpora plus embeddings; deterministic for a fixed seed.

    Carrier words get i.i.d. normal vectors; gazetteer words (and the
    entity continuation token) sit in a tight cluster far from the origin,
    so entity identity is recoverable from the word vector alone.
    """
    rng = np.random.default_rng(seed)
    gazetteer = make_gazetteer(gazetteer_size, rng)
    train = _corpus(n_train, "synthetic-train", gazetteer, entity_type, rng)
    dev = _corpus(n_dev, "synthetic-dev", gazetteer, entity_type, rng)
    test = _corpus(n_test, "synthetic-test", gazetteer, entity_type, rng)

    carrier_words = sorted({w for t in TEMPLATES for w in t.split() if w != "{}"})
    vocab = list(carrier_words) + list(gazetteer) + [CONTINUATION]
    vectors = np.empty((len(vocab), dim))
    n_carrier = len(carrier_words)
    vectors[:n_carrier] = rng.normal(0.0, 1.0, size=(n_carrier, dim))
    center = rng.normal(0.0, 1.0, size=dim)
    center *= 3.0 / np.linalg.norm(center)
    cluster = center + rng.normal(0.0, 0.3, size=(len(vocab) - n_carrier, dim))
    vectors[n_carrier:] = cluster
    table = EmbeddingTable(tuple(vocab), vectors, name="synthetic-embeddings")
    return SyntheticBenchmark(train, dev, test, table, gazetteer)
