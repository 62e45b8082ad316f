"""Shared generators for randomized tests."""

from __future__ import annotations

import numpy as np

from chemembed.corpus import AnnotatedCorpus, Sentence, Token
from chemembed.embeddings import EmbeddingTable

LETTERS = "abcdefghijklmnopqrstuvwxyz"
TAGS = ("O", "B-CHEM", "I-CHEM", "B-GENE", "I-GENE")


def random_word(rng: np.random.Generator, min_len: int = 1, max_len: int = 8) -> str:
    length = int(rng.integers(min_len, max_len + 1))
    return "".join(LETTERS[i] for i in rng.integers(0, len(LETTERS), size=length))


def random_corpus(rng: np.random.Generator, n_sentences: int = 5,
                  name: str = "random") -> AnnotatedCorpus:
    sentences = []
    for _ in range(n_sentences):
        n_tokens = int(rng.integers(1, 9))
        tokens = tuple(
            Token(random_word(rng), TAGS[rng.integers(len(TAGS))])
            for _ in range(n_tokens))
        sentences.append(Sentence(tokens))
    return AnnotatedCorpus(tuple(sentences), name=name)


def random_table(rng: np.random.Generator, n_words: int, dim: int,
                 name: str = "random") -> EmbeddingTable:
    vocab: set[str] = set()
    while len(vocab) < n_words:
        vocab.add(random_word(rng, 2, 10))
    return EmbeddingTable(tuple(sorted(vocab)),
                          rng.normal(0.0, 1.0, size=(n_words, dim)), name=name)


def random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# oracles for the tagger suite


def path_score_oracle(emissions, transitions, tags) -> float:
    """CRF path score recomputed with plain Python sums."""
    k = emissions.shape[1]
    start, stop = k, k + 1
    score = transitions[start, tags[0]] + emissions[0, tags[0]]
    for t in range(1, len(tags)):
        score += transitions[tags[t - 1], tags[t]] + emissions[t, tags[t]]
    return float(score + transitions[tags[-1], stop])


def enumerate_paths(n_tags: int, length: int):
    import itertools
    return itertools.product(range(n_tags), repeat=length)


def brute_log_partition(emissions, transitions) -> float:
    import math
    steps, k = emissions.shape
    scores = [path_score_oracle(emissions, transitions, path)
              for path in enumerate_paths(k, steps)]
    m = max(scores)
    return m + math.log(sum(math.exp(s - m) for s in scores))


def brute_best_path(emissions, transitions):
    steps, k = emissions.shape
    best, best_score = None, -np.inf
    for path in enumerate_paths(k, steps):
        score = path_score_oracle(emissions, transitions, path)
        if score > best_score:
            best, best_score = list(path), score
    return best, best_score


def finite_difference_grads(loss_fn, arrays: dict, eps: float = 1e-5) -> dict:
    """Central differences for every entry of every array, in place."""
    grads = {}
    for name, arr in arrays.items():
        grad = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = loss_fn()
            flat[i] = original - eps
            minus = loss_fn()
            flat[i] = original
            gflat[i] = (plus - minus) / (2 * eps)
        grads[name] = grad
    return grads


def max_relative_error(analytic: dict, numeric: dict) -> float:
    worst = 0.0
    for name in analytic:
        a = analytic[name].reshape(-1)
        n = numeric[name].reshape(-1)
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-6)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
