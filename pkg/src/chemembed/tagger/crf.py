"""Linear-chain CRF: log-space forward algorithm, gradients, Viterbi.

The transition matrix is ``(K + 2, K + 2)`` for ``K`` tags; row/column
``K`` is the start state and ``K + 1`` the stop state.  Entries into start
and out of stop exist as parameters but never enter any score.
"""

from __future__ import annotations

import numpy as np


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))).squeeze(axis)


def _check(emissions: np.ndarray, transitions: np.ndarray) -> tuple[int, int]:
    emissions = np.asarray(emissions)
    if emissions.ndim != 2 or emissions.shape[0] < 1:
        raise ValueError(f"emissions must be (length, tags), got {emissions.shape}")
    steps, k = emissions.shape
    if transitions.shape != (k + 2, k + 2):
        raise ValueError(
            f"transitions must be ({k + 2}, {k + 2}) for {k} tags, "
            f"got {transitions.shape}")
    return steps, k


def crf_score(emissions: np.ndarray, tags: np.ndarray,
              transitions: np.ndarray) -> float:
    """Unnormalized log-score of one tag path, start/stop included."""
    steps, k = _check(emissions, transitions)
    tags = np.asarray(tags, dtype=np.int64)
    if tags.shape != (steps,):
        raise ValueError(f"tags length {tags.shape} does not match {steps} emissions")
    start, stop = k, k + 1
    score = transitions[start, tags[0]] + emissions[0, tags[0]]
    for t in range(1, steps):
        score += transitions[tags[t - 1], tags[t]] + emissions[t, tags[t]]
    return float(score + transitions[tags[-1], stop])


def _forward(emissions: np.ndarray, transitions: np.ndarray):
    steps, k = emissions.shape
    start, stop = k, k + 1
    alpha = np.empty((steps, k))
    alpha[0] = transitions[start, :k] + emissions[0]
    for t in range(1, steps):
        # alpha[t, j] = em[t, j] + LSE_i(alpha[t-1, i] + trans[i, j])
        alpha[t] = emissions[t] + _logsumexp(
            alpha[t - 1][:, None] + transitions[:k, :k], axis=0)
    log_z = float(_logsumexp(alpha[-1] + transitions[:k, stop], axis=0))
    return log_z, alpha


def _backward(emissions: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    steps, k = emissions.shape
    stop = k + 1
    beta = np.empty((steps, k))
    beta[-1] = transitions[:k, stop]
    for t in range(steps - 2, -1, -1):
        beta[t] = _logsumexp(
            transitions[:k, :k] + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def crf_log_partition(emissions: np.ndarray, transitions: np.ndarray) -> float:
    """log Z via the forward algorithm (overflow-safe log-sum-exp)."""
    _check(emissions, transitions)
    log_z, _ = _forward(np.asarray(emissions, dtype=np.float64), transitions)
    return log_z


def crf_log_likelihood(emissions: np.ndarray, tags: np.ndarray,
                       transitions: np.ndarray) -> float:
    """Negative log P(tags | emissions); always >= 0."""
    emissions = np.asarray(emissions, dtype=np.float64)
    _check(emissions, transitions)
    log_z, _ = _forward(emissions, transitions)
    return log_z - crf_score(emissions, tags, transitions)


def crf_nll_and_grads(emissions: np.ndarray, tags: np.ndarray,
                      transitions: np.ndarray):
    """NLL plus its gradients w.r.t. emissions and transitions.

    Gradients are expected counts under the model minus observed counts on
    the gold path (forward-backward marginals).
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    steps, k = _check(emissions, transitions)
    tags = np.asarray(tags, dtype=np.int64)
    start, stop = k, k + 1
    log_z, alpha = _forward(emissions, transitions)
    beta = _backward(emissions, transitions)
    nll = log_z - crf_score(emissions, tags, transitions)

    d_em = np.exp(alpha + beta - log_z)  # unary marginals, (steps, k)
    d_trans = np.zeros_like(transitions)
    d_trans[start, :k] = d_em[0]
    d_trans[:k, stop] = d_em[-1]
    for t in range(steps - 1):
        pair = (alpha[t][:, None] + transitions[:k, :k]
                + (emissions[t + 1] + beta[t + 1])[None, :])
        d_trans[:k, :k] += np.exp(pair - log_z)

    d_em[np.arange(steps), tags] -= 1.0
    d_trans[start, tags[0]] -= 1.0
    d_trans[tags[-1], stop] -= 1.0
    for t in range(1, steps):
        d_trans[tags[t - 1], tags[t]] -= 1.0
    return nll, d_em, d_trans


def viterbi_decode(emissions: np.ndarray, transitions: np.ndarray) -> list[int]:
    """Highest-scoring tag sequence; ties resolve to the lowest tag index."""
    emissions = np.asarray(emissions, dtype=np.float64)
    steps, k = _check(emissions, transitions)
    start, stop = k, k + 1
    delta = transitions[start, :k] + emissions[0]
    back: list[np.ndarray] = []
    for t in range(1, steps):
        scores = delta[:, None] + transitions[:k, :k]
        best_prev = np.argmax(scores, axis=0)  # first max -> lowest index
        delta = scores[best_prev, np.arange(k)] + emissions[t]
        back.append(best_prev)
    final = delta + transitions[:k, stop]
    tag = int(np.argmax(final))
    path = [tag]
    for best_prev in reversed(back):
        tag = int(best_prev[tag])
        path.append(tag)
    path.reverse()
    return path
