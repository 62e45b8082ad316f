"""t-SNE projection to two dimensions, implemented from scratch.

Input affinities are Gaussian, with a per-point bisection on the kernel
precision so every conditional distribution hits the target perplexity.
Output affinities use the Student-t kernel with one degree of freedom.
Optimization is gradient descent with momentum 0.5 for the first 250
iterations and 0.8 afterwards, plus the usual per-coordinate adaptive
gains; the input affinities are multiplied by an early-exaggeration factor
of 12 during those first 250 iterations.  Runs are bit-for-bit
deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable

P_FLOOR = 1e-12
EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, exact zeros on the diagonal."""
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _entropy_and_row(d2_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and conditional distribution for one point."""
    shifted = d2_row - d2_row.min()
    p = np.exp(-beta * shifted)
    total = p.sum()
    entropy = np.log(total) + beta * float(np.dot(shifted, p)) / total
    return entropy, p / total

def conditional_affinities(x: np.ndarray, perplexity: float, *,
                           entropy_tol: float = 1e-5,
                           max_steps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Row-stochastic conditional affinities matching the target perplexity.

    For each point the Gaussian precision is found by bisection until the
    entropy is within ``entropy_tol`` nats of ``log(perplexity)``, using at
    most ``max_steps`` steps.  Returns the conditional matrix (diagonal
    zero, rows sum to 1) and the per-point precisions.
    """
    n = x.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    betas = np.ones(n)
    for i in range(n):
        d2_row = np.delete(squared_row(x, i), i)
        beta, lo, hi = 1.0, 0.0, np.inf
        entropy, row = _entropy_and_row(d2_row, beta)
        for _ in range(max_steps):
            if abs(entropy - target) <= entropy_tol:
                break
            if entropy > target:  # too flat: sharpen the kernel
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else (lo + hi) / 2.0
            else:
                hi = beta
                beta = (lo + hi) / 2.0
            entropy, row = _entropy_and_row(d2_row, beta)
        betas[i] = beta
        p_cond[i, :i] = row[:i]
        p_cond[i, i + 1:] = row[i:]
    return p_cond, betas


def squared_row(x: np.ndarray, i: int) -> np.ndarray:
    diff = x - x[i]
    return np.sum(diff * diff, axis=1)


def input_affinities(x: np.ndarray, perplexity: float, *,
                     entropy_tol: float = 1e-5,
                     max_steps: int = 50) -> np.ndarray:
    """Symmetrized joint affinities: non-negative, zero diagonal, sum 1."""
    p_cond, _ = conditional_affinities(x, perplexity,
                                       entropy_tol=entropy_tol,
                                       max_steps=max_steps)
    p = p_cond + p_cond.T
    p /= p.sum()
    return np.maximum(p, P_FLOOR)


def kl_and_grad(p: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P || Q) and its gradient w.r.t. the 2-D coordinates ``y``.

    Q is the normalized Student-t kernel; the gradient is
    ``4 * sum_j (P_ij - Q_ij) * num_ij * (y_i - y_j)``.
    """
    num = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), P_FLOOR)
    mask = ~np.eye(p.shape[0], dtype=bool)
    kl = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    pqn = (p - q) * num
    grad = 4.0 * (np.diag(pqn.sum(axis=1)) - pqn) @ y
    return kl, grad


@dataclass(frozen=True)
class Projection2D:
    words: tuple[str, ...]
    coords: np.ndarray = field(repr=False)
    final_kl: float
    kl_after_exaggeration: float

    def to_tsv(self) -> str:
        lines = ["word\tx\ty"]
        for word, (cx, cy) in zip(self.words, self.coords):
            lines.append(f"{word}\t{cx!r}\t{cy!r}")
        return "\n".join(lines) + "\n"


def tsne(table: EmbeddingTable, perplexity: float = 15.0,
         iterations: int = 1000, seed: int = 0, *,
         learning_rate: float = 100.0) -> Projection2D:
    """Project a table to 2-D coordinates.

    Requires at least 10 words and ``5 <= perplexity <= (n - 1) / 3``.
    """
    n = len(table)
    if n < 10:
        raise ValueError(f"t-SNE needs at least 10 words, got {n}")
    if not 5.0 <= perplexity <= (n - 1) / 3.0:
        raise ValueError(
            f"perplexity must be in [5, {(n - 1) / 3.0:.3f}] for {n} words, "
            f"got {perplexity}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    p = input_affinities(table.vectors, perplexity)
    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_after_exaggeration = np.nan
    for it in range(iterations):
        if it == EXAGGERATION_ITERS:
            kl_after_exaggeration, _ = kl_and_grad(p, y)
        exaggerating = it < EXAGGERATION_ITERS
        p_eff = p * EARLY_EXAGGERATION if exaggerating else p
        _, grad = kl_and_grad(p_eff, y)
        momentum = 0.5 if exaggerating else 0.8
        same_direction = (grad > 0) == (velocity > 0)
        gains = np.where(same_direction, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        velocity = momentum * velocity - learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    final_kl, _ = kl_and_grad(p, y)
    return Projection2D(tuple(table.vocab), y, final_kl,
                        float(kl_after_exaggeration))
