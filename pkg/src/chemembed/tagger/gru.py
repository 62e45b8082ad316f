"""Batched GRU forward and backward passes in plain numpy.

Gate layout packs update (z), reset (r), and candidate (c) blocks into
single ``(din, 3H)`` / ``(H, 3H)`` matrices so each step costs two GEMMs:

    z = sigmoid(x W_z + h U_z + b_z)
    r = sigmoid(x W_r + h U_r + b_r)
    c = tanh(x W_c + r * (h U_c) + b_c)
    h' = (1 - z) * c + z * h

Padded positions (mask 0) carry the previous state through unchanged, so
the state at the last time index is the encoding of every sequence in the
batch regardless of its length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GRUWeights:
    w: np.ndarray  # (din, 3H)
    u: np.ndarray  # (H, 3H)
    b: np.ndarray  # (3H,)

    @property
    def hidden(self) -> int:
        return self.u.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w.shape[0]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _step(x: np.ndarray, h: np.ndarray, weights: GRUWeights):
    """One GRU step for a (B, din) slice; returns new state plus cache."""
    hh = weights.hidden
    gx = x @ weights.w + weights.b
    gh = h @ weights.u
    z = _sigmoid(gx[:, :hh] + gh[:, :hh])
    r = _sigmoid(gx[:, hh:2 * hh] + gh[:, hh:2 * hh])
    ghc = gh[:, 2 * hh:]
    c = np.tanh(gx[:, 2 * hh:] + r * ghc)
    h_new = (1.0 - z) * c + z * h
    return h_new, (x, h, z, r, c, ghc)


def _step_backward(dh_new: np.ndarray, cache, weights: GRUWeights,
                   dw: np.ndarray, du: np.ndarray, db: np.ndarray):
    """Backprop one step; accumulates into dw/du/db, returns (dx, dh_prev)."""
    x, h_prev, z, r, c, ghc = cache
    hh = weights.hidden
    dz = dh_new * (h_prev - c)
    dc = dh_new * (1.0 - z)
    dh_prev = dh_new * z
    da_c = dc * (1.0 - c * c)
    dr = da_c * ghc
    dghc = da_c * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)
    dgx = np.concatenate([da_z, da_r, da_c], axis=1)
    dgh = np.concatenate([da_z, da_r, dghc], axis=1)
    dw += x.T @ dgx
    db += dgx.sum(axis=0)
    du += h_prev.T @ dgh
    dx = dgx @ weights.w.T
    dh_prev = dh_prev + dgh @ weights.u.T
    return dx, dh_prev


def gru_cell(x: np.ndarray, h: np.ndarray, weights: GRUWeights) -> np.ndarray:
    """Single unbatched GRU step: new hidden state for input x and state h."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.ndim != 1 or h.ndim != 1:
        raise ValueError("gru_cell expects 1-D input and state vectors")
    if x.shape[0] != weights.input_dim or h.shape[0] != weights.hidden:
        raise ValueError(
            f"shape mismatch: input {x.shape[0]} vs weights {weights.input_dim}, "
            f"state {h.shape[0]} vs hidden {weights.hidden}")
    h_new, _ = _step(x[None, :], h[None, :], weights)
    return h_new[0]


def gru_forward(x_seq: np.ndarray, mask: np.ndarray, weights: GRUWeights):
    """Run a GRU over (B, T, din) inputs with a (B, T) validity mask.

    Returns (B, T, H) states and the cache required by
    :func:`gru_backward`.
    """
    bsz, steps, _ = x_seq.shape
    states = np.zeros((bsz, steps, weights.hidden))
    h = np.zeros((bsz, weights.hidden))
    caches = []
    for t in range(steps):
        h_new, cache = _step(x_seq[:, t], h, weights)
        m = mask[:, t][:, None]
        h = m * h_new + (1.0 - m) * h
        states[:, t] = h
        caches.append(cache)
    return states, caches


def gru_backward(d_states: np.ndarray, mask: np.ndarray, caches,
                 weights: GRUWeights):
    """Backprop through :func:`gru_forward`.

    ``d_states`` is the loss gradient w.r.t. every output state.  Returns
    the gradient w.r.t. the inputs plus (dw, du, db).
    """
    bsz, steps, _ = d_states.shape
    dx_seq = np.zeros((bsz, steps, weights.input_dim))
    dw = np.zeros_like(weights.w)
    du = np.zeros_like(weights.u)
    db = np.zeros_like(weights.b)
    dh = np.zeros((bsz, weights.hidden))
    for t in range(steps - 1, -1, -1):
        dh = dh + d_states[:, t]
        m = mask[:, t][:, None]
        dh_new = dh * m
        dh_carry = dh * (1.0 - m)
        dx, dh_prev = _step_backward(dh_new, caches[t], weights, dw, du, db)
        dx_seq[:, t] = dx
        dh = dh_prev + dh_carry
    return dx_seq, dw, du, db


def reverse_padded(x_seq: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Reverse each row's first ``lengths[i]`` steps, leaving padding put.

    The mapping is an involution, so it also un-reverses.
    """
    bsz, steps = x_seq.shape[:2]
    idx = np.tile(np.arange(steps), (bsz, 1))
    valid = idx < lengths[:, None]
    idx = np.where(valid, lengths[:, None] - 1 - idx, idx)
    return x_seq[np.arange(bsz)[:, None], idx]


def bigru_forward(x_seq: np.ndarray, mask: np.ndarray,
                  fwd: GRUWeights, bwd: GRUWeights):
    """Bidirectional GRU: concatenated per-step states of both directions."""
    lengths = mask.sum(axis=1).astype(np.int64)
    states_f, cache_f = gru_forward(x_seq, mask, fwd)
    x_rev = reverse_padded(x_seq, lengths)
    states_r, cache_r = gru_forward(x_rev, mask, bwd)
    states_b = reverse_padded(states_r, lengths)
    states = np.concatenate([states_f, states_b], axis=2)
    return states, (cache_f, cache_r, lengths)


def bigru_backward(d_states: np.ndarray, mask: np.ndarray, cache,
                   fwd: GRUWeights, bwd: GRUWeights):
    """Backprop through :func:`bigru_forward`; returns dx and weight grads."""
    cache_f, cache_r, lengths = cache
    hh = fwd.hidden
    dx_f, dw_f, du_f, db_f = gru_backward(d_states[:, :, :hh], mask, cache_f, fwd)
    d_rev = reverse_padded(d_states[:, :, hh:], lengths)
    dx_r, dw_b, du_b, db_b = gru_backward(d_rev, mask, cache_r, bwd)
    dx = dx_f + reverse_padded(dx_r, lengths)
    return dx, (dw_f, du_f, db_f), (dw_b, du_b, db_b)
