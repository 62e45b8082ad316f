"""Type-level tables from per-occurrence vectors, and SVD standardization.

Occurrence averaging is a single streaming pass with compensated (Kahan)
summation so the result is permutation-invariant to tight tolerance even
for long streams.  Dimensionality standardization is a PCA-style truncated
SVD fitted on the mean-centered row matrix; centering can be disabled.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np

from .embeddings import EmbeddingTable
from .errors import DataError, ParseError
from .textio import decode_utf8


def iter_occurrences(source: bytes | IO[bytes], *,
                     name: str = "occurrences") -> Iterator[tuple[str, np.ndarray]]:
    """Stream (word, vector) records from a TSV: ``word<TAB>v1<TAB>..<TAB>vd``.

    The dimension is fixed by the first record; drift raises
    :class:`ParseError`.
    """
    if isinstance(source, bytes):
        import io
        source = io.BytesIO(source)
    dim: int | None = None
    for lineno, raw in enumerate(source, start=1):
        line = decode_utf8(raw, source=name).rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ParseError("expected 'word<TAB>v1<TAB>...'", source=name, line=lineno)
        word = fields[0]
        if not word or any(c.isspace() for c in word):
            raise ParseError(f"invalid word {word!r}", source=name, line=lineno)
        try:
            vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError(f"non-numeric component for word {word!r}",
                             source=name, line=lineno) from None
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ParseError(
                f"dimension drift: first record had {dim} components, "
                f"word {word!r} has {vec.size}",
                source=name, line=lineno)
        yield word, vec


def average_occurrences(occurrences: Iterable[tuple[str, np.ndarray]],
                        vocab_filter: set[str] | None = None, *,
                        name: str = "averaged",
                        ) -> tuple[EmbeddingTable, dict[str, int]]:
    """One mean vector per word type, plus per-word occurrence counts.

    Words are lowercased for grouping and for the ``vocab_filter`` match.
    Rows of the result are sorted lexicographically.  Raises
    :class:`DataError` when nothing survives the filter.
    """
    filt = {w.lower() for w in vocab_filter} if vocab_filter is not None else None
    sums: dict[str, np.ndarray] = {}
    comps: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for word, vec in occurrences:
        key = word.lower()
        if filt is not None and key not in filt:
            continue
        if key not in sums:
            sums[key] = np.zeros_like(vec)
            comps[key] = np.zeros_like(vec)
            counts[key] = 0
        # Kahan step: carry the low-order bits lost by each addition.
        y = vec - comps[key]
        t = sums[key] + y
        comps[key] = (t - sums[key]) - y
        sums[key] = t
        counts[key] += 1
    if not sums:
        raise DataError("no occurrence records left after vocabulary filtering")
    vocab = tuple(sorted(sums))
    vectors = np.stack([sums[w] / counts[w] for w in vocab])
    return EmbeddingTable(vocab, vectors, name=name), dict(counts)


@dataclass(frozen=True)
class SvdReduction:
    """PCA-style projection: ``x -> components.T @ (x - mean)``."""

    mean: np.ndarray = field(repr=False)
    components: np.ndarray = field(repr=False)  # (d, r), orthonormal columns
    singular_values: np.ndarray = field(repr=False)

    @property
    def input_dim(self) -> int:
        return int(self.components.shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.components.shape[1])


def fit_svd(table: EmbeddingTable, target_dim: int, *, center: bool = True) -> SvdReduction:
    """Fit a truncated SVD on the (optionally mean-centered) row matrix.

    ``target_dim`` must not exceed ``min(len(vocab), dim)``.  When the
    centered matrix has rank below ``target_dim``, the trailing singular
    values are reported as exact zeros and a warning is emitted.
    """
    n, d = table.vectors.shape
    if n < 2:
        raise ValueError("SVD reduction needs at least 2 vocabulary entries")
    if not 1 <= target_dim <= min(n, d):
        raise ValueError(
            f"target_dim must be in [1, {min(n, d)}] for a {n}x{d} table, "
            f"got {target_dim}")
    mean = table.vectors.mean(axis=0) if center else np.zeros(d)
    centered = table.vectors - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    sigma = s[:target_dim].copy()
    cutoff = s[0] * max(n, d) * np.finfo(np.float64).eps
    rank = int(np.sum(s > cutoff))
    if rank < target_dim:
        sigma[rank:] = 0.0
        warnings.warn(
            f"rank of centered matrix is {rank} < target_dim {target_dim}; "
            f"trailing singular values are zero",
            stacklevel=2)
    return SvdReduction(mean=mean, components=vt[:target_dim].T.copy(),
                        singular_values=sigma)


def apply_svd(reduction: SvdReduction, table: EmbeddingTable) -> EmbeddingTable:
    """Project every row of ``table`` through the fitted reduction."""
    if table.dim != reduction.input_dim:
        raise ValueError(
            f"table dimension {table.dim} does not match reduction input "
            f"dimension {reduction.input_dim}")
    projected = (table.vectors - reduction.mean) @ reduction.components
    return EmbeddingTable(table.vocab, projected, name=table.name)
