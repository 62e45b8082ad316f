"""Static word-embedding tables: word2vec text/binary I/O and cosine kNN.

Vectors are held as float64 regardless of source precision.  Nearest
neighbors are found by exact exhaustive scan, which is the right tool at
the vocabulary sizes this workbench targets.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import DataError, ParseError
from .textio import decode_utf8, read_all


@dataclass(frozen=True)
class EmbeddingTable:
    """An ordered vocabulary plus a dense ``(len(vocab), dim)`` matrix."""

    vocab: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)
    name: str = "embedding"

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(self.vocab):
            raise ValueError(
                f"vector matrix shape {vectors.shape} does not match "
                f"vocabulary of {len(self.vocab)} words")
        if vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if len(set(self.vocab)) != len(self.vocab):
            seen: set[str] = set()
            for word in self.vocab:
                if word in seen:
                    raise ValueError(f"duplicate word in vocabulary: {word!r}")
                seen.add(word)
        for word in self.vocab:
            # whitespace would corrupt the word2vec wire formats
            if not word or any(c.isspace() for c in word):
                raise ValueError(f"invalid vocabulary word: {word!r}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding vectors must be finite (no NaN/Inf)")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.vocab)})

    def __len__(self) -> int:
        return len(self.vocab)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def index_of(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise DataError(f"word not in vocabulary of {self.name!r}: {word!r}") from None

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index_of(word)]


@dataclass(frozen=True)
class NeighborList:
    query: str
    neighbors: tuple[tuple[str, float], ...]

    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.neighbors)

    def to_dict(self) -> dict:
        return {"query": self.query,
                "neighbors": [{"word": w, "similarity": s} for w, s in self.neighbors]}


# ---------------------------------------------------------------------------
# word2vec text format


def _parse_header(line: str, name: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(f"bad header {line!r} (expected 'vocab_size dimension')",
                         source=name, line=1)
    try:
        n, d = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer header fields in {line!r}",
                         source=name, line=1) from None
    if n < 1 or d < 1:
        raise ParseError(f"header counts must be positive, got {line!r}",
                         source=name, line=1)
    return n, d


def read_w2v_text(source: bytes | IO[bytes], *, name: str = "embedding") -> EmbeddingTable:
    """Parse the word2vec text format: header line, then ``word v1 .. vd``."""
    text = decode_utf8(read_all(source), source=name)
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty stream", source=name, line=1)
    n, d = _parse_header(lines[0], name)
    data_lines = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(data_lines) != n:
        raise ParseError(f"header declares {n} words but found {len(data_lines)} data lines",
                         source=name)
    vocab: list[str] = []
    seen: set[str] = set()
    vectors = np.empty((n, d), dtype=np.float64)
    for row, (lineno, line) in enumerate(data_lines):
        parts = line.split()
        if len(parts) != d + 1:
            raise ParseError(
                f"expected word plus {d} components, got {len(parts)} fields",
                source=name, line=lineno)
        word = parts[0]
        if word in seen:
            raise ParseError(f"duplicate word {word!r}", source=name, line=lineno)
        seen.add(word)
        for col, component in enumerate(parts[1:]):
            try:
                vectors[row, col] = float(component)
            except ValueError:
                raise ParseError(
                    f"non-numeric component {component!r} for word {word!r} "
                    f"at position {col}",
                    source=name, line=lineno) from None
        if not np.all(np.isfinite(vectors[row])):
            raise ParseError(f"non-finite component for word {word!r}",
                             source=name, line=lineno)
        vocab.append(word)
    return EmbeddingTable(tuple(vocab), vectors, name=name)


def write_w2v_text(table: EmbeddingTable) -> bytes:
    """Serialize using shortest round-trip decimals (bit-exact re-read)."""
    out = io.StringIO()
    out.write(f"{len(table)} {table.dim}\n")
    for word, vec in zip(table.vocab, table.vectors):
        out.write(word)
        for v in vec:
            out.write(" ")
            out.write(repr(float(v)))
        out.write("\n")
    return out.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# word2vec binary format


def read_w2v_binary(source: bytes | IO[bytes], *, name: str = "embedding") -> EmbeddingTable:
    """Parse the word2vec binary format.

    ASCII header line, then per record: word bytes terminated by a single
    space, ``d`` little-endian float32 values, and an optional trailing
    newline byte (layouts with and without it are both accepted).
    """
    data = read_all(source)
    nl = data.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line", source=name, offset=0)
    try:
        header = data[:nl].decode("ascii")
    except UnicodeDecodeError as exc:
        raise ParseError("header is not ASCII", source=name, offset=exc.start) from None
    n, d = _parse_header(header, name)
    vec_bytes = 4 * d
    pos = nl + 1
    vocab: list[str] = []
    seen: set[str] = set()
    vectors = np.empty((n, d), dtype=np.float64)
    for row in range(n):
        word_start = pos
        sp = data.find(b" ", pos)
        if sp < 0:
            raise ParseError(
                f"truncated stream: record {row} has no space-terminated word",
                source=name, offset=word_start)
        try:
            word = data[word_start:sp].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(
                f"word at record {row} is not valid UTF-8",
                source=name, offset=word_start + exc.start) from None
        if not word or any(c.isspace() for c in word):
            raise ParseError(f"invalid word {word!r} at record {row}",
                             source=name, offset=word_start)
        if word in seen:
            raise ParseError(f"duplicate word {word!r}", source=name, offset=word_start)
        seen.add(word)
        pos = sp + 1
        if pos + vec_bytes > len(data):
            raise ParseError(
                f"truncated stream: expected {vec_bytes} vector bytes for "
                f"{word!r}, only {len(data) - pos} available",
                source=name, offset=pos)
        with np.errstate(invalid="ignore"):
            # NaN payloads in corrupt streams are caught by the finite check
            vectors[row] = np.frombuffer(data, dtype="<f4", count=d, offset=pos)
        pos += vec_bytes
        if pos < len(data) and data[pos:pos + 1] == b"\n":
            pos += 1
        vocab.append(word)
    if not np.all(np.isfinite(vectors)):
        raise ParseError("non-finite vector component", source=name)
    return EmbeddingTable(tuple(vocab), vectors, name=name)


def write_w2v_binary(table: EmbeddingTable) -> bytes:
    """Little-endian float32 records, space after word, newline after record."""
    out = io.BytesIO()
    out.write(f"{len(table)} {table.dim}\n".encode("ascii"))
    for word, vec in zip(table.vocab, table.vectors):
        out.write(word.encode("utf-8"))
        out.write(b" ")
        out.write(np.asarray(vec, dtype="<f4").tobytes())
        out.write(b"\n")
    return out.getvalue()


def load_table(path, *, fmt: str = "auto", name: str | None = None) -> EmbeddingTable:
    """Load an embedding file; ``fmt`` is ``text``, ``binary``, or ``auto``.

    Auto-detection is by extension: ``.bin`` means binary, anything else
    text.
    """
    import os
    if name is None:
        base = os.path.basename(str(path))
        name = base
        for ext in (".txt", ".bin", ".vec", ".w2v"):
            if name.endswith(ext):
                name = name[: -len(ext)]
    if fmt == "auto":
        fmt = "binary" if str(path).endswith(".bin") else "text"
    with open(path, "rb") as fh:
        if fmt == "binary":
            return read_w2v_binary(fh, name=name)
        if fmt == "text":
            return read_w2v_text(fh, name=name)
    raise ValueError(f"unknown embedding format {fmt!r}")


# ---------------------------------------------------------------------------
# queries


def restrict(table: EmbeddingTable, vocab: set[str]) -> tuple[EmbeddingTable, set[str]]:
    """Keep only ``table.vocab & vocab``, preserving order and vectors.

    Returns the restricted table and the set of requested words the table
    does not cover.  Raises :class:`DataError` when nothing is shared.
    """
    keep = [i for i, w in enumerate(table.vocab) if w in vocab]
    if not keep:
        raise DataError(
            f"no overlap between {table.name!r} and the requested vocabulary")
    kept_words = tuple(table.vocab[i] for i in keep)
    missing = set(vocab) - set(kept_words)
    restricted = EmbeddingTable(kept_words, table.vectors[keep], name=table.name)
    return restricted, missing


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u, v) / (|u| * |v|); raises on zero norms or mismatched shapes."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def cosine_matrix(table: EmbeddingTable) -> np.ndarray:
    """All-pairs cosine similarities of the table's rows."""
    norms = np.linalg.norm(table.vectors, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DataError(
            f"zero-norm vector for word {table.vocab[zero[0]]!r} in {table.name!r}")
    unit = table.vectors / norms[:, None]
    return unit @ unit.T


def top_k(table: EmbeddingTable, query: str, k: int) -> NeighborList:
    """Exact k nearest neighbors by cosine, query excluded.

    Ties are broken by lexicographic word order; fewer than ``k`` neighbors
    are returned when the vocabulary is small.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    qi = table.index_of(query)
    norms = np.linalg.norm(table.vectors, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DataError(
            f"zero-norm vector for word {table.vocab[zero[0]]!r} in {table.name!r}")
    q = table.vectors[qi] / norms[qi]
    scores = (table.vectors @ q) / norms
    order = sorted((i for i in range(len(table)) if i != qi),
                   key=lambda i: (-scores[i], table.vocab[i]))
    chosen = order[:k]
    return NeighborList(query, tuple((table.vocab[i], float(scores[i])) for i in chosen))
