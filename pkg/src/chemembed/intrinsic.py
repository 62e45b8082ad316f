"""Intrinsic comparison of embedding tables.

Three analyses over a fixed query protocol:

* similarity: top-k cosine neighbor lists per table;
* agreement: Jaccard similarity of the neighbor lists after normalizing
  surface terms to chemical identifiers;
* correlation: second-order representational similarity, i.e. Pearson
  correlation of the upper-triangular cosine-similarity entries over the
  shared vocabulary.  The correlation method is an interpretation: it is
  basis-independent, so tables of different dimensionality remain
  comparable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingTable, NeighborList, cosine_matrix, top_k
from .errors import DataError, ParseError
from .textio import decode_utf8, read_all

FALLBACK_POLICIES = ("surface-fallback", "drop")


def jaccard(a: set, b: set) -> float:
    """|a & b| / |a | b|; two empty sets count as fully agreeing (warns)."""
    if not a and not b:
        warnings.warn("jaccard of two empty sets defined as 1.0", stacklevel=2)
        return 1.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class NormalizationDictionary:
    """Case-insensitive map from surface terms to chemical identifiers."""

    entries: dict[str, str]

    def __post_init__(self):
        lowered = {}
        for term, ident in self.entries.items():
            key = term.lower()
            if key in lowered:
                raise ValueError(f"duplicate term after lowercasing: {key!r}")
            if not ident:
                raise ValueError(f"empty identifier for term {term!r}")
            lowered[key] = ident
        object.__setattr__(self, "entries", lowered)

    def lookup(self, term: str) -> str | None:
        return self.entries.get(term.lower())

    def __len__(self) -> int:
        return len(self.entries)


def read_normalization_dict(source: bytes | IO[bytes], *,
                            name: str = "dictionary") -> NormalizationDictionary:
    """Read a TSV dictionary: ``term<TAB>identifier``; duplicates are errors."""
    data = read_all(source)
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(decode_utf8(data, source=name).splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError("expected 'term<TAB>identifier'", source=name, line=lineno)
        key = fields[0].lower()
        if key in entries:
            raise ParseError(f"duplicate term {fields[0]!r}", source=name, line=lineno)
        entries[key] = fields[1]
    return NormalizationDictionary(entries)


@dataclass(frozen=True)
class NormalizedList:
    identifiers: frozenset[str]
    unmatched: tuple[str, ...]


def normalize_list(terms: Sequence[str], dictionary: NormalizationDictionary,
                   fallback: str = "surface-fallback") -> NormalizedList:
    """Map terms to identifiers; synonyms collapse to one set element.

    ``fallback`` controls unmatched terms: ``drop`` discards them,
    ``surface-fallback`` (default) keeps a ``surface:<term>`` sentinel so
    list sizes stay comparable.  Unmatched terms are always reported.
    """
    if fallback not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {fallback!r}; "
                         f"expected one of {FALLBACK_POLICIES}")
    identifiers: set[str] = set()
    unmatched: list[str] = []
    for term in terms:
        ident = dictionary.lookup(term)
        if ident is not None:
            identifiers.add(ident)
        else:
            unmatched.append(term)
            if fallback == "surface-fallback":
                identifiers.add(f"surface:{term.lower()}")
    return NormalizedList(frozenset(identifiers), tuple(unmatched))


@dataclass(frozen=True)
class AgreementReport:
    names: tuple[str, ...]
    jaccard: np.ndarray = field(repr=False)
    normalized_lists: tuple[NormalizedList, ...]

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "jaccard": self.jaccard.tolist(),
            "normalized": [
                {"identifiers": sorted(nl.identifiers), "unmatched": list(nl.unmatched)}
                for nl in self.normalized_lists
            ],
        }


def agreement_matrix(lists: Iterable[tuple[str, Sequence[str]]],
                     dictionary: NormalizationDictionary,
                     fallback: str = "surface-fallback") -> AgreementReport:
    """Pairwise Jaccard agreement between named word lists after normalization."""
    items = list(lists)
    if len(items) < 2:
        raise ValueError("agreement matrix needs at least 2 named lists")
    names = tuple(name for name, _ in items)
    normalized = tuple(normalize_list(words, dictionary, fallback)
                       for _, words in items)
    n = len(items)
    matrix = np.ones((n, n), dtype=np.float64)
    for i in range(n):
        matrix[i, i] = jaccard(set(normalized[i].identifiers),
                               set(normalized[i].identifiers))
        for j in range(i + 1, n):
            value = jaccard(set(normalized[i].identifiers),
                            set(normalized[j].identifiers))
            matrix[i, j] = value
            matrix[j, i] = value
    return AgreementReport(names, matrix, normalized)


@dataclass(frozen=True)
class CorrelationReport:
    names: tuple[str, ...]
    pearson: np.ndarray = field(repr=False)
    shared_vocab: tuple[str, ...]

    @property
    def shared_vocab_size(self) -> int:
        return len(self.shared_vocab)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "pearson": self.pearson.tolist(),
            "shared_vocab_size": self.shared_vocab_size,
            "shared_vocab": list(self.shared_vocab),
        }


def _similarity_profile(table: EmbeddingTable, shared: Sequence[str]) -> np.ndarray:
    """Strict upper triangle of the cosine matrix over ``shared`` words."""
    rows = [table.index_of(w) for w in shared]
    sub = EmbeddingTable(tuple(shared), table.vectors[rows], name=table.name)
    sims = cosine_matrix(sub)
    iu = np.triu_indices(len(shared), k=1)
    return sims[iu]


def correlation_matrix(tables: Sequence[EmbeddingTable]) -> CorrelationReport:
    """Pearson correlation of pairwise-similarity profiles across tables.

    The shared vocabulary is the intersection over all tables, sorted
    lexicographically; it must contain at least 3 words.
    """
    if len(tables) < 2:
        raise ValueError("correlation matrix needs at least 2 tables")
    shared_set = set(tables[0].vocab)
    for table in tables[1:]:
        shared_set &= set(table.vocab)
    shared = tuple(sorted(shared_set))
    if len(shared) < 3:
        raise DataError(
            f"shared vocabulary across tables has {len(shared)} words; "
            f"need at least 3")
    profiles = []
    for table in tables:
        profile = _similarity_profile(table, shared)
        if np.ptp(profile) == 0.0:
            raise DataError(
                f"similarity profile of {table.name!r} has zero variance; "
                f"correlation undefined")
        profiles.append(profile)
    n = len(tables)
    matrix = np.eye(n, dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            r = float(np.corrcoef(profiles[i], profiles[j])[0, 1])
            matrix[i, j] = r
            matrix[j, i] = r
    names = tuple(t.name for t in tables)
    return CorrelationReport(names, matrix, shared)


@dataclass(frozen=True)
class SimilarityReport:
    query: str
    k: int
    neighbor_lists: tuple[tuple[str, NeighborList], ...]
    missing: tuple[str, ...]  # names of tables that do not contain the query

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "k": self.k,
            "tables": {name: nl.to_dict() for name, nl in self.neighbor_lists},
            "missing": list(self.missing),
        }


def similarity_query_report(tables: Sequence[EmbeddingTable], query: str,
                            k: int = 10) -> SimilarityReport:
    """Top-k neighbor lists of ``query`` in every table that contains it."""
    lists: list[tuple[str, NeighborList]] = []
    missing: list[str] = []
    for table in tables:
        if query in table:
            lists.append((table.name, top_k(table, query, k)))
        else:
            missing.append(table.name)
    if not lists:
        raise DataError(f"query {query!r} is in no table "
                        f"(checked {[t.name for t in tables]})")
    return SimilarityReport(query, k, tuple(lists), tuple(missing))
