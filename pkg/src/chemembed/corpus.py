"""CoNLL-format corpus ingestion, vocabularies, and overlap statistics.

File format: UTF-8 text, one token per line as ``surface<TAB>tag``, a blank
line terminating each sentence.  LF and CRLF are both accepted on read; LF
is emitted on write.  Tags follow the BIO scheme: ``O`` or ``B-TYPE`` /
``I-TYPE`` with a non-empty TYPE.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import DataError, ParseError
from .textio import decode_utf8

TAG_RE = re.compile(r"^(O|[BI]-.+)$")


@dataclass(frozen=True)
class Token:
    surface: str
    tag: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("a sentence must contain at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t.tag for t in self.tokens)


@dataclass(frozen=True)
class AnnotatedCorpus:
    sentences: tuple[Sentence, ...]
    name: str = "corpus"

    def __post_init__(self):
        if not self.sentences:
            raise ValueError("a corpus must contain at least one sentence")

    def __len__(self) -> int:
        return len(self.sentences)

    def tag_set(self) -> set[str]:
        return {t.tag for s in self.sentences for t in s.tokens}


@dataclass(frozen=True)
class BioViolation:
    """An I-X tag whose predecessor is neither B-X nor I-X."""

    sentence_index: int
    token_index: int
    tag: str
    previous_tag: str | None

    def describe(self) -> str:
        prev = self.previous_tag if self.previous_tag is not None else "<start>"
        return (f"sentence {self.sentence_index}, token {self.token_index}: "
                f"{self.tag} follows {prev}")


def _as_text(source: bytes | str | IO[bytes], name: str = "input") -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        return decode_utf8(source, source=name)
    data = source.read()
    if isinstance(data, bytes):
        return decode_utf8(data, source=name)
    return data


def read_conll(source: bytes | str | IO[bytes], *, name: str = "corpus",
               tag_column: int | None = None) -> AnnotatedCorpus:
    """Parse a CoNLL stream into an :class:`AnnotatedCorpus`.

    ``tag_column`` selects the tag field for multi-column variants; the
    default requires exactly two tab-separated fields per line.  A final
    sentence without a trailing blank line is included.

    Raises :class:`ParseError` on malformed lines and :class:`DataError`
    when the input contains no sentences.
    """
    text = _as_text(source, name)
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if tokens:
                sentences.append(Sentence(tuple(tokens)))
                tokens = []
            continue
        fields = line.split("\t")
        if tag_column is None:
            if len(fields) != 2:
                raise ParseError(
                    f"expected 'surface<TAB>tag', got {len(fields)} field(s): {line!r}",
                    source=name, line=lineno)
            surface, tag = fields
        else:
            if len(fields) <= max(1, tag_column):
                raise ParseError(
                    f"expected at least {max(1, tag_column) + 1} fields, "
                    f"got {len(fields)}: {line!r}",
                    source=name, line=lineno)
            surface, tag = fields[0], fields[tag_column]
        if not surface or any(c.isspace() for c in surface):
            raise ParseError(f"invalid surface form {surface!r}",
                             source=name, line=lineno)
        if not TAG_RE.match(tag):
            raise ParseError(f"invalid tag {tag!r} (expected O or B-/I-TYPE)",
                             source=name, line=lineno)
        tokens.append(Token(surface, tag))
    if tokens:
        sentences.append(Sentence(tuple(tokens)))
    if not sentences:
        raise DataError(f"{name}: empty corpus (no sentences found)")
    return AnnotatedCorpus(tuple(sentences), name=name)


def load_conll(path, *, tag_column: int | None = None) -> AnnotatedCorpus:
    import os
    name = os.path.splitext(os.path.basename(str(path)))[0]
    with open(path, "rb") as fh:
        return read_conll(fh, name=name, tag_column=tag_column)


def write_conll(corpus: AnnotatedCorpus) -> bytes:
    """Serialize a corpus; each sentence is a blank-line-terminated block."""
    out = io.StringIO()
    for sentence in corpus.sentences:
        for token in sentence.tokens:
            out.write(f"{token.surface}\t{token.tag}\n")
        out.write("\n")
    return out.getvalue().encode("utf-8")


def save_conll(corpus: AnnotatedCorpus, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_conll(corpus))


def validate_bio(corpus: AnnotatedCorpus) -> list[BioViolation]:
    """Collect BIO-consistency violations without repairing them.

    An ``I-X`` tag is valid only when the previous token's tag is ``B-X``
    or ``I-X``.
    """
    violations: list[BioViolation] = []
    for si, sentence in enumerate(corpus.sentences):
        prev: str | None = None
        for ti, token in enumerate(sentence.tokens):
            if token.tag.startswith("I-"):
                entity = token.tag[2:]
                ok = prev in (f"B-{entity}", f"I-{entity}")
                if not ok:
                    violations.append(BioViolation(si, ti, token.tag, prev))
            prev = token.tag
    return violations


def load_stopwords(source: bytes | str | IO[bytes]) -> set[str]:
    """Read a stopword file: UTF-8, one word per line, lowercased on load."""
    text = _as_text(source)
    return {line.strip().lower() for line in text.splitlines() if line.strip()}


def content_vocabulary(corpus: AnnotatedCorpus,
                       stopwords: set[str] | None = None) -> set[str]:
    """Lowercased content-word types: stopwords and non-word tokens removed.

    A token counts as a content word when every character is alphanumeric
    and at least one is alphabetic, which drops pure punctuation and pure
    number tokens.
    """
    stop = stopwords or set()
    vocab: set[str] = set()
    for sentence in corpus.sentences:
        for token in sentence.tokens:
            word = token.surface.lower()
            if word in stop:
                continue
            if word.isalnum() and any(c.isalpha() for c in word):
                vocab.add(word)
    return vocab


@dataclass(frozen=True)
class VocabularyOverlapReport:
    names: tuple[str, ...]
    sizes: tuple[int, ...]
    pairwise_counts: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "sizes": list(self.sizes),
            "pairwise_counts": self.pairwise_counts.tolist(),
        }


def overlap_report(vocabs: Iterable[tuple[str, set[str]]]) -> VocabularyOverlapReport:
    """Pairwise shared-word counts between named vocabularies.

    The count matrix is symmetric with the vocabulary sizes on the
    diagonal.  At least two vocabularies are required.
    """
    items = list(vocabs)
    if len(items) < 2:
        raise ValueError("overlap report needs at least 2 vocabularies")
    names = tuple(name for name, _ in items)
    sets = [vocab for _, vocab in items]
    n = len(sets)
    counts = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        counts[i, i] = len(sets[i])
        for j in range(i + 1, n):
            shared = len(sets[i] & sets[j])
            counts[i, j] = shared
            counts[j, i] = shared
    return VocabularyOverlapReport(names, tuple(len(s) for s in sets), counts)
