"""Span extraction from BIO tags and exact-match precision/recall/F1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..corpus import AnnotatedCorpus


@dataclass(frozen=True, order=True)
class Span:
    sentence_index: int
    start: int  # inclusive token index
    end: int    # exclusive token index
    entity_type: str

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"span start {self.start} must be < end {self.end}")


def spans_of(tags: Sequence[str], sentence_index: int = 0) -> list[Span]:
    """Decode BIO tags into spans.

    Stray continuations are tolerated the way conlleval does it: an I-X
    with no compatible open span starts a new X span.  Gold and predicted
    sequences must go through the same decoder for the comparison to be
    fair.
    """
    spans: list[Span] = []
    start: int | None = None
    current: str | None = None

    def close(end: int) -> None:
        nonlocal start, current
        if start is not None:
            spans.append(Span(sentence_index, start, end, current))
        start, current = None, None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
            continue
        prefix, entity = tag.split("-", 1)
        if prefix == "B" or current != entity:
            close(i)
            start, current = i, entity
    close(len(tags))
    return spans


@dataclass(frozen=True)
class PRF:
    true_positives: int
    predicted: int
    gold: int

    @property
    def precision(self) -> float:
        return self.true_positives / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.true_positives / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "true_positives": self.true_positives,
                "predicted": self.predicted, "gold": self.gold}


@dataclass(frozen=True)
class EvaluationReport:
    micro: PRF
    per_type: dict[str, PRF]

    def to_dict(self) -> dict:
        return {"micro": self.micro.to_dict(),
                "per_type": {t: prf.to_dict() for t, prf in sorted(self.per_type.items())}}


def evaluate_f1(gold: AnnotatedCorpus,
                predicted: Sequence[Sequence[str]]) -> EvaluationReport:
    """Exact-span P/R/F1: a hit needs identical start, end, and type.

    ``predicted`` must align with the gold corpus sentence by sentence and
    token by token.
    """
    if len(predicted) != len(gold.sentences):
        raise ValueError(
            f"predicted {len(predicted)} sentences for a corpus of "
            f"{len(gold.sentences)}")
    gold_spans: set[Span] = set()
    pred_spans: set[Span] = set()
    for i, (sentence, tags) in enumerate(zip(gold.sentences, predicted)):
        if len(tags) != len(sentence):
            raise ValueError(
                f"sentence {i}: predicted {len(tags)} tags for "
                f"{len(sentence)} tokens")
        gold_spans.update(spans_of(sentence.tags, i))
        pred_spans.update(spans_of(tags, i))
    types = {s.entity_type for s in gold_spans} | {s.entity_type for s in pred_spans}
    per_type: dict[str, PRF] = {}
    for entity in sorted(types):
        g = {s for s in gold_spans if s.entity_type == entity}
        p = {s for s in pred_spans if s.entity_type == entity}
        per_type[entity] = PRF(len(g & p), len(p), len(g))
    micro = PRF(len(gold_spans & pred_spans), len(pred_spans), len(gold_spans))
    return EvaluationReport(micro, per_type)
