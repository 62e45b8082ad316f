"""Training loop: Adam, length-grouped batches, early stopping on dev F1.

Everything downstream of the seed is deterministic: parameter init, batch
composition, epoch shuffling, and dropout all draw from one generator in a
fixed order, and gradient accumulation is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import AnnotatedCorpus
from ..embeddings import EmbeddingTable
from ..errors import DataError
from .config import TaggerConfig
from .metrics import EvaluationReport, evaluate_f1
from .model import (TaggerParameters, corpus_alphabet, init_parameters,
                    loss_and_grads, predict_tags)


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: TaggerParameters, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}

    def step(self, params: TaggerParameters, grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        b1c = 1.0 - self.beta1 ** self.step_count
        b2c = 1.0 - self.beta2 ** self.step_count
        for name in sorted(params.arrays):
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[name] / b1c
            v_hat = self.v[name] / b2c
            params.arrays[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_precision: float
    dev_recall: float
    dev_f1: float

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "train_loss": self.train_loss,
                "dev_precision": self.dev_precision,
                "dev_recall": self.dev_recall, "dev_f1": self.dev_f1}


@dataclass(frozen=True)
class TrainingLog:
    epochs: tuple[EpochRecord, ...]
    best_epoch: int  # 0 when training never ran
    stopped_early: bool

    def to_jsonl(self) -> str:
        import json
        lines = [json.dumps(r.to_dict(), sort_keys=True) for r in self.epochs]
        lines.append(json.dumps({"best_epoch": self.best_epoch,
                                 "stopped_early": self.stopped_early},
                                sort_keys=True))
        return "\n".join(lines) + "\n"


def _length_grouped_batches(corpus: AnnotatedCorpus, batch_size: int) -> list[list[int]]:
    order = sorted(range(len(corpus.sentences)),
                   key=lambda i: (len(corpus.sentences[i]), i))
    return [order[i:i + batch_size] for i in range(0, len(order), batch_size)]


def evaluate_corpus(corpus: AnnotatedCorpus, table: EmbeddingTable,
                    params: TaggerParameters, config: TaggerConfig) -> EvaluationReport:
    """Decode every sentence and score spans against the gold tags."""
    predictions = [predict_tags(s.surfaces, table, params, config)
                   for s in corpus.sentences]
    return evaluate_f1(corpus, predictions)


def train(train_corpus: AnnotatedCorpus, dev_corpus: AnnotatedCorpus,
          table: EmbeddingTable, config: TaggerConfig,
          *, progress=None) -> tuple[TaggerParameters, TrainingLog]:
    """Train a tagger; returns the best-dev-epoch parameters and the log.

    Stops at ``max_epochs`` or once dev F1 has not improved for
    ``patience`` consecutive epochs.  ``progress`` may be a callable
    receiving each :class:`EpochRecord` as it is produced.
    """
    train_tags = sorted(train_corpus.tag_set())
    unseen = dev_corpus.tag_set() - set(train_tags)
    if unseen:
        raise DataError(
            f"dev corpus uses tags unseen in training data: {sorted(unseen)}")
    alphabet = corpus_alphabet(train_corpus.sentences)
    rng = np.random.default_rng(config.seed)
    params = init_parameters(config, tuple(train_tags), alphabet, table.dim, rng)
    optimizer = Adam(params, config.learning_rate)
    batches = _length_grouped_batches(train_corpus, config.batch_size)

    surfaces = [s.surfaces for s in train_corpus.sentences]
    tag_ids = [np.array([params.tag_id(t) for t in s.tags], dtype=np.int64)
               for s in train_corpus.sentences]

    best_params = params.clone()
    best_f1 = -1.0
    best_epoch = 0
    since_improvement = 0
    records: list[EpochRecord] = []
    stopped_early = False
    for epoch in range(1, config.max_epochs + 1):
        batch_order = rng.permutation(len(batches))
        total_loss = 0.0
        for bi in batch_order:
            batch = batches[bi]
            loss, grads = loss_and_grads(
                [surfaces[i] for i in batch], [tag_ids[i] for i in batch],
                table, params, config, train_mode=True, rng=rng)
            optimizer.step(params, grads)
            total_loss += loss * len(batch)
        params.check_finite()
        report = evaluate_corpus(dev_corpus, table, params, config)
        record = EpochRecord(epoch, total_loss / len(train_corpus.sentences),
                             report.micro.precision, report.micro.recall,
                             report.micro.f1)
        records.append(record)
        if progress is not None:
            progress(record)
        if record.dev_f1 > best_f1:
            best_f1 = record.dev_f1
            best_epoch = epoch
            best_params = params.clone()
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= config.patience:
                stopped_early = True
                break
    return best_params, TrainingLog(tuple(records), best_epoch, stopped_early)
