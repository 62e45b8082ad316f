"""Sequence-labeling tagger: char BiGRU + token BiGRU + CRF, trained with Adam."""

from .config import TaggerConfig
from .crf import crf_log_likelihood, viterbi_decode
from .gru import gru_cell
from .metrics import EvaluationReport, Span, evaluate_f1, spans_of
from .model import TaggerParameters, encode_word_chars, forward_scores, init_parameters, predict_tags
from .checkpoint import load_checkpoint, save_checkpoint
from .train import TrainingLog, train

__all__ = [
    "TaggerConfig", "TaggerParameters", "TrainingLog", "EvaluationReport", "Span",
    "crf_log_likelihood", "viterbi_decode", "gru_cell", "encode_word_chars",
    "forward_scores", "init_parameters", "predict_tags", "evaluate_f1", "spans_of",
    "train", "save_checkpoint", "load_checkpoint",
]
