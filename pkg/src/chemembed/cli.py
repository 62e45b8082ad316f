"""Command-line entry point.

Subcommands mirror the evaluation workflows: ``overlap``, ``derive``,
``intrinsic``, ``train``, ``eval``, ``query``.  Every run writes a
``manifest.json`` with SHA-256 digests of the inputs, the resolved
options, and the tool version; given identical inputs and seed, all
outputs (JSON, TSV, SVG) are byte-identical.

Options resolve with precedence: command-line flags, then the ``--config``
file, then built-in defaults.  The config file is flat ``key = value``
lines ('#' starts a comment; values are booleans, numbers, or strings;
keys use underscores or hyphens interchangeably).

Exit codes: 0 success, 2 usage or file-system errors, 3 data or
validation errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (content_vocabulary, load_conll, load_stopwords,
                     overlap_report, validate_bio)
from .derive import apply_svd, average_occurrences, fit_svd, iter_occurrences
from .embeddings import EmbeddingTable, load_table, top_k, write_w2v_text
from .errors import ChemembedError
from .intrinsic import (NormalizationDictionary, agreement_matrix,
                        correlation_matrix, read_normalization_dict,
                        similarity_query_report)
from .reports import (build_manifest, format_matrix, format_neighbor_lists,
                      to_json, write_json, write_text)
from .tagger import TaggerConfig, train
from .tagger.checkpoint import load_checkpoint_file, save_checkpoint_file
from .tagger.train import evaluate_corpus
from .tsne import tsne

DEFAULT_QUERY = "ibuprofen"
DEFAULT_K = 10
DEFAULT_PERPLEXITY = 15.0
DEFAULT_ITERATIONS = 1000
DEFAULT_SAMPLE = 100

_TAGGER_KEYS = ("char_hidden", "token_hidden", "char_dropout", "token_dropout",
                "batch_size", "max_epochs", "patience", "learning_rate",
                "l2_strength", "char_embed_dim")


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def parse_config_text(text: str, *, source: str = "config") -> dict:
    """Flat key=value grammar; see the module docstring."""
    from .errors import ParseError
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}",
                             source=source, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not key:
            raise ParseError("empty key", source=source, line=lineno)
        values[key] = _parse_scalar(value.strip())
    return values


def _parse_scalar(text: str):
    lowered = text.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _resolve(args: argparse.Namespace, config: dict, defaults: dict) -> dict:
    resolved = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in config:
            resolved[key] = config[key]
        else:
            resolved[key] = default
    return resolved


def _out_dir(options: dict) -> Path:
    out = Path(options["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, options: dict, inputs, outputs) -> None:
    # out_dir and the config file path are plumbing, not analysis inputs;
    # leaving them out keeps manifests byte-identical across destinations
    recorded = {k: str(v) if isinstance(v, Path) else v
                for k, v in sorted(options.items()) if k not in ("out_dir",)}
    manifest = build_manifest(command, __version__, options.get("seed", 0),
                              recorded, inputs, outputs)
    write_json(out / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# subcommands


def cmd_overlap(args: argparse.Namespace, config: dict) -> int:
    options = _resolve(args, config, {
        "embeddings": None, "corpus": None, "stopwords": None,
        "embedding_format": "auto", "out_dir": "chemembed_out", "seed": 0,
    })
    out = _out_dir(options)
    vocabs = []
    inputs = list(options["embeddings"]) + [options["corpus"]]
    for path in options["embeddings"]:
        table = load_table(path, fmt=options["embedding_format"])
        vocabs.append((table.name, set(table.vocab)))
    corpus = load_conll(options["corpus"])
    stopwords = set()
    if options["stopwords"]:
        with open(options["stopwords"], "rb") as fh:
            stopwords = load_stopwords(fh)
        inputs.append(options["stopwords"])
    vocabs.append((corpus.name, content_vocabulary(corpus, stopwords)))
    report = overlap_report(vocabs)

    write_json(out / "overlap.json", report.to_dict())
    write_text(out / "overlap.txt",
               format_matrix(report.names, report.pairwise_counts, "{:d}"))
    from .figures import save_heatmap
    save_heatmap(report.pairwise_counts, report.names, "Vocabulary overlap",
                 out / "overlap.svg", value_format="{:.0f}")
    _write_manifest(out, "overlap", options, inputs,
                    ["overlap.json", "overlap.txt", "overlap.svg"])
    _status(f"wrote overlap report for {len(vocabs)} vocabularies to {out}")
    return 0


def cmd_derive(args: argparse.Namespace, config: dict) -> int:
    options = _resolve(args, config, {
        "occurrences": None, "embedding": None, "target_dim": None,
        "no_center": False, "vocab_file": None, "output": None, "name": None,
        "embedding_format": "auto", "out_dir": "chemembed_out", "seed": 0,
    })
    if (options["occurrences"] is None) == (options["embedding"] is None):
        raise ValueError("exactly one of --occurrences / --embedding is required")
    out = _out_dir(options)
    output = Path(options["output"]) if options["output"] else out / "derived.w2v.txt"
    inputs = []
    outputs = [output.name]
    counts = None
    if options["occurrences"]:
        inputs.append(options["occurrences"])
        vocab_filter = None
        if options["vocab_file"]:
            with open(options["vocab_file"], "rb") as fh:
                vocab_filter = load_stopwords(fh)  # same one-word-per-line format
            inputs.append(options["vocab_file"])
        name = options["name"] or output.stem.replace(".w2v", "")
        with open(options["occurrences"], "rb") as fh:
            table, counts = average_occurrences(
                iter_occurrences(fh, name=str(options["occurrences"])),
                vocab_filter, name=name)
    else:
        inputs.append(options["embedding"])
        table = load_table(options["embedding"], fmt=options["embedding_format"],
                           name=options["name"])
        if options["vocab_file"]:
            from .embeddings import restrict
            with open(options["vocab_file"], "rb") as fh:
                keep = load_stopwords(fh)
            inputs.append(options["vocab_file"])
            table, missing = restrict(table, keep)
            if missing:
                _status(f"{len(missing)} requested words not covered by "
                        f"{table.name}")
    if options["target_dim"] is not None:
        reduction = fit_svd(table, int(options["target_dim"]),
                            center=not options["no_center"])
        table = apply_svd(reduction, table)
    with open(output, "wb") as fh:
        fh.write(write_w2v_text(table))
    if counts is not None:
        write_json(out / "occurrence_counts.json", {"counts": counts})
        outputs.append("occurrence_counts.json")
    _write_manifest(out, "derive", options, inputs, outputs)
    _status(f"wrote {len(table)} x {table.dim} table to {output}")
    return 0


def _tsne_outputs(tables, shared, options, out: Path) -> list[str]:
    from .figures import save_scatter
    rng = np.random.default_rng(options["seed"])
    sample = list(shared)
    size = int(options["tsne_sample"])
    if len(sample) > size:
        sample = sorted(rng.choice(np.array(sample), size=size, replace=False))
    n = len(sample)
    perplexity = options["perplexity"]
    if perplexity is None:
        perplexity = min(DEFAULT_PERPLEXITY, (n - 1) / 3.0)
    if n < 10 or perplexity < 5.0:
        _status(f"skipping t-SNE: {n} shared words is too few for a "
                f"valid perplexity")
        return []
    outputs: list[str] = []
    for table in tables:
        rows = [table.index_of(w) for w in sample]
        sub = EmbeddingTable(tuple(sample), table.vectors[rows], name=table.name)
        projection = tsne(sub, perplexity=float(perplexity),
                          iterations=int(options["iterations"]),
                          seed=int(options["seed"]))
        tsv_name = f"tsne_{table.name}.tsv"
        svg_name = f"tsne_{table.name}.svg"
        write_text(out / tsv_name, projection.to_tsv())
        save_scatter(projection.coords, projection.words,
                     f"t-SNE of {table.name} ({n} shared words)", out / svg_name)
        outputs.extend([tsv_name, svg_name])
    return outputs


def cmd_intrinsic(args: argparse.Namespace, config: dict) -> int:
    options = _resolve(args, config, {
        "embeddings": None, "query": DEFAULT_QUERY, "k": DEFAULT_K,
        "dictionary": None, "fallback": "surface-fallback",
        "perplexity": None, "iterations": DEFAULT_ITERATIONS,
        "tsne_sample": DEFAULT_SAMPLE, "embedding_format": "auto",
        "out_dir": "chemembed_out", "seed": 0,
    })
    if len(options["embeddings"]) < 2:
        raise ValueError("intrinsic analyses need at least 2 embedding files")
    out = _out_dir(options)
    inputs = list(options["embeddings"])
    tables = [load_table(p, fmt=options["embedding_format"])
              for p in options["embeddings"]]
    if options["dictionary"]:
        with open(options["dictionary"], "rb") as fh:
            dictionary = read_normalization_dict(fh, name=str(options["dictionary"]))
        inputs.append(options["dictionary"])
    else:
        dictionary = NormalizationDictionary({})
    outputs: list[str] = []

    similarity = similarity_query_report(tables, options["query"], int(options["k"]))
    write_json(out / "similarity.json", similarity.to_dict())
    write_text(out / "similarity.txt", format_neighbor_lists(similarity))
    outputs += ["similarity.json", "similarity.txt"]

    from .figures import save_heatmap
    named_lists = [(name, list(neighbors.words()))
                   for name, neighbors in similarity.neighbor_lists]
    if len(named_lists) >= 2:
        agreement = agreement_matrix(named_lists, dictionary, options["fallback"])
        write_json(out / "agreement.json", agreement.to_dict())
        write_text(out / "agreement.txt",
                   format_matrix(agreement.names, agreement.jaccard))
        save_heatmap(agreement.jaccard, agreement.names,
                     f"Top-{options['k']} agreement for {options['query']!r}",
                     out / "agreement.svg")
        outputs += ["agreement.json", "agreement.txt", "agreement.svg"]
    else:
        _status("skipping agreement: fewer than 2 tables contain the query")

    correlation = correlation_matrix(tables)
    write_json(out / "correlation.json", correlation.to_dict())
    write_text(out / "correlation.txt",
               format_matrix(correlation.names, correlation.pearson))
    save_heatmap(correlation.pearson, correlation.names,
                 f"Embedding correlation ({correlation.shared_vocab_size} "
                 f"shared words)", out / "correlation.svg")
    outputs += ["correlation.json", "correlation.txt", "correlation.svg"]

    outputs += _tsne_outputs(tables, correlation.shared_vocab, options, out)
    _write_manifest(out, "intrinsic", options, inputs, outputs)
    _status(f"wrote intrinsic reports to {out}")
    return 0


def _load_tagger_corpus(path):
    corpus = load_conll(path)
    violations = validate_bio(corpus)
    if violations:
        _status(f"warning: {corpus.name}: {len(violations)} BIO "
                f"violation(s), e.g. {violations[0].describe()}")
    return corpus


def _tagger_config(options: dict) -> TaggerConfig:
    kwargs = {key: options[key] for key in _TAGGER_KEYS if options[key] is not None}
    kwargs["use_crf"] = not options["no_crf"]
    kwargs["seed"] = int(options["seed"])
    return TaggerConfig(**kwargs)


def cmd_train(args: argparse.Namespace, config: dict) -> int:
    defaults = {key: None for key in _TAGGER_KEYS}
    defaults.update({
        "train": None, "dev": None, "embeddings": None, "no_crf": False,
        "embedding_format": "auto", "out_dir": "chemembed_out", "seed": 0,
    })
    options = _resolve(args, config, defaults)
    out = _out_dir(options)
    train_corpus = _load_tagger_corpus(options["train"])
    dev_corpus = _load_tagger_corpus(options["dev"])
    table = load_table(options["embeddings"], fmt=options["embedding_format"])
    tagger_config = _tagger_config(options)

    start = time.monotonic()

    def progress(record):
        _status(f"epoch {record.epoch}: loss {record.train_loss:.4f} "
                f"dev F1 {record.dev_f1:.4f} "
                f"[{time.monotonic() - start:.1f}s]")

    params, log = train(train_corpus, dev_corpus, table, tagger_config,
                        progress=progress)
    save_checkpoint_file(out / "checkpoint.bin", params, tagger_config)
    write_text(out / "train_log.jsonl", log.to_jsonl())
    best = log.epochs[log.best_epoch - 1].to_dict() if log.epochs else None
    write_json(out / "train_metrics.json",
               {"best_epoch": log.best_epoch, "best": best,
                "epochs_run": len(log.epochs), "stopped_early": log.stopped_early})
    _write_manifest(out, "train", options,
                    [options["train"], options["dev"], options["embeddings"]],
                    ["checkpoint.bin", "train_log.jsonl", "train_metrics.json"])
    _status(f"training finished: best epoch {log.best_epoch}, "
            f"checkpoint at {out / 'checkpoint.bin'}")
    return 0


def cmd_eval(args: argparse.Namespace, config: dict) -> int:
    options = _resolve(args, config, {
        "test": None, "checkpoint": None, "embeddings": None,
        "embedding_format": "auto", "out_dir": "chemembed_out", "seed": 0,
    })
    out = _out_dir(options)
    test_corpus = _load_tagger_corpus(options["test"])
    params, tagger_config = load_checkpoint_file(options["checkpoint"])
    table = load_table(options["embeddings"], fmt=options["embedding_format"])
    unseen = test_corpus.tag_set() - set(params.tags)
    if unseen:
        from .errors import DataError
        raise DataError(
            f"test corpus uses tags outside the checkpoint tag set: "
            f"{sorted(unseen)} (checkpoint has {sorted(params.tags)})")
    report = evaluate_corpus(test_corpus, table, params, tagger_config)
    write_json(out / "eval_metrics.json", report.to_dict())
    _write_manifest(out, "eval", options,
                    [options["test"], options["checkpoint"], options["embeddings"]],
                    ["eval_metrics.json"])
    _status(f"test micro F1: {report.micro.f1:.4f}")
    return 0


def cmd_query(args: argparse.Namespace, config: dict) -> int:
    options = _resolve(args, config, {
        "embedding": None, "query": DEFAULT_QUERY, "k": DEFAULT_K,
        "embedding_format": "auto", "out_dir": "chemembed_out", "seed": 0,
    })
    out = _out_dir(options)
    table = load_table(options["embedding"], fmt=options["embedding_format"])
    neighbors = top_k(table, options["query"], int(options["k"]))
    write_json(out / "query.json", neighbors.to_dict())
    lines = [f"{word}\t{score!r}" for word, score in neighbors.neighbors]
    write_text(out / "query.txt", "\n".join(lines) + "\n")
    _write_manifest(out, "query", options, [options["embedding"]],
                    ["query.json", "query.txt"])
    print(to_json(neighbors.to_dict()), end="")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemembed",
        description="Intrinsic and extrinsic evaluation of word embeddings.")
    parser.add_argument("--version", action="version",
                        version=f"chemembed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="seed for every random choice in the run")
        p.add_argument("--out-dir", dest="out_dir", default=None,
                       help="directory for reports and the manifest")
        p.add_argument("--config", default=None,
                       help="key = value file; flags override it")
        p.add_argument("--embedding-format", dest="embedding_format",
                       choices=("auto", "text", "binary"), default=None,
                       help="embedding file format (auto: .bin is binary)")

    p = sub.add_parser("overlap", help="vocabulary overlap statistics")
    add_common(p)
    p.add_argument("--embeddings", nargs="+", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--stopwords", default=None)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("derive", help="average occurrences and/or reduce dimension")
    add_common(p)
    p.add_argument("--occurrences", default=None,
                   help="TSV of per-occurrence vectors")
    p.add_argument("--embedding", default=None, help="existing embedding file")
    p.add_argument("--target-dim", dest="target_dim", type=int, default=None)
    p.add_argument("--no-center", dest="no_center", action="store_const",
                   const=True, default=None,
                   help="skip mean-centering before the SVD")
    p.add_argument("--vocab-file", dest="vocab_file", default=None,
                   help="one word per line: filters averaging, or restricts "
                        "an existing table's vocabulary")
    p.add_argument("--output", default=None)
    p.add_argument("--name", default=None, help="name of the derived table")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("intrinsic",
                       help="similarity, agreement, correlation, projection")
    add_common(p)
    p.add_argument("--embeddings", nargs="+", required=True)
    p.add_argument("--query", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dictionary", default=None,
                   help="term<TAB>identifier normalization TSV")
    p.add_argument("--fallback", choices=("surface-fallback", "drop"), default=None)
    p.add_argument("--perplexity", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--tsne-sample", dest="tsne_sample", type=int, default=None)
    p.set_defaults(func=cmd_intrinsic)

    p = sub.add_parser("train", help="train the sequence tagger")
    add_common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--embeddings", required=True)
    for key in _TAGGER_KEYS:
        flag = "--" + key.replace("_", "-")
        kind = float if key.endswith(("dropout", "rate", "strength")) else int
        p.add_argument(flag, dest=key, type=kind, default=None)
    p.add_argument("--no-crf", dest="no_crf", action="store_const",
                   const=True, default=None,
                   help="independent softmax decoding instead of the CRF")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a test corpus")
    add_common(p)
    p.add_argument("--test", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--embeddings", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("query", help="top-k neighbors in one embedding")
    add_common(p)
    p.add_argument("--embedding", required=True)
    p.add_argument("--query", default=None)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_query)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config: dict = {}
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                config = parse_config_text(fh.read(), source=args.config)
        return args.func(args, config)
    except ChemembedError as exc:
        print(f"chemembed: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"chemembed: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"chemembed: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
