"""Serialization of analysis results: JSON, aligned-column text, manifests.

All writers are deterministic: sorted JSON keys, repr-based float
formatting in JSON, fixed column formats in text, no timestamps anywhere.
Identical inputs and seed therefore produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable, Sequence

import numpy as np


def to_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(payload))


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def format_matrix(names: Sequence[str], matrix: np.ndarray,
                  value_format: str = "{:.4f}") -> str:
    """Aligned-column rendering of a named square matrix."""
    cells = [[value_format.format(matrix[i, j]) for j in range(len(names))]
             for i in range(len(names))]
    label_width = max(len(n) for n in names)
    col_widths = [max(len(names[j]), max(len(row[j]) for row in cells))
                  for j in range(len(names))]
    lines = [" " * label_width + "  "
             + "  ".join(n.rjust(col_widths[j]) for j, n in enumerate(names))]
    for i, name in enumerate(names):
        lines.append(name.ljust(label_width) + "  "
                     + "  ".join(cells[i][j].rjust(col_widths[j])
                                 for j in range(len(names))))
    return "\n".join(lines) + "\n"


def format_neighbor_lists(report) -> str:
    """Human-readable similarity report: one ranked block per table."""
    lines = [f"query: {report.query}   k: {report.k}"]
    for name, neighbors in report.neighbor_lists:
        lines.append("")
        lines.append(f"[{name}]")
        width = max((len(w) for w, _ in neighbors.neighbors), default=1)
        for rank, (word, score) in enumerate(neighbors.neighbors, start=1):
            lines.append(f"  {rank:2d}. {word.ljust(width)}  {score:+.6f}")
    for name in report.missing:
        lines.append("")
        lines.append(f"[{name}] query not in vocabulary")
    return "\n".join(lines) + "\n"


def sha256_of_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(command: str, version: str, seed: int, options: dict,
                   input_paths: Iterable, output_names: Iterable[str]) -> dict:
    return {
        "tool": "chemembed",
        "version": version,
        "command": command,
        "seed": seed,
        "options": options,
        "inputs": {str(p): sha256_of_file(p) for p in input_paths},
        "outputs": sorted(output_names),
    }
