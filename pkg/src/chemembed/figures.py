"""Static SVG figures rendered next to the delimited outputs.

matplotlib is pinned to the Agg backend and configured for reproducible
SVG: a fixed hash salt for element ids and no creation date in the
metadata, so re-running a command yields byte-identical files.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "chemembed"
_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def save_heatmap(matrix: np.ndarray, labels: Sequence[str], title: str, path,
                 value_format: str = "{:.2f}") -> None:
    """Annotated square heatmap, e.g. overlap counts or correlation."""
    n = len(labels)
    fig, ax = plt.subplots(figsize=(1.0 + 0.85 * n, 0.8 + 0.85 * n))
    image = ax.imshow(matrix, cmap="viridis")
    ax.set_xticks(range(n), labels=list(labels), rotation=45,
                  ha="right", rotation_mode="anchor")
    ax.set_yticks(range(n), labels=list(labels))
    span = float(matrix.max() - matrix.min())
    midpoint = float(matrix.min()) + span / 2.0
    for i in range(n):
        for j in range(n):
            color = "white" if matrix[i, j] < midpoint else "black"
            ax.text(j, i, value_format.format(matrix[i, j]),
                    ha="center", va="center", color=color, fontsize=8)
    ax.set_title(title)
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_scatter(coords: np.ndarray, words: Sequence[str], title: str, path,
                 annotate_up_to: int = 120) -> None:
    """2-D projection scatter with word labels."""
    fig, ax = plt.subplots(figsize=(8, 8))
    ax.scatter(coords[:, 0], coords[:, 1], s=12, color="#1f77b4")
    if len(words) <= annotate_up_to:
        for (x, y), word in zip(coords, words):
            ax.annotate(word, (x, y), fontsize=7,
                        xytext=(2, 2), textcoords="offset points")
    ax.set_title(title)
    ax.set_xlabel("dim 1")
    ax.set_ylabel("dim 2")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
