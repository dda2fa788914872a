"""SVG figures for reports. Plain styling; reproducible bytes."""

from __future__ import annotations

import io
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ._io import atomic_write_text  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "exirt"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return atomic_write_text(path, buf.getvalue())


def rank_bars(path, attributes: Sequence[str], scores: Sequence[float], ylabel: str,
              title: str = ""):
    """Horizontal bars, most relevant attribute on top."""
    fig, ax = plt.subplots(figsize=(6, 0.35 * len(attributes) + 1.2))
    y = np.arange(len(attributes))[::-1]
    ax.barh(y, scores, color="#4c72b0")
    ax.set_yticks(y, attributes)
    ax.set_xlabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def grouped_boxplot(path, groups: Mapping[str, Sequence[float]], ylabel: str, title: str = "",
                    whis: float = 1.5):
    labels = list(groups)
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(labels) + 2), 4))
    ax.boxplot([list(groups[k]) for k in labels], whis=whis)
    ax.set_xticks(np.arange(1, len(labels) + 1), labels, rotation=60, ha="right")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def curves(path, x: Sequence[float], series: Mapping[str, Sequence[float]], xlabel: str,
           ylabel: str, title: str = ""):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, ys in series.items():
        ax.plot(x, ys, label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def heatmap(path, labels: Sequence[str], matrix: np.ndarray, title: str = ""):
    fig, ax = plt.subplots(figsize=(1.2 * len(labels) + 2, 1.2 * len(labels) + 1))
    im = ax.imshow(matrix, vmin=-1, vmax=1, cmap="coolwarm")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def scatter_labeled(path, points: Mapping[str, np.ndarray], labels: Mapping[str, Sequence[str]],
                    xlabel: str, ylabel: str, title: str = ""):
    """One scatter layer per key of ``points`` (n x 2 arrays)."""
    fig, ax = plt.subplots(figsize=(7, 6))
    for name, pts in points.items():
        pts = np.asarray(pts)
        ax.scatter(pts[:, 0], pts[:, 1], label=name, s=20)
        for (px, py), text in zip(pts, labels.get(name, [])):
            ax.annotate(text, (px, py), fontsize=6)
    ax.axhline(0, color="0.8", lw=0.5)
    ax.axvline(0, color="0.8", lw=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)
