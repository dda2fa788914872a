"""Regenerate the bundled CSV fixtures in src/exirt/data/.

    python tools/make_fixtures.py
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "exirt" / "data"


def _write(name, header, rows):
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def planted_noise(rng, n=360):
    # three binary votes decide the class; `noise` is independent of it
    votes = rng.integers(0, 2, size=(n, 3))
    noise = np.round(rng.uniform(0, 1, n), 4)
    cls = np.where(votes.sum(axis=1) >= 2, "pos", "neg")
    rows = [[*v, z, c] for v, z, c in zip(votes, noise, cls)]
    _write("planted_noise", ["a", "b", "c", "noise", "class"], rows)


def mixed_symbolic(rng, n=300):
    colors = np.array(["red", "green", "blue", "yellow"])
    shapes = np.array(["circle", "square", "triangle"])
    color = colors[rng.integers(0, 4, n)]
    shape = shapes[rng.integers(0, 3, n)]
    size = np.round(rng.uniform(0, 1, n), 3)
    weight = np.round(rng.normal(10, 2, n), 2)
    signal = np.isin(color, ["red", "blue"]).astype(int) + (size > 0.5) + (shape == "square") * 0.5
    label = signal >= 1.5
    flip = rng.random(n) < 0.05
    cls = np.where(label ^ flip, "yes", "no")
    _write("mixed_symbolic", ["color", "shape", "size", "weight", "class"],
           [list(r) for r in zip(color, shape, size, weight, cls)])


def imbalanced_numeric(rng, n=500, f=12):
    X = rng.normal(size=(n, f))
    w = np.array([0.9, 0.7, 0.5, 0.4, 0.3, 0.2] + [0.0] * (f - 6))
    logit = X @ w - 1.9 + rng.normal(0, 1.0, n)
    cls = (logit > 0).astype(int)
    rows = [[*np.round(x, 4), c] for x, c in zip(X, cls)]
    _write("imbalanced_numeric", [f"m{i:02d}" for i in range(f)] + ["class"], rows)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    planted_noise(np.random.default_rng(101))
    mixed_symbolic(np.random.default_rng(202))
    imbalanced_numeric(np.random.default_rng(303))
