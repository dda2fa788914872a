"""Comparison ranks: permutation importance, leave-one-covariate-out
retraining, and information gain on the training labels."""

from __future__ import annotations

import numpy as np

from .dataset import SYMBOLIC, Dataset
from .ensemble import TrainedEnsemble, train
from .ranking import IMPORTANCE, AttributeRank


def _accuracy(model, X, y) -> float:
    return float(np.mean(model.predict(X) == y))


def permutation_importance_rank(model: TrainedEnsemble, test: Dataset, repeats: int = 5,
                                seed: int = 0) -> AttributeRank:
    """Mean test-accuracy drop when one column is shuffled.

    The shuffle for attribute ``j`` in repeat ``r`` is seeded by
    ``(seed, j, r)``, so scores do not depend on attribute names.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    X, y = test.X, test.labels
    base = _accuracy(model, X, y)
    drops = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        for r in range(repeats):
            rng = np.random.default_rng([seed, j, r])
            Xp = X.copy()
            Xp[:, j] = rng.permutation(Xp[:, j])
            drops[j] += base - _accuracy(model, Xp, y)
    return AttributeRank.from_scores("permutation", test.feature_names, drops / repeats)


def loco_rank(train_ds: Dataset, test: Dataset, family: str, hyper: dict | None = None,
              seed: int = 0) -> AttributeRank:
    """Accuracy lost when the model is retrained without each attribute."""
    hyper = dict(hyper or {})
    if len(train_ds.columns) < 2:
        raise ValueError("leave-one-covariate-out needs at least 2 attributes")
    base = _accuracy(train(family, train_ds, seed=seed, **hyper), test.X, test.labels)
    drops = []
    for name in train_ds.feature_names:
        try:
            reduced = train(family, train_ds.drop(name), seed=seed, **hyper)
            acc = _accuracy(reduced, test.drop(name).X, test.labels)
        except Exception as exc:
            raise RuntimeError(f"retraining without {name!r} failed: {exc}") from exc
        drops.append(base - acc)
    return AttributeRank.from_scores("loco", train_ds.feature_names, drops)


def _entropy_counts(pos, total):
    """Binary entropy in bits for arrays of positive/total counts."""
    pos = np.asarray(pos, dtype=float)
    total = np.asarray(total, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, pos / total, 0.0)
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return np.where(total > 0, h, 0.0)


def information_gain(x, y, symbolic: bool = False) -> float:
    """Entropy reduction from the attribute's best single split.

    Numeric attributes use their best binary threshold; symbolic ones are
    partitioned by category.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    n = len(y)
    parent = float(_entropy_counts(y.sum(), n))
    if symbolic:
        cats, inv = np.unique(x, return_inverse=True)
        tot = np.bincount(inv)
        pos = np.bincount(inv, weights=y)
        child = float(np.sum(tot / n * _entropy_counts(pos, tot)))
        return max(0.0, parent - child)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    k = np.arange(1, n)
    k = k[xs[k - 1] < xs[k]]
    if not len(k):
        return 0.0
    cpos = np.cumsum(ys)[k - 1]
    left = _entropy_counts(cpos, k)
    right = _entropy_counts(ys.sum() - cpos, n - k)
    child = (k * left + (n - k) * right) / n
    return max(0.0, parent - float(child.min()))


def info_gain_rank(train_ds: Dataset) -> AttributeRank:
    """Importance rank from the training labels; independent of any model."""
    if len(np.unique(train_ds.labels)) < 2:
        raise ValueError("information gain needs both classes present")
    gains = [information_gain(c.values, train_ds.labels, c.kind == SYMBOLIC)
             for c in train_ds.columns]
    return AttributeRank.from_scores("infogain", train_ds.feature_names, gains, kind=IMPORTANCE)
