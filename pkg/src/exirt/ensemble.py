"""Random Forest and Gradient Boosting binary classifiers on CART trees,
with a versioned JSON model format.

Both families share one split search that minimises the summed squared
error of the node target. For a 0/1 target the node SSE equals half of
``n * gini``, so on the raw labels this *is* the Gini criterion; for
boosting the target is the logistic-loss gradient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from ._io import atomic_write_text
from .dataset import SYMBOLIC, Dataset

RANDOM_FOREST = "random_forest"
GRADIENT_BOOSTING = "gradient_boosting"
FAMILIES = (RANDOM_FOREST, GRADIENT_BOOSTING)
SCHEMA_VERSION = 1

RF_DEFAULTS = {"n_trees": 100, "max_depth": 8, "min_leaf": 2}
GB_DEFAULTS = {"n_trees": 100, "max_depth": 3, "learning_rate": 0.1, "min_leaf": 1}

_MIN_GAIN = 1e-12


@dataclass
class DecisionTree:
    """Flattened binary tree. ``feature[k] == -1`` marks a leaf.

    Numeric nodes send ``x <= threshold[k]`` left; symbolic nodes send
    ``x`` left when it is one of ``categories[k]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    categories: list = field(default_factory=list)
    max_depth: int = 0

    def __post_init__(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.asarray(self.value, dtype=float)
        if not self.categories:
            self.categories = [None] * len(self.feature)
        self._table = None

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def used_features(self) -> set[int]:
        return {int(f) for f in self.feature if f >= 0}

    def _category_table(self):
        if self._table is None:
            width = 1 + max((max(c) for c in self.categories if c), default=0)
            table = np.zeros((self.n_nodes, width), dtype=bool)
            for k, cats in enumerate(self.categories):
                if cats:
                    table[k, cats] = True
            self._table = table
        return self._table

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(len(X), dtype=np.int64)
        symbolic = np.array([c is not None for c in self.categories], dtype=bool)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            nd = node[active]
            x = X[active, self.feature[nd]]
            go_left = x <= self.threshold[nd]
            sym = symbolic[nd]
            if sym.any():
                table = self._category_table()
                xs = x[sym]
                ids = np.where((xs >= 0) & (xs < table.shape[1]) & (xs == np.floor(xs)),
                               xs, -1).astype(np.int64)
                ok = ids >= 0
                member = np.zeros(len(xs), dtype=bool)
                member[ok] = table[nd[sym][ok], ids[ok]]
                go_left[sym] = member
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] >= 0]
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "max_depth": int(self.max_depth),
            "feature": self.feature.tolist(),
            "threshold": [None if math.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "categories": [None if c is None else [int(x) for x in c] for c in self.categories],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        tree = cls(
            feature=d["feature"],
            threshold=[math.nan if t is None else t for t in d["threshold"]],
            left=d["left"], right=d["right"], value=d["value"],
            categories=[None if c is None else list(c) for c in d["categories"]],
            max_depth=d["max_depth"],
        )
        n = tree.n_nodes
        if not (len(tree.threshold) == len(tree.left) == len(tree.right)
                == len(tree.value) == len(tree.categories) == n) or n == 0:
            raise ValueError("tree node arrays have inconsistent lengths")
        inner = tree.feature >= 0
        children = np.concatenate([tree.left[inner], tree.right[inner]])
        if ((children <= 0) | (children >= n)).any() or len(set(children.tolist())) != len(children):
            raise ValueError("tree structure is not a rooted binary tree")
        return tree


# ---------------------------------------------------------------------------
# growing
# ---------------------------------------------------------------------------

def _best_numeric(x, y, min_leaf):
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = len(xs)
    cs, cs2 = np.cumsum(ys), np.cumsum(ys * ys)
    k = np.arange(min_leaf, n - min_leaf + 1)
    k = k[xs[k - 1] < xs[k]] if len(k) and k[-1] < n else k[:0]
    if not len(k):
        return None
    sl, sl2 = cs[k - 1], cs2[k - 1]
    sse = (sl2 - sl * sl / k) + ((cs2[-1] - sl2) - (cs[-1] - sl) ** 2 / (n - k))
    best = int(np.argmin(sse))
    kk = k[best]
    thr = 0.5 * (xs[kk - 1] + xs[kk])
    if thr >= xs[kk]:
        thr = xs[kk - 1]
    return float(sse[best]), float(thr), None


def _best_symbolic(x, y, min_leaf):
    cats, inverse = np.unique(x, return_inverse=True)
    if len(cats) < 2:
        return None
    counts = np.bincount(inverse)
    sums = np.bincount(inverse, weights=y)
    sums2 = np.bincount(inverse, weights=y * y)
    order = np.lexsort((cats, sums / counts))
    c, s, s2 = np.cumsum(counts[order]), np.cumsum(sums[order]), np.cumsum(sums2[order])
    n, tot, tot2 = c[-1], s[-1], s2[-1]
    k = np.arange(len(cats) - 1)
    k = k[(c[k] >= min_leaf) & (n - c[k] >= min_leaf)]
    if not len(k):
        return None
    sse = (s2[k] - s[k] ** 2 / c[k]) + ((tot2 - s2[k]) - (tot - s[k]) ** 2 / (n - c[k]))
    best = int(np.argmin(sse))
    left = sorted(int(v) for v in cats[order][: k[best] + 1])
    return float(sse[best]), math.nan, left


def _grow(X, target, symbolic, max_depth, min_leaf, max_features, rng) -> DecisionTree:
    feature, threshold, left, right, value, categories = [], [], [], [], [], []
    n_features = X.shape[1]

    def build(idx, depth):
        node = len(feature)
        y = target[idx]
        feature.append(-1)
        threshold.append(math.nan)
        left.append(-1)
        right.append(-1)
        value.append(float(y.mean()))
        categories.append(None)
        sse_here = float(((y - y.mean()) ** 2).sum())
        if depth >= max_depth or len(idx) < 2 * min_leaf or sse_here <= _MIN_GAIN:
            return node
        best = None
        evaluated = 0
        for j in rng.permutation(n_features):
            x = X[idx, j]
            if x.min() == x.max():
                continue  # constant features do not count towards max_features
            evaluated += 1
            found = (_best_symbolic if symbolic[j] else _best_numeric)(x, y, min_leaf)
            if found is not None and sse_here - found[0] > _MIN_GAIN:
                if best is None or found[0] < best[0]:
                    best = (found[0], int(j), found[1], found[2])
            if evaluated >= max_features and best is not None:
                break
        if best is None:
            return node
        _, j, thr, cats = best
        x = X[idx, j]
        go_left = np.isin(x, cats) if cats is not None else x <= thr
        feature[node] = j
        threshold[node] = thr
        categories[node] = cats
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(len(target)), 0)
    return DecisionTree(feature, threshold, left, right, value, categories, max_depth)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

@dataclass
class TrainedEnsemble:
    family: str
    trees: list[DecisionTree]
    tree_weights: np.ndarray
    feature_names: list[str]
    feature_kinds: list[str]
    training_seed: int = 0
    initial_score: float = 0.0
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        self.tree_weights = np.asarray(self.tree_weights, dtype=float)
        if len(self.tree_weights) != len(self.trees):
            raise ValueError("one weight per tree is required")
        if len(self.feature_names) != len(self.feature_kinds):
            raise ValueError("feature_names and feature_kinds differ in length")

    def _check(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=float)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, len(self.feature_names))
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(f"expected rows with {len(self.feature_names)} attributes, "
                             f"got shape {X.shape}")
        return X

    def decision_function(self, rows) -> np.ndarray:
        X = self._check(rows)
        out = np.zeros(len(X))
        for w, tree in zip(self.tree_weights, self.trees):
            out += w * tree.predict_value(X)
        if self.family == GRADIENT_BOOSTING:
            out += self.initial_score
        return out

    def predict_proba(self, rows) -> np.ndarray:
        raw = self.decision_function(rows)
        if self.family == GRADIENT_BOOSTING:
            return expit(raw)
        return np.clip(raw, 0.0, 1.0)

    def predict(self, rows) -> np.ndarray:
        return (self.predict_proba(rows) >= 0.5).astype(np.int64)

    def used_features(self) -> set[int]:
        used = set()
        for t in self.trees:
            used |= t.used_features()
        return used

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "family": self.family,
            "hyperparameters": dict(self.hyperparameters),
            "feature_names": list(self.feature_names),
            "feature_kinds": list(self.feature_kinds),
            "training_seed": int(self.training_seed),
            "initial_score": float(self.initial_score),
            "tree_weights": self.tree_weights.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedEnsemble":
        if not isinstance(d, dict) or "schema_version" not in d:
            raise ValueError("not a model document")
        if d["schema_version"] != SCHEMA_VERSION:
            raise ValueError(f"model schema version {d['schema_version']} is not "
                             f"supported (expected {SCHEMA_VERSION})")
        try:
            return cls(
                family=d["family"],
                trees=[DecisionTree.from_dict(t) for t in d["trees"]],
                tree_weights=d["tree_weights"],
                feature_names=list(d["feature_names"]),
                feature_kinds=list(d["feature_kinds"]),
                training_seed=d["training_seed"],
                initial_score=d["initial_score"],
                hyperparameters=dict(d["hyperparameters"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model document: {exc}") from exc


def predict(model: TrainedEnsemble, rows) -> np.ndarray:
    return model.predict(rows)


def predict_proba(model: TrainedEnsemble, rows) -> np.ndarray:
    return model.predict_proba(rows)


def _symbolic_mask(ds: Dataset) -> np.ndarray:
    return np.array([k == SYMBOLIC for k in ds.kinds], dtype=bool)


def _require_both_classes(train: Dataset):
    if len(np.unique(train.labels)) < 2:
        raise ValueError("training set has a single class")


def train_random_forest(train: Dataset, n_trees: int = 100, max_depth: int = 8,
                        min_leaf: int = 2, seed: int = 0) -> TrainedEnsemble:
    """Bagged CART trees, Gini splits over ``floor(sqrt(f))`` sampled
    attributes per node. Tree ``t`` draws all of its randomness from
    ``(seed, t)``."""
    _require_both_classes(train)
    X, y = train.X, train.labels.astype(float)
    symbolic = _symbolic_mask(train)
    max_features = max(1, int(math.sqrt(X.shape[1])))
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        boot = rng.integers(0, len(y), len(y))
        trees.append(_grow(X[boot], y[boot], symbolic, max_depth, min_leaf, max_features, rng))
    return TrainedEnsemble(
        RANDOM_FOREST, trees, np.full(n_trees, 1.0 / n_trees), train.feature_names,
        train.kinds, seed, 0.0,
        {"n_trees": n_trees, "max_depth": max_depth, "min_leaf": min_leaf})


def train_gradient_boosting(train: Dataset, n_trees: int = 100, max_depth: int = 3,
                            learning_rate: float = 0.1, seed: int = 0,
                            min_leaf: int = 1) -> TrainedEnsemble:
    """Stagewise regression trees on logistic-loss gradients with Newton
    leaf values, starting from the class-1 prior log-odds."""
    _require_both_classes(train)
    X, y = train.X, train.labels.astype(float)
    symbolic = _symbolic_mask(train)
    prior = y.mean()
    f0 = math.log(prior / (1.0 - prior))
    raw = np.full(len(y), f0)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        p = expit(raw)
        residual = y - p
        tree = _grow(X, residual, symbolic, max_depth, min_leaf, X.shape[1], rng)
        leaves = tree.apply(X)
        hess = np.bincount(leaves, weights=p * (1.0 - p), minlength=tree.n_nodes)
        grad = np.bincount(leaves, weights=residual, minlength=tree.n_nodes)
        is_leaf = tree.feature < 0
        tree.value = np.where(is_leaf & (hess > 1e-12), grad / np.maximum(hess, 1e-12), 0.0)
        trees.append(tree)
        raw = raw + learning_rate * tree.value[leaves]
    return TrainedEnsemble(
        GRADIENT_BOOSTING, trees, np.full(n_trees, float(learning_rate)), train.feature_names,
        train.kinds, seed, f0,
        {"n_trees": n_trees, "max_depth": max_depth, "learning_rate": learning_rate,
         "min_leaf": min_leaf})


def train(family: str, train_ds: Dataset, seed: int = 0, **hyper) -> TrainedEnsemble:
    """Dispatch on ``family``; unspecified hyperparameters take the family
    defaults."""
    if family == RANDOM_FOREST:
        params = {**RF_DEFAULTS, **hyper}
        return train_random_forest(train_ds, seed=seed, **params)
    if family == GRADIENT_BOOSTING:
        params = {**GB_DEFAULTS, **hyper}
        return train_gradient_boosting(train_ds, seed=seed, **params)
    raise ValueError(f"unknown model family {family!r}")


def dumps_model(model: TrainedEnsemble) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model: TrainedEnsemble, path) -> Path:
    return atomic_write_text(path, dumps_model(model))


def load_model(path) -> TrainedEnsemble:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed model file: {exc}") from exc
    return TrainedEnsemble.from_dict(doc)
