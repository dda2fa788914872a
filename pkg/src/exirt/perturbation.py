"""Input variations and the respondent plan behind the loop of models.

Every respondent is the same trained model fed a test matrix in which one
or two attributes were altered by one kind of variation. Respondent 0 is
the untouched model.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from ._io import write_csv

log = logging.getLogger(__name__)


class VariationKind(enum.IntEnum):
    INDEX_PERMUTATION = 0
    ADDITIVE_NOISE = 1
    SET_ZERO = 2
    RESCALE_OFF_SCALE = 3
    SORT_ASCENDING = 4
    SORT_DESCENDING = 5
    REVERSE_INDEX = 6
    BINNING = 7
    NEGATE = 8
    REPLACE_MEAN = 9
    REPLACE_STD = 10
    STANDARDIZE = 11

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str | "VariationKind") -> "VariationKind":
        if isinstance(text, VariationKind):
            return text
        try:
            return cls[str(text).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown variation kind {text!r}") from None


DEFAULT_KINDS = (VariationKind.NEGATE, VariationKind.BINNING)

# kinds that only move values around and are therefore safe on category ids
_REORDERING = frozenset({VariationKind.INDEX_PERMUTATION, VariationKind.SORT_ASCENDING,
                         VariationKind.SORT_DESCENDING, VariationKind.REVERSE_INDEX})


@dataclass(frozen=True)
class RespondentSpec:
    respondent_id: int
    attribute_set: tuple[int, ...] = ()
    kind: VariationKind | None = None
    seed: int = 0


@dataclass
class RespondentPlan:
    specs: list[RespondentSpec]
    f: int
    kinds: tuple[VariationKind, ...]
    max_arity: int

    @property
    def v(self) -> int:
        return len(self.kinds)

    def __len__(self) -> int:
        return len(self.specs)

    def covering(self, attribute: int) -> list[RespondentSpec]:
        return [s for s in self.specs if attribute in s.attribute_set]


def expected_plan_size(f: int, v: int, max_arity: int) -> int:
    return 1 + v * f + (v * comb(f, 2) if max_arity >= 2 else 0)


def build_plan(f: int, kinds: Sequence = DEFAULT_KINDS, max_arity: int = 2,
               base_seed: int = 0) -> RespondentPlan:
    """Enumerate respondents: the original model, then every single
    attribute per kind, then every attribute pair per kind.

    With fewer attributes than ``max_arity`` the pair block is simply empty.
    """
    if f < 1:
        raise ValueError("need at least one attribute")
    if not 1 <= max_arity <= 2:
        raise ValueError("max_arity must be 1 or 2")
    parsed = [VariationKind.parse(k) for k in kinds]
    if not parsed:
        raise ValueError("at least one variation kind is required")
    if len(set(parsed)) != len(parsed):
        raise ValueError("duplicate variation kinds")
    parsed = tuple(sorted(parsed))

    groups: list[tuple[VariationKind | None, tuple[int, ...]]] = [(None, ())]
    groups += [(k, (a,)) for k in parsed for a in range(f)]
    if max_arity == 2:
        groups += [(k, pair) for k in parsed for pair in itertools.combinations(range(f), 2)]
    specs = [RespondentSpec(j, attrs, kind, base_seed ^ j)
             for j, (kind, attrs) in enumerate(groups)]
    return RespondentPlan(specs, f, parsed, max_arity)


def write_plan(path, plan: RespondentPlan, feature_names: Sequence[str] | None = None):
    def attrs(s):
        if feature_names is None:
            return ";".join(str(a) for a in s.attribute_set)
        return ";".join(feature_names[a] for a in s.attribute_set)

    return write_csv(path, ["respondent_id", "kind", "attribute_set"],
                     ((s.respondent_id, s.kind.label if s.kind is not None else "original",
                       attrs(s)) for s in plan.specs))


@dataclass
class TrainStats:
    mean: np.ndarray
    std: np.ndarray
    min: np.ndarray
    max: np.ndarray
    numeric: np.ndarray = field(default=None)  # columns where arithmetic is allowed
    n_bins: int = 10

    @classmethod
    def from_matrix(cls, X: np.ndarray, numeric=None, n_bins: int = 10) -> "TrainStats":
        X = np.asarray(X, dtype=float)
        if numeric is None:
            numeric = np.ones(X.shape[1], dtype=bool)
        return cls(X.mean(axis=0), X.std(axis=0), X.min(axis=0), X.max(axis=0),
                   np.asarray(numeric, dtype=bool), n_bins)

    @classmethod
    def from_dataset(cls, ds, n_bins: int = 10) -> "TrainStats":
        return cls.from_matrix(ds.X, [c.is_numeric_valued for c in ds.columns], n_bins)


def _vary(col: np.ndarray, kind: VariationKind, j: int, stats: TrainStats,
          rng: np.random.Generator) -> np.ndarray:
    if kind is VariationKind.INDEX_PERMUTATION:
        return rng.permutation(col)
    if kind is VariationKind.ADDITIVE_NOISE:
        return col + rng.normal(0.0, stats.std[j], size=col.shape)
    if kind is VariationKind.SET_ZERO:
        return np.zeros_like(col)
    if kind is VariationKind.RESCALE_OFF_SCALE:
        lo, hi = stats.min[j], stats.max[j]
        span = hi - lo
        scaled = (col - lo) / span if span > 0 else np.zeros_like(col)
        return scaled + 1.0 if lo >= 0.0 and hi <= 1.0 else scaled
    if kind is VariationKind.SORT_ASCENDING:
        return np.sort(col)
    if kind is VariationKind.SORT_DESCENDING:
        return np.sort(col)[::-1].copy()
    if kind is VariationKind.REVERSE_INDEX:
        return col[::-1].copy()
    if kind is VariationKind.BINNING:
        lo, hi, n = stats.min[j], stats.max[j], stats.n_bins
        width = (hi - lo) / n
        if width <= 0:
            return np.full_like(col, lo)
        idx = np.clip(np.floor((col - lo) / width), 0, n - 1)
        return lo + (idx + 0.5) * width
    if kind is VariationKind.NEGATE:
        return -col
    if kind is VariationKind.REPLACE_MEAN:
        return np.full_like(col, stats.mean[j])
    if kind is VariationKind.REPLACE_STD:
        return np.full_like(col, stats.std[j])
    if kind is VariationKind.STANDARDIZE:
        sd = stats.std[j]
        return (col - stats.mean[j]) / sd if sd > 0 else np.zeros_like(col)
    raise ValueError(f"unhandled variation kind {kind!r}")


def apply_variation(rows: np.ndarray, spec: RespondentSpec, train_stats: TrainStats) -> np.ndarray:
    """Return a copy of ``rows`` with the columns in ``spec.attribute_set``
    altered by ``spec.kind``; other columns are left bit-identical.

    Statistics (mean, std, range) always come from the training data.
    Arithmetic kinds on symbolic columns fall back to index permutation.
    """
    X = np.array(rows, dtype=float, copy=True)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("rows must be a non-empty 2-D matrix")
    if not spec.attribute_set:
        return X
    if spec.kind is None:
        raise ValueError("a respondent touching attributes needs a variation kind")
    for j in spec.attribute_set:
        if not 0 <= j < X.shape[1]:
            raise ValueError(f"attribute index {j} out of range")
    rng = np.random.default_rng(spec.seed)
    for j in spec.attribute_set:
        kind = spec.kind
        if kind not in _REORDERING and train_stats.numeric is not None and not train_stats.numeric[j]:
            log.info("variation %s on symbolic column %d falls back to index_permutation",
                     kind.label, j)
            kind = VariationKind.INDEX_PERMUTATION
        X[:, j] = _vary(X[:, j], kind, j, train_stats, rng)
    return X
