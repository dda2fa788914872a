"""Cross-model analysis: rank correlations and their summaries, dataset
clustering (k-means + silhouette), multiple correspondence analysis of
binarised property tables, and item-parameter reports per cluster."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from . import plots
from ._io import write_csv
from .dataset import BinaryPropertyTable
from .irt import THETA_BOUNDS, ItemParameters, icc_probability
from .ranking import AttributeRank

log = logging.getLogger(__name__)

HIGH, MODERATE, INSIGNIFICANT = "high", "moderate", "insignificant"


# ---------------------------------------------------------------------------
# rank correlation
# ---------------------------------------------------------------------------

def _pearson(x, y) -> float:
    x = np.asarray(x, dtype=float) - np.mean(x)
    y = np.asarray(y, dtype=float) - np.mean(y)
    den = np.sqrt((x * x).sum() * (y * y).sum())
    if den == 0.0:
        # a constant rank carries no ordering information
        return 0.0
    return float(np.clip((x * y).sum() / den, -1.0, 1.0))


def spearman_rho(x, y) -> float:
    """Spearman correlation of two score vectors, ties given average ranks."""
    if len(x) != len(y):
        raise ValueError("score vectors differ in length")
    if len(x) < 2:
        raise ValueError("need at least 2 attributes")
    return _pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def spearman(rank_a: AttributeRank, rank_b: AttributeRank) -> float:
    ra, rb = rank_a.relevance_ranks(), rank_b.relevance_ranks()
    if set(ra) != set(rb):
        raise ValueError("ranks cover different attribute sets")
    if len(ra) < 2:
        raise ValueError("need at least 2 attributes")
    names = sorted(ra)
    return _pearson([ra[n] for n in names], [rb[n] for n in names])


def correlation_band(rho: float) -> str:
    """Verbal band used in reports: |rho| >= 0.7 high, >= 0.3 moderate."""
    r = abs(rho)
    return HIGH if r >= 0.7 else MODERATE if r >= 0.3 else INSIGNIFICANT


@dataclass
class CorrelationMatrix:
    measures: list[str]
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        k = len(self.measures)
        if self.rho.shape != (k, k):
            raise ValueError("matrix shape does not match measure count")
        if not np.array_equal(self.rho, self.rho.T):
            raise ValueError("correlation matrix is not symmetric")
        if not np.all(np.diag(self.rho) == 1.0):
            raise ValueError("correlation matrix diagonal is not 1")
        if np.any(np.abs(self.rho) > 1.0):
            raise ValueError("correlation outside [-1, 1]")

    def pairs(self) -> list[tuple[str, str, float]]:
        k = len(self.measures)
        return [(self.measures[i], self.measures[j], float(self.rho[i, j]))
                for i in range(k) for j in range(i + 1, k)]


def correlation_matrix(ranks: Mapping[str, AttributeRank]) -> CorrelationMatrix:
    names = list(ranks)
    k = len(names)
    rho = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            rho[i, j] = rho[j, i] = spearman(ranks[names[i]], ranks[names[j]])
    return CorrelationMatrix(names, rho)


def write_correlation_matrix(path, cm: CorrelationMatrix):
    return write_csv(path, ["measure"] + cm.measures,
                     ([m] + list(row) for m, row in zip(cm.measures, cm.rho)))


# ---------------------------------------------------------------------------
# boxplot summaries
# ---------------------------------------------------------------------------

@dataclass
class BoxStats:
    n: int
    whisker_low: float
    q1: float
    median: float
    q3: float
    whisker_high: float
    outliers: list[float]

    @property
    def five_numbers(self) -> tuple[float, float, float, float, float]:
        return (self.whisker_low, self.q1, self.median, self.q3, self.whisker_high)


def boxplot_stats(values: Sequence[float], whis: float = 1.5) -> BoxStats:
    """Quartiles by linear interpolation; whiskers reach the furthest data
    point within ``whis * IQR`` of the box."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no values to summarise")
    q1, med, q3 = np.percentile(v, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - whis * iqr, q3 + whis * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = v[(v < lo_fence) | (v > hi_fence)]
    return BoxStats(int(v.size), float(inside.min()), float(q1), float(med), float(q3),
                    float(inside.max()), [float(x) for x in outliers])


def grouped_boxplots(groups: Mapping[str, Sequence[float]], out_csv=None, out_svg=None,
                     ylabel: str = "Spearman rho", title: str = "") -> dict[str, BoxStats]:
    stats = {k: boxplot_stats(v) for k, v in groups.items() if len(v)}
    if out_csv is not None:
        write_csv(out_csv, ["group", "n", "whisker_low", "q1", "median", "q3",
                            "whisker_high", "outliers"],
                  ([k, s.n, *s.five_numbers, ";".join(repr(o) for o in s.outliers)]
                   for k, s in stats.items()))
    if out_svg is not None and stats:
        plots.grouped_boxplot(out_svg, {k: groups[k] for k in stats}, ylabel, title)
    return stats


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------

def standardize(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    sd = X.std(axis=0)
    return np.where(sd > 0, (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0), 0.0)


@dataclass
class ClusterAssignment:
    names: list[str]
    labels: np.ndarray
    K: int
    wcss: float
    centers: np.ndarray
    silhouette_mean: float = float("nan")
    wcss_history: list[float] = field(default_factory=list)

    def as_dict(self) -> dict[str, int]:
        return {n: int(l) for n, l in zip(self.names, self.labels)}


def _kmeans_pp(Z, K, rng):
    n = len(Z)
    centers = [int(rng.integers(n))]
    d2 = ((Z - Z[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            rest = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(rest))
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        centers.append(nxt)
        d2 = np.minimum(d2, ((Z - Z[nxt]) ** 2).sum(axis=1))
    return Z[centers].copy()


def _lloyd(Z, centers, max_iter=300):
    history = []
    labels = None
    K = len(centers)
    for _ in range(max_iter):
        d = cdist(Z, centers, "sqeuclidean")
        new = d.argmin(axis=1)
        for k in range(K):
            if not np.any(new == k):
                # refill an empty cluster with the worst-served point
                far = int(d[np.arange(len(Z)), new].argmax())
                new[far] = k
                d[far] = 0.0
        centers = np.array([Z[new == k].mean(axis=0) for k in range(K)])
        wcss = float(((Z - centers[new]) ** 2).sum())
        history.append(wcss)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
    return labels, centers, history


def _canonical_labels(labels):
    """Renumber clusters by order of first appearance."""
    mapping = {}
    for l in labels:
        mapping.setdefault(int(l), len(mapping))
    return np.array([mapping[int(l)] for l in labels]), mapping


def kmeans(X, K: int, seed: int = 0, restarts: int = 10, names: Sequence[str] | None = None,
           standardize_features: bool = True) -> ClusterAssignment:
    """Best of ``restarts`` k-means++ seeded Lloyd runs by within-cluster
    sum of squares, on z-scored features by default."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    if not 1 <= K <= n:
        raise ValueError(f"K must lie in 1..{n}")
    Z = standardize(X) if standardize_features else X
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        labels, centers, history = _lloyd(Z, _kmeans_pp(Z, K, rng))
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centers, history)
    labels, centers, history = best
    labels, mapping = _canonical_labels(labels)
    order = sorted(mapping, key=mapping.get)
    centers = centers[order]
    names = list(names) if names is not None else [str(i) for i in range(n)]
    return ClusterAssignment(names, labels, K, history[-1], centers, wcss_history=history)


def silhouette_samples(X, labels) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    D = cdist(X, X)
    out = np.zeros(len(X))
    clusters = np.unique(labels)
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() <= 1:
            continue  # singleton clusters score 0
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == k].mean() for k in clusters if k != labels[i])
        m = max(a, b)
        out[i] = (b - a) / m if m > 0 else 0.0
    return out


def silhouette_score(X, labels) -> float:
    return float(silhouette_samples(X, labels).mean())


@dataclass
class SilhouetteScan:
    scores: dict[int, float]
    chosen_k: int
    assignment: ClusterAssignment


def silhouette_scan(X, names: Sequence[str] | None = None, k_range=range(2, 11),
                    seed: int = 0, restarts: int = 10) -> SilhouetteScan:
    """Mean silhouette per K; the chosen K maximises it (ties -> smaller K)."""
    X = np.asarray(X, dtype=float)
    Z = standardize(X)
    ks = [k for k in k_range if 2 <= k <= len(X) - 1]
    if not ks:
        raise ValueError("no admissible K: need at least 3 rows")
    scores, fits = {}, {}
    for k in ks:
        fit = kmeans(X, k, seed=seed, restarts=restarts, names=names)
        fit.silhouette_mean = silhouette_score(Z, fit.labels)
        scores[k], fits[k] = fit.silhouette_mean, fit
    chosen = min(ks, key=lambda k: (-scores[k], k))
    return SilhouetteScan(scores, chosen, fits[chosen])


# ---------------------------------------------------------------------------
# multiple correspondence analysis
# ---------------------------------------------------------------------------

@dataclass
class McaResult:
    row_names: list[str]
    column_labels: list[str]
    row_coords: np.ndarray
    column_coords: np.ndarray
    inertias: np.ndarray

    @property
    def explained_inertia(self) -> np.ndarray:
        total = self.inertias.sum()
        return self.inertias / total if total > 0 else self.inertias


def indicator_matrix(table: BinaryPropertyTable) -> tuple[np.ndarray, list[str]]:
    """Complete disjunctive coding: one 0/1 column per (property, h|s)."""
    cells = np.asarray(table.cells)
    cols, labels = [], []
    for j, prop in enumerate(table.columns):
        for sym in ("h", "s"):
            cols.append((cells[:, j] == sym).astype(float))
            labels.append(f"{prop}:{sym}")
    return np.column_stack(cols), labels


def mca(table: BinaryPropertyTable) -> McaResult:
    """Correspondence analysis of the indicator matrix via SVD of its
    standardised residuals; principal coordinates for rows and columns."""
    if len(table.rows) < 2 or len(table.columns) < 2:
        raise ValueError("MCA needs at least 2 rows and 2 property columns")
    Z, labels = indicator_matrix(table)
    mass = Z.sum(axis=0)
    if np.any(mass == 0):
        dropped = [l for l, m in zip(labels, mass) if m == 0]
        log.warning("dropping empty categories from MCA: %s", ", ".join(dropped))
        keep = mass > 0
        Z, labels = Z[:, keep], [l for l, k in zip(labels, keep) if k]
    P = Z / Z.sum()
    r, c = P.sum(axis=1), P.sum(axis=0)
    S = (P - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    U, sv, Vt = np.linalg.svd(S, full_matrices=False)
    keep = sv > 1e-12 * max(1.0, sv[0] if len(sv) else 1.0)
    U, sv, V = U[:, keep], sv[keep], Vt[keep].T
    # sign: largest-magnitude column coordinate of each component is positive
    for k in range(len(sv)):
        i = int(np.argmax(np.abs(V[:, k])))
        if V[i, k] < 0:
            U[:, k], V[:, k] = -U[:, k], -V[:, k]
    F = U * sv / np.sqrt(r)[:, None]
    G = V * sv / np.sqrt(c)[:, None]
    return McaResult(list(table.rows), labels, F, G, sv ** 2)


def write_mca(out_dir, result: McaResult, clusters: Mapping[str, int] | None = None):
    out = Path(out_dir)
    d = result.row_coords.shape[1]
    comp = [f"component_{k}" for k in range(d)]
    write_csv(out / "mca_rows.csv", ["dataset"] + comp,
              ([n] + list(row) for n, row in zip(result.row_names, result.row_coords)))
    write_csv(out / "mca_columns.csv", ["category"] + comp,
              ([n] + list(row) for n, row in zip(result.column_labels, result.column_coords)))
    write_csv(out / "mca_inertia.csv", ["component", "inertia", "explained"],
              zip(range(d), result.inertias, result.explained_inertia))
    if d >= 2:
        points, labels = {}, {}
        groups = {}
        for i, n in enumerate(result.row_names):
            key = f"cluster {clusters[n]}" if clusters and n in clusters else "datasets"
            groups.setdefault(key, []).append(i)
        for key, idx in groups.items():
            points[key] = result.row_coords[idx, :2]
            labels[key] = [result.row_names[i] for i in idx]
        points["categories"] = result.column_coords[:, :2]
        labels["categories"] = result.column_labels
        plots.scatter_labeled(out / "mca.svg", points, labels, "component 0", "component 1",
                              "MCA of binarised dataset properties")


# ---------------------------------------------------------------------------
# item parameters per cluster
# ---------------------------------------------------------------------------

PARAMS = ("a", "b", "c")
PARAM_NAMES = {"a": "discrimination", "b": "difficulty", "c": "guessing"}


@dataclass
class ThresholdReport:
    thresholds: dict[str, float]
    dataset_means: dict[str, dict[str, float]]
    dataset_percentages: dict[str, dict[str, float]]
    clusters: dict[str, int]

    def by_cluster(self, param: str) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for name, pct in self.dataset_percentages.items():
            out.setdefault(self.clusters[name], []).append(pct[param])
        return dict(sorted(out.items()))


def item_param_threshold_report(per_dataset: Mapping[str, ItemParameters],
                                clusters: Mapping[str, int], out_dir=None) -> ThresholdReport:
    """Threshold per parameter = mean over datasets of the per-dataset mean;
    each dataset then reports the share of its items at or above it."""
    names = [n for n in per_dataset if n in clusters]
    if not names:
        raise ValueError("no dataset has a cluster assignment")
    means = {n: {p: float(np.mean(getattr(per_dataset[n], p))) for p in PARAMS} for n in names}
    thresholds = {p: float(np.mean([means[n][p] for n in names])) for p in PARAMS}
    pct = {n: {p: float(np.mean(getattr(per_dataset[n], p) >= thresholds[p]) * 100.0)
               for p in PARAMS} for n in names}
    report = ThresholdReport(thresholds, means, pct, {n: int(clusters[n]) for n in names})
    if out_dir is not None:
        out = Path(out_dir)
        write_csv(out / "item_param_thresholds.csv", ["parameter", "threshold"],
                  ((p, thresholds[p]) for p in PARAMS))
        write_csv(out / "item_param_percentages.csv",
                  ["dataset", "cluster", "mean_a", "mean_b", "mean_c",
                   "pct_a_ge_threshold", "pct_b_ge_threshold", "pct_c_ge_threshold"],
                  ([n, clusters[n], *(means[n][p] for p in PARAMS),
                    *(pct[n][p] for p in PARAMS)] for n in names))
        for p in PARAMS:
            groups = {f"cluster {k}": v for k, v in report.by_cluster(p).items()}
            plots.grouped_boxplot(out / f"item_param_pct_{PARAM_NAMES[p]}.svg", groups,
                                  f"% items with {PARAM_NAMES[p]} >= threshold",
                                  PARAM_NAMES[p])
    return report


@dataclass
class MedianIcc:
    theta: np.ndarray
    curves: dict[int, np.ndarray]
    medians: dict[int, tuple[float, float, float]]


def median_icc_curve(per_dataset: Mapping[str, ItemParameters], clusters: Mapping[str, int],
                     step: float = 0.1, out_dir=None) -> MedianIcc:
    """Per cluster: median over datasets of the per-dataset mean (a, b, c),
    evaluated as an ICC on a theta grid."""
    lo, hi = THETA_BOUNDS
    theta = np.round(np.linspace(lo, hi, int(round((hi - lo) / step)) + 1), 10)
    by_cluster: dict[int, list[tuple[float, float, float]]] = {}
    for n, items in per_dataset.items():
        if n in clusters:
            by_cluster.setdefault(int(clusters[n]), []).append(
                tuple(float(np.mean(getattr(items, p))) for p in PARAMS))
    medians, curves = {}, {}
    for k in sorted(by_cluster):
        a, b, c = (float(x) for x in np.median(np.array(by_cluster[k]), axis=0))
        medians[k] = (a, b, c)
        curves[k] = icc_probability(theta, a, b, c)
    result = MedianIcc(theta, curves, medians)
    if out_dir is not None:
        out = Path(out_dir)
        keys = sorted(curves)
        write_csv(out / "median_icc.csv", ["theta"] + [f"cluster_{k}" for k in keys],
                  ([t] + [curves[k][i] for k in keys] for i, t in enumerate(theta)))
        write_csv(out / "median_item_params.csv", ["cluster", "a", "b", "c"],
                  ([k, *medians[k]] for k in keys))
        plots.curves(out / "median_icc.svg", theta, {f"cluster {k}": curves[k] for k in keys},
                     "median ability", "median probability of correct answer")
    return result
