"""End-to-end benchmark: datasets x model families x measures, rank
correlations, dataset clustering and item-parameter reports.

Output layout under the run directory::

    run_manifest.json
    properties.csv, properties_binarized.csv
    {dataset}/{family}/model.json
    {dataset}/{family}/{measure}/rank.csv      (+ IRT files for exirt)
    {dataset}/{family}/correlation.csv|svg
    summary/correlations.csv
"""

from __future__ import annotations

import json
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import plots
from ._io import atomic_write_text, read_csv, write_csv
from .analytics import (correlation_band, correlation_matrix, grouped_boxplots,
                        item_param_threshold_report, kmeans, median_icc_curve, mca,
                        silhouette_scan, write_correlation_matrix, write_mca)
from .baselines import info_gain_rank, loco_rank, permutation_importance_rank
from .dataset import (Dataset, PropertyVector, binarize_properties, load_csv, meta_features,
                      read_property_table, split, write_binary_table, write_property_table)
from .ensemble import FAMILIES, GB_DEFAULTS, RF_DEFAULTS, save_model, train
from .explainer import ExplainConfig, explain, export_report
from .irt import EMConfig, ItemParameters
from .perturbation import DEFAULT_KINDS, VariationKind
from .ranking import AttributeRank, write_rank

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

MEASURES = ("exirt", "permutation", "loco", "infogain")


@dataclass
class DatasetEntry:
    name: str
    path: str
    label: str
    seed: int | None = None


@dataclass
class Manifest:
    datasets: list[DatasetEntry]
    seed: int = 0
    test_fraction: float = 0.3
    families: list[str] = field(default_factory=lambda: list(FAMILIES))
    measures: list[str] = field(default_factory=lambda: list(MEASURES))
    kinds: list[str] = field(default_factory=lambda: [k.label for k in DEFAULT_KINDS])
    max_arity: int = 2
    ability_method: str = "golden"
    permutation_repeats: int = 5
    random_forest: dict = field(default_factory=lambda: dict(RF_DEFAULTS))
    gradient_boosting: dict = field(default_factory=lambda: dict(GB_DEFAULTS))

    def hyper(self, family: str) -> dict:
        return dict(self.random_forest if family == "random_forest" else self.gradient_boosting)

    def dataset_seed(self, entry: DatasetEntry) -> int:
        return self.seed if entry.seed is None else entry.seed


_FLAT_KEYS = {"seed": int, "test_fraction": float, "families": list, "measures": list,
              "kinds": list, "max_arity": int, "ability_method": str,
              "permutation_repeats": int}


def load_manifest(path) -> Manifest:
    """Parse a TOML manifest: flat keys, optional ``[random_forest]`` /
    ``[gradient_boosting]`` hyperparameter tables, and one ``[[dataset]]``
    table per dataset. Dataset paths are relative to the manifest."""
    path = Path(path)
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    unknown = set(doc) - set(_FLAT_KEYS) - {"dataset", *FAMILIES}
    if unknown:
        raise ValueError(f"{path}: unknown manifest keys {sorted(unknown)}")
    kwargs = {k: doc[k] for k in _FLAT_KEYS if k in doc}
    for fam, defaults in (("random_forest", RF_DEFAULTS), ("gradient_boosting", GB_DEFAULTS)):
        extra = doc.get(fam, {})
        bad = set(extra) - set(defaults)
        if bad:
            raise ValueError(f"{path}: unknown {fam} hyperparameters {sorted(bad)}")
        kwargs[fam] = {**defaults, **extra}
    entries = []
    for d in doc.get("dataset", []):
        try:
            p = Path(d["path"])
            entries.append(DatasetEntry(d["name"], str(p if p.is_absolute() else path.parent / p),
                                        d["label"], d.get("seed")))
        except KeyError as exc:
            raise ValueError(f"{path}: dataset entry missing {exc}") from None
    if not entries:
        raise ValueError(f"{path}: no [[dataset]] entries")
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate dataset names")
    m = Manifest(entries, **kwargs)
    for fam in m.families:
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
    for meas in m.measures:
        if meas not in MEASURES:
            raise ValueError(f"unknown measure {meas!r}")
    for k in m.kinds:
        VariationKind.parse(k)
    return m


def run_measure(measure: str, model, train_ds: Dataset, test_ds: Dataset, family: str,
                hyper: dict, seed: int, cfg: ExplainConfig, repeats: int = 5,
                out_dir=None) -> AttributeRank:
    if measure == "exirt":
        report = explain(model, train_ds, test_ds, cfg)
        if out_dir is not None:
            export_report(report, out_dir)
        return report.rank
    if measure == "permutation":
        rank = permutation_importance_rank(model, test_ds, repeats, seed)
    elif measure == "loco":
        rank = loco_rank(train_ds, test_ds, family, hyper, seed)
    elif measure == "infogain":
        rank = info_gain_rank(train_ds)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    if out_dir is not None:
        write_rank(Path(out_dir) / "rank.csv", rank)
    return rank


def _explain_config(m: Manifest, seed: int) -> ExplainConfig:
    return ExplainConfig(kinds=[VariationKind.parse(k) for k in m.kinds],
                         max_arity=m.max_arity, base_seed=seed,
                         ability_method=m.ability_method, em=EMConfig())


def run_job(m: Manifest, entry: DatasetEntry, family: str, out_dir) -> dict:
    """Train one model and run every measure on it."""
    out = Path(out_dir) / entry.name / family
    seed = m.dataset_seed(entry)
    ds = load_csv(entry.path, entry.label, name=entry.name)
    train_ds, test_ds = split(ds, m.test_fraction, seed)
    hyper = m.hyper(family)
    model = train(family, train_ds, seed=seed, **hyper)
    save_model(model, out / "model.json")
    cfg = _explain_config(m, seed)
    ranks = {}
    for measure in m.measures:
        ranks[measure] = run_measure(measure, model, train_ds, test_ds, family, hyper, seed,
                                     cfg, m.permutation_repeats, out / measure)
    result = {"dataset": entry.name, "family": family,
              "test_accuracy": float(np.mean(model.predict(test_ds.X) == test_ds.labels))}
    if len(ranks) >= 2 and len(ds.columns) >= 2:
        cm = correlation_matrix(ranks)
        write_correlation_matrix(out / "correlation.csv", cm)
        plots.heatmap(out / "correlation.svg", cm.measures, cm.rho,
                      f"{entry.name} / {family}")
        result["pairs"] = cm.pairs()
    return result


def _run_job_safe(args):
    m, entry, family, out_dir = args
    try:
        return run_job(m, entry, family, out_dir)
    except Exception as exc:
        return {"dataset": entry.name, "family": family,
                "error": f"{type(exc).__name__}: {exc}",
                "traceback": traceback.format_exc()}


@dataclass
class BenchmarkResult:
    jobs: list[dict]
    failures: list[dict]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_manifest_doc(m: Manifest) -> dict:
    doc = asdict(m)
    doc["datasets"] = [{"name": e.name, "path": e.path, "label": e.label,
                        "seed": m.dataset_seed(e)} for e in m.datasets]
    doc["em"] = asdict(EMConfig())
    return doc


def run_benchmark(m: Manifest, out_dir, jobs: int = 1) -> BenchmarkResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "run_manifest.json",
                      json.dumps(run_manifest_doc(m), indent=2, sort_keys=True) + "\n")

    props, failures = [], []
    for entry in m.datasets:
        try:
            props.append((entry.name, meta_features(load_csv(entry.path, entry.label,
                                                              name=entry.name))))
        except Exception as exc:
            failures.append({"dataset": entry.name, "family": "-",
                             "error": f"{type(exc).__name__}: {exc}"})
    if props:
        write_property_table(out / "properties.csv", props)
        if len(props) >= 2:
            write_binary_table(out / "properties_binarized.csv", binarize_properties(props))

    bad = {f["dataset"] for f in failures}
    work = [(m, e, fam, out) for e in m.datasets if e.name not in bad for fam in m.families]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_job_safe, work))
    else:
        results = [_run_job_safe(w) for w in work]

    done = []
    for r in results:
        if "error" in r:
            log.error("%s/%s failed: %s", r["dataset"], r["family"], r["error"])
            failures.append(r)
        else:
            done.append(r)
    rows = [(r["dataset"], r["family"], a, b, rho, correlation_band(rho))
            for r in done for a, b, rho in r.get("pairs", [])]
    write_csv(out / "summary" / "correlations.csv",
              ["dataset", "family", "measure_a", "measure_b", "rho", "band"], rows)
    write_csv(out / "summary" / "accuracy.csv", ["dataset", "family", "test_accuracy"],
              ((r["dataset"], r["family"], r["test_accuracy"]) for r in done))
    if failures:
        write_csv(out / "failures.csv", ["dataset", "family", "error"],
                  ((f["dataset"], f["family"], f["error"]) for f in failures))
    elif (out / "failures.csv").exists():
        (out / "failures.csv").unlink()
    return BenchmarkResult(done, failures)


# ---------------------------------------------------------------------------
# clustering of dataset properties
# ---------------------------------------------------------------------------

def collect_properties(source, label: str = "class") -> list[tuple[str, np.ndarray]]:
    """Property rows from a property CSV, a manifest, or a directory of
    dataset CSVs sharing one label column."""
    source = Path(source)
    if source.is_dir():
        rows = []
        for p in sorted(source.glob("*.csv")):
            rows.append((p.stem, meta_features(load_csv(p, label)).as_array()))
        if not rows:
            raise ValueError(f"{source}: no CSV files")
        return rows
    if source.suffix == ".toml":
        m = load_manifest(source)
        return [(e.name, meta_features(load_csv(e.path, e.label)).as_array())
                for e in m.datasets]
    return read_property_table(source)


def run_clustering(rows: Sequence[tuple[str, np.ndarray]], out_dir, seed: int = 0,
                   k: int | None = None, k_range=range(2, 11), restarts: int = 10) -> dict:
    out = Path(out_dir)
    names = [n for n, _ in rows]
    X = np.array([v for _, v in rows])
    result = {"n_datasets": len(names)}
    if len(names) >= 3:
        scan = silhouette_scan(X, names, k_range, seed, restarts)
        write_csv(out / "silhouette.csv", ["K", "mean_silhouette"], sorted(scan.scores.items()))
        chosen = scan.chosen_k if k is None else k
        assignment = scan.assignment if chosen == scan.chosen_k else kmeans(
            X, chosen, seed, restarts, names)
        result.update(chosen_k=chosen, silhouette=scan.scores)
    else:
        assignment = kmeans(X, 1, seed, restarts, names)
        result.update(chosen_k=1, silhouette={})
    write_csv(out / "clusters.csv", ["dataset", "cluster"],
              zip(assignment.names, assignment.labels))
    write_csv(out / "properties.csv", ["dataset"] + PropertyVector.names(),
              ([n] + list(v) for n, v in rows))
    if len(names) >= 2:
        table = binarize_properties(rows)
        write_binary_table(out / "properties_binarized.csv", table)
        try:
            write_mca(out, mca(table), assignment.as_dict())
        except ValueError as exc:
            log.warning("MCA skipped: %s", exc)
    result["clusters"] = assignment.as_dict()
    return result


def read_clusters(path) -> dict[str, int]:
    _, rows = read_csv(path)
    return {r[0]: int(r[1]) for r in rows}


# ---------------------------------------------------------------------------
# reporting over a finished benchmark directory
# ---------------------------------------------------------------------------

def _read_items(path) -> ItemParameters:
    _, rows = read_csv(path)
    arr = np.array([[float(x) for x in r[1:4]] for r in rows])
    return ItemParameters(arr[:, 0], arr[:, 1], arr[:, 2])


def run_report(bench_dir, seed: int = 0) -> dict:
    bench = Path(bench_dir)
    manifest = json.loads((bench / "run_manifest.json").read_text())
    out = bench / "report"
    cluster_file = bench / "cluster" / "clusters.csv"
    if cluster_file.exists():
        clusters = read_clusters(cluster_file)
    else:
        rows = read_property_table(bench / "properties.csv")
        clusters = run_clustering(rows, bench / "cluster", seed=seed)["clusters"]

    summary = {"clusters": clusters, "families": {}}
    for family in manifest["families"]:
        items = {}
        for d in manifest["datasets"]:
            p = bench / d["name"] / family / "exirt" / "item_parameters.csv"
            if p.exists():
                items[d["name"]] = _read_items(p)
        if not items:
            continue
        fam_out = out / family
        thr = item_param_threshold_report(items, clusters, fam_out)
        icc = median_icc_curve(items, clusters, out_dir=fam_out)
        summary["families"][family] = {
            "thresholds": thr.thresholds,
            "median_item_params": {str(k): v for k, v in icc.medians.items()},
        }

    corr_file = bench / "summary" / "correlations.csv"
    if corr_file.exists():
        _, rows = read_csv(corr_file)
        groups: dict[str, list[float]] = {}
        for ds, fam, a, b, rho, _ in rows:
            if ds in clusters:
                groups.setdefault(f"{a}~{b} | c{clusters[ds]} | {fam}", []).append(float(rho))
        groups = dict(sorted(groups.items()))
        stats = grouped_boxplots(groups, out / "correlation_boxplots.csv",
                                 out / "correlation_boxplots.svg",
                                 title="Summary of correlations between ranks")
        summary["median_abs_rho_by_cluster"] = {
            str(k): float(np.median([abs(float(r[4])) for r in rows
                                     if clusters.get(r[0]) == k]))
            for k in sorted(set(clusters.values()))
            if any(clusters.get(r[0]) == k for r in rows)}
        summary["n_correlation_groups"] = len(stats)
    atomic_write_text(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
