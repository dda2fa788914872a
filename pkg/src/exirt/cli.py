"""Command-line entry point: ``exirt {train,explain,benchmark,cluster,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .baselines import info_gain_rank, loco_rank, permutation_importance_rank
from .benchmark import (MEASURES, collect_properties, load_manifest, run_benchmark,
                        run_clustering, run_report)
from .dataset import load_csv, split
from .ensemble import FAMILIES, load_model, save_model, train
from .explainer import ExplainConfig, explain, export_report
from .irt import SEARCH_METHODS
from .perturbation import VariationKind
from .ranking import write_rank

OUT_ENV = "EXIRT_OUT"

log = logging.getLogger("exirt")


def _default_out(sub: str) -> Path:
    return Path(os.environ.get(OUT_ENV, "out")) / sub


def _kinds(text: str):
    return [VariationKind.parse(k) for k in text.split(",") if k.strip()]


def _add_common(p, out_help="output path"):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help=out_help)


def _add_split(p):
    p.add_argument("--label", default="class", help="label column name")
    p.add_argument("--test-fraction", type=float, default=0.3)


def _hyper(args) -> dict:
    hyper = {}
    for key in ("n_trees", "max_depth", "min_leaf", "learning_rate"):
        val = getattr(args, key, None)
        if val is not None:
            hyper[key] = val
    if args.family == "random_forest":
        hyper.pop("learning_rate", None)
    return hyper


def cmd_train(args) -> int:
    ds = load_csv(args.dataset, args.label)
    train_ds, test_ds = split(ds, args.test_fraction, args.seed)
    model = train(args.family, train_ds, seed=args.seed, **_hyper(args))
    out = args.out or _default_out(f"{ds.name}.{args.family}.model.json")
    save_model(model, out)
    acc = float((model.predict(test_ds.X) == test_ds.labels).mean())
    print(f"saved {out} (test accuracy {acc:.4f})")
    return 0


def cmd_explain(args) -> int:
    model = load_model(args.model)
    ds = load_csv(args.dataset, args.label)
    train_ds, test_ds = split(ds, args.test_fraction, args.seed)
    out = args.out or _default_out(f"{ds.name}/{model.family}/{args.measure}")
    if args.measure == "exirt":
        cfg = ExplainConfig(kinds=_kinds(args.kinds), max_arity=args.max_arity,
                            base_seed=args.seed, ability_method=args.ability_method)
        report = explain(model, train_ds, test_ds, cfg)
        export_report(report, out)
        rank = report.rank
    else:
        if args.measure == "permutation":
            rank = permutation_importance_rank(model, test_ds, args.repeats, args.seed)
        elif args.measure == "loco":
            rank = loco_rank(train_ds, test_ds, model.family, model.hyperparameters, args.seed)
        else:
            rank = info_gain_rank(train_ds)
        write_rank(Path(out) / "rank.csv", rank)
    for e in rank.entries:
        print(f"{e.position:3d}  {e.attribute:<30s} {e.score: .6f}")
    return 0


def cmd_benchmark(args) -> int:
    m = load_manifest(args.manifest)
    if args.family:
        m.families = [args.family]
    if args.measure:
        m.measures = [x for x in args.measure.split(",") if x]
    if args.kinds:
        m.kinds = [k.label for k in _kinds(args.kinds)]
    if args.max_arity:
        m.max_arity = args.max_arity
    if args.seed is not None:
        m.seed = args.seed
    if args.test_fraction is not None:
        m.test_fraction = args.test_fraction
    out = args.out or _default_out("benchmark")
    result = run_benchmark(m, out, jobs=args.jobs)
    print(f"{len(result.jobs)} jobs succeeded, {len(result.failures)} failed; results in {out}")
    for f in result.failures:
        print(f"  FAILED {f['dataset']}/{f['family']}: {f['error']}", file=sys.stderr)
    return 0 if result.ok else 1


def cmd_cluster(args) -> int:
    rows = collect_properties(args.source, args.label)
    out = args.out or _default_out("cluster")
    res = run_clustering(rows, out, seed=args.seed, k=args.k,
                         k_range=range(args.k_min, args.k_max + 1))
    print(json.dumps({k: res[k] for k in ("n_datasets", "chosen_k", "silhouette")},
                     indent=2, default=str))
    return 0


def cmd_report(args) -> int:
    summary = run_report(args.bench_dir, seed=args.seed)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exirt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a tree ensemble on the train split")
    p.add_argument("dataset", type=Path)
    _add_split(p)
    _add_common(p, "model JSON path")
    p.add_argument("--family", choices=FAMILIES, default="random_forest")
    p.add_argument("--n-trees", dest="n_trees", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="rank attributes of a trained model")
    p.add_argument("model", type=Path)
    p.add_argument("dataset", type=Path)
    _add_split(p)
    _add_common(p, "output directory")
    p.add_argument("--measure", choices=MEASURES, default="exirt")
    p.add_argument("--kinds", default="negate,binning")
    p.add_argument("--max-arity", type=int, default=2, choices=(1, 2))
    p.add_argument("--ability-method", choices=sorted(SEARCH_METHODS), default="golden")
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("benchmark", help="run every measure on every manifest dataset")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--measure", help="comma-separated subset of " + ",".join(MEASURES))
    p.add_argument("--kinds")
    p.add_argument("--max-arity", type=int, choices=(1, 2))
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("cluster", help="k-means + silhouette + MCA on dataset properties")
    p.add_argument("source", type=Path,
                   help="property CSV, manifest (.toml) or directory of dataset CSVs")
    p.add_argument("--label", default="class")
    _add_common(p, "output directory")
    p.add_argument("--k", type=int, default=None, help="force K instead of the silhouette choice")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=10)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("report", help="item-parameter and correlation reports for a run")
    p.add_argument("bench_dir", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"exirt {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
