import numpy as np
import pytest

from conftest import make_dataset
from exirt.dataset import split
from exirt.ensemble import RANDOM_FOREST, DecisionTree, TrainedEnsemble, train
from exirt.explainer import ExplainConfig, attribute_scores, explain, export_report
from exirt.perturbation import VariationKind, build_plan
from exirt.ranking import AttributeRank, read_rank


def _mirrored(tree: DecisionTree, swap: dict) -> DecisionTree:
    d = tree.to_dict()
    d["feature"] = [swap.get(f, f) for f in d["feature"]]
    return DecisionTree.from_dict(d)


def test_single_attribute_rank():
    rng = np.random.default_rng(0)
    x = rng.normal(size=120)
    ds = make_dataset({"only": x}, (x > 0).astype(int))
    tr, te = split(ds, 0.3, 0)
    m = train(RANDOM_FOREST, tr, n_trees=10)
    report = explain(m, tr, te, ExplainConfig(kinds=["negate"]))
    assert len(report.rank) == 1
    assert report.rank.entries[0].position == 1
    assert len(report.plan) == 2


def test_duplicate_attributes_tie_and_sort_by_name():
    rng = np.random.default_rng(2)
    x, z = rng.normal(size=(2, 300))
    y = (x + 0.5 * z > 0).astype(int)
    base = make_dataset({"x": x, "z": z}, y)
    m = train(RANDOM_FOREST, base, n_trees=10, seed=0)
    # one tree per orientation: column 1 ("z_b") and column 2 ("z_a") play
    # identical roles, and z_a == z_b in the data
    trees = m.trees + [_mirrored(t, {1: 2}) for t in m.trees]
    sym = TrainedEnsemble(RANDOM_FOREST, trees, np.full(len(trees), 1 / len(trees)),
                          ["x", "z_b", "z_a"], ["numeric"] * 3)
    ds = make_dataset({"x": x, "z_b": z, "z_a": z.copy()}, y)
    tr, te = split(ds, 0.3, 1)
    report = explain(sym, tr, te, ExplainConfig(kinds=["negate"]))
    assert report.rank.score_of("z_a") == report.rank.score_of("z_b")
    assert report.rank.position_of("z_a") < report.rank.position_of("z_b")


def test_ignored_attribute_gets_original_score_and_ranks_last():
    rng = np.random.default_rng(4)
    x0, x1, noise = rng.normal(size=(3, 400))
    y = (x0 + x1 > 0).astype(int)
    sub = make_dataset({"x0": x0, "x1": x1}, y)
    m = train(RANDOM_FOREST, sub, n_trees=20)
    m.feature_names = ["x0", "x1", "noise"]
    m.feature_kinds = ["numeric"] * 3
    ds = make_dataset({"x0": x0, "x1": x1, "noise": noise}, y)
    tr, te = split(ds, 0.3, 0)
    cfg = ExplainConfig(kinds=["negate", "binning"], max_arity=1)
    report = explain(m, tr, te, cfg)
    assert report.rank.attributes[-1] == "noise"
    assert report.rank.score_of("noise") == pytest.approx(report.total_scores[0])
    assert report.rank.score_of("noise") == pytest.approx(report.total_scores.max())


def test_attribute_scores_exclude_original():
    plan = build_plan(2, [VariationKind.NEGATE], 2)
    # respondents: 0 original, 1 {0}, 2 {1}, 3 {0,1}
    scores = np.array([100.0, 1.0, 2.0, 3.0])
    assert attribute_scores(plan, scores).tolist() == [2.0, 2.5]


def test_explain_checks_inputs(separable):
    m = train(RANDOM_FOREST, separable, n_trees=3)
    other = make_dataset({"a": separable.X[:, 0], "b": separable.X[:, 1]}, separable.labels)
    with pytest.raises(ValueError, match="names differ"):
        explain(m, separable, other)
    with pytest.raises(ValueError, match="empty"):
        explain(m, separable, separable.take([]))


def test_export_report_files(tmp_path, separable):
    tr, te = split(separable, 0.3, 0)
    m = train(RANDOM_FOREST, tr, n_trees=10)
    report = explain(m, tr, te)
    paths = export_report(report, tmp_path)
    assert sorted(p.name for p in paths) == ["item_parameters.csv", "plan.csv", "rank.csv",
                                             "rank.svg", "respondents.csv"]
    back = read_rank(tmp_path / "rank.csv", ascending=True)
    assert back == report.rank
    assert (tmp_path / "rank.svg").read_text().lstrip().startswith("<?xml")
    assert report.rank.ascending


def test_rank_from_scores_ties_and_directions():
    r = AttributeRank.from_scores("m", ["b", "a", "c"], [1.0, 1.0, 0.5])
    assert r.attributes == ["a", "b", "c"]
    assert [e.position for e in r.entries] == [1, 2, 3]
    assert r.relevance_ranks() == {"a": 1.5, "b": 1.5, "c": 3.0}
    asc = AttributeRank.from_scores("m", ["b", "a", "c"], [1.0, 1.0, 0.5], ascending=True)
    assert asc.attributes == ["c", "a", "b"]
    with pytest.raises(ValueError):
        AttributeRank.from_scores("m", ["a", "a"], [1, 2])
    with pytest.raises(ValueError):
        AttributeRank.from_scores("m", ["a"], [1, 2])
