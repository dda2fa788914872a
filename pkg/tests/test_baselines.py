import math

import numpy as np
import pytest

from conftest import make_dataset
from exirt.baselines import (info_gain_rank, information_gain, loco_rank,
                             permutation_importance_rank)
from exirt.dataset import AttributeColumn, Dataset, split
from exirt.ensemble import GRADIENT_BOOSTING, RANDOM_FOREST, train
from exirt.ranking import IMPORTANCE


@pytest.fixture
def signal_and_noise():
    rng = np.random.default_rng(12)
    n = 600
    sig = rng.normal(size=n)
    noise = rng.normal(size=n)
    y = (sig + 0.3 * rng.normal(size=n) > 0).astype(int)
    return make_dataset({"noise": noise, "signal": sig}, y)


def test_ignored_noise_column_has_zero_drop():
    rng = np.random.default_rng(0)
    x = rng.normal(size=300)
    noise = rng.normal(size=300)
    ds = make_dataset({"x": x}, (x > 0).astype(int))
    m = train(RANDOM_FOREST, ds, n_trees=10)
    m.feature_names, m.feature_kinds = ["x", "noise"], ["numeric", "numeric"]
    full = make_dataset({"x": x, "noise": noise}, ds.labels)
    rank = permutation_importance_rank(m, full, repeats=3)
    assert rank.score_of("noise") == 0.0
    assert rank.attributes[-1] == "noise"


def test_label_copy_attribute_drops_half():
    rng = np.random.default_rng(1)
    y = np.repeat([0, 1], 500)
    ds = make_dataset({"copy": y.astype(float), "other": rng.normal(size=1000)}, y)
    m = train(RANDOM_FOREST, ds, n_trees=10)
    rank = permutation_importance_rank(m, ds, repeats=5, seed=3)
    assert rank.attributes[0] == "copy"
    assert rank.score_of("copy") == pytest.approx(0.5, abs=0.05)


def test_permutation_deterministic_and_name_invariant(signal_and_noise):
    tr, te = split(signal_and_noise, 0.3, 0)
    m = train(RANDOM_FOREST, tr, n_trees=20, seed=1)
    r1 = permutation_importance_rank(m, te, repeats=1, seed=9)
    r2 = permutation_importance_rank(m, te, repeats=1, seed=9)
    assert r1 == r2
    renamed = Dataset("t", [AttributeColumn(n, c.kind, c.values)
                            for n, c in zip(["zz", "aa"], te.columns)], te.labels)
    r3 = permutation_importance_rank(m, renamed, repeats=1, seed=9)
    assert [e.score for e in r3.entries] == [e.score for e in r1.entries]
    with pytest.raises(ValueError):
        permutation_importance_rank(m, te, repeats=0)


def test_loco_informative_first(signal_and_noise):
    tr, te = split(signal_and_noise, 0.3, 0)
    rank = loco_rank(tr, te, RANDOM_FOREST, {"n_trees": 20}, seed=0)
    assert rank.attributes == ["signal", "noise"]
    assert rank.score_of("signal") > 0.2


def test_loco_duplicate_column_compensates():
    rng = np.random.default_rng(4)
    x = rng.normal(size=500)
    y = (x > 0).astype(int)
    ds = make_dataset({"a": x, "b": x.copy(), "n": rng.normal(size=500)}, y)
    tr, te = split(ds, 0.3, 2)
    rank = loco_rank(tr, te, GRADIENT_BOOSTING, {"n_trees": 20}, seed=0)
    assert abs(rank.score_of("a")) <= 0.02 and abs(rank.score_of("b")) <= 0.02


def test_loco_constant_column_zero(signal_and_noise):
    cols = signal_and_noise.columns + [AttributeColumn("const", "numeric",
                                                       np.full(signal_and_noise.row_count, 3.0))]
    ds = Dataset("c", cols, signal_and_noise.labels)
    tr, te = split(ds, 0.3, 0)
    rank = loco_rank(tr, te, GRADIENT_BOOSTING, {"n_trees": 20}, seed=0)
    assert rank.score_of("const") == 0.0


def test_loco_needs_two_attributes():
    ds = make_dataset({"x": np.arange(20.0)}, np.arange(20) % 2)
    with pytest.raises(ValueError):
        loco_rank(ds, ds, RANDOM_FOREST)


def test_information_gain_examples():
    y = np.repeat([0, 1], 50)
    assert information_gain(y.astype(float), y) == pytest.approx(1.0)
    assert information_gain(np.ones(100), y) == 0.0
    # two halves holding 75/25 and 25/75 of a balanced label
    x75 = np.r_[np.zeros(40), np.ones(40)]
    y75 = np.r_[np.zeros(30), np.ones(10), np.zeros(10), np.ones(30)].astype(int)
    assert information_gain(x75, y75) == pytest.approx(0.18872187554086717, abs=1e-12)
    assert information_gain(x75, y75, symbolic=True) == pytest.approx(0.1887, abs=1e-4)


def test_info_gain_rank_is_importance(signal_and_noise):
    rank = info_gain_rank(signal_and_noise)
    assert rank.kind == IMPORTANCE
    assert rank.attributes[0] == "signal"
    one = make_dataset({"x": np.arange(10.0)}, np.zeros(10, int))
    with pytest.raises(ValueError):
        info_gain_rank(one)


def test_symbolic_gain_partitions_by_category():
    cat = np.tile([0.0, 1.0, 2.0], 20)
    y = (cat == 1).astype(int)
    assert information_gain(cat, y, symbolic=True) == pytest.approx(
        -(1 / 3 * math.log2(1 / 3) + 2 / 3 * math.log2(2 / 3)))
