import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.special import expit

from conftest import make_dataset
from exirt.dataset import SYMBOLIC, load_csv, split
from exirt.ensemble import (GRADIENT_BOOSTING, RANDOM_FOREST, TrainedEnsemble, dumps_model,
                            load_model, predict, predict_proba, save_model, train,
                            train_gradient_boosting, train_random_forest)
from exirt.fixtures import fixture_path


def test_rf_fits_separable_training_set():
    x0 = np.r_[np.linspace(-3, -0.5, 30), np.linspace(0.5, 3, 30)]
    x1 = np.r_[np.linspace(0, 1, 30), np.linspace(0, 1, 30)]
    ds = make_dataset({"x0": x0, "x1": x1}, (x0 > 0).astype(int))
    m = train_random_forest(ds, n_trees=10, seed=0)
    assert np.mean(m.predict(ds.X) == ds.labels) == 1.0


def test_single_attribute_model_uses_only_it():
    rng = np.random.default_rng(0)
    x = rng.normal(size=80)
    ds = make_dataset({"only": x}, (x > 0.2).astype(int))
    for fam in (RANDOM_FOREST, GRADIENT_BOOSTING):
        m = train(fam, ds, seed=1, n_trees=5)
        assert m.used_features() == {0}


def test_same_seed_same_bytes(separable):
    a = dumps_model(train(RANDOM_FOREST, separable, seed=5, n_trees=10))
    b = dumps_model(train(RANDOM_FOREST, separable, seed=5, n_trees=10))
    c = dumps_model(train(RANDOM_FOREST, separable, seed=6, n_trees=10))
    assert a == b and a != c


def test_gb_prior_and_zero_learning_rate(separable):
    balanced = make_dataset({"x": np.arange(20.0)}, np.arange(20) % 2)
    assert train_gradient_boosting(balanced, n_trees=3).initial_score == 0.0
    m = train_gradient_boosting(separable, n_trees=5, learning_rate=0.0)
    p = separable.labels.mean()
    assert m.initial_score == pytest.approx(np.log(p / (1 - p)))
    assert np.allclose(m.predict_proba(separable.X), expit(m.initial_score))


def test_gb_learns_xor(xor_data):
    m = train_gradient_boosting(xor_data, n_trees=50, max_depth=2, seed=0)
    assert np.mean(m.predict(xor_data.X) == xor_data.labels) >= 0.95


def test_single_class_rejected():
    ds = make_dataset({"x": np.arange(10.0)}, np.zeros(10, int))
    for fam in (RANDOM_FOREST, GRADIENT_BOOSTING):
        with pytest.raises(ValueError, match="single class"):
            train(fam, ds)
    with pytest.raises(ValueError):
        train("svm", ds)


def test_empty_rows_and_wrong_width(separable):
    m = train(RANDOM_FOREST, separable, n_trees=3)
    assert predict(m, np.empty((0, 2))).shape == (0,)
    assert predict_proba(m, []).shape == (0,)
    with pytest.raises(ValueError):
        m.predict(np.zeros((3, 5)))


def test_identical_trees_match_single_tree(separable):
    m = train(RANDOM_FOREST, separable, n_trees=1, seed=2)
    tree = m.trees[0]
    tripled = TrainedEnsemble(RANDOM_FOREST, [tree] * 3, np.full(3, 1 / 3),
                              m.feature_names, m.feature_kinds)
    assert np.allclose(tripled.predict_proba(separable.X), tree.predict_value(separable.X))


@given(arrays(float, (7, 2), elements=st.floats(-1e6, 1e6)))
def test_proba_in_unit_interval(rows):
    ds = make_dataset({"a": [0, 1, 2, 3, 4, 5.0], "b": [1, 0, 1, 0, 1, 0.0]}, [0, 0, 0, 1, 1, 1])
    for fam in (RANDOM_FOREST, GRADIENT_BOOSTING):
        p = train(fam, ds, n_trees=4, min_leaf=1).predict_proba(rows)
        assert np.all((p >= 0) & (p <= 1))


def test_symbolic_split_partitions_categories():
    # categories 0 and 2 are positive; no threshold on ids separates them
    cat = np.tile([0, 1, 2, 3], 25).astype(float)
    y = np.isin(cat, [0, 2]).astype(int)
    ds = make_dataset({"c": cat}, y, kinds={"c": SYMBOLIC})
    m = train_gradient_boosting(ds, n_trees=1, max_depth=1, learning_rate=1.0)
    assert np.mean(m.predict(ds.X) == y) == 1.0


def test_round_trip_identity(tmp_path):
    ds = load_csv(fixture_path("mixed_symbolic"), "class")
    tr, te = split(ds, 0.3, 1)
    for fam in (RANDOM_FOREST, GRADIENT_BOOSTING):
        m = train(fam, tr, seed=3, n_trees=15)
        path = save_model(m, tmp_path / f"{fam}.json")
        back = load_model(path)
        assert np.array_equal(back.predict_proba(te.X), m.predict_proba(te.X))
        assert dumps_model(back) == dumps_model(m)


def test_load_rejects_bad_documents(tmp_path, separable):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(ValueError, match="malformed"):
        load_model(p)
    doc = train(RANDOM_FOREST, separable, n_trees=2).to_dict()
    doc["schema_version"] = 99
    p.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="schema version"):
        load_model(p)
    doc["schema_version"] = 1
    del doc["trees"]
    p.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="malformed"):
        load_model(p)
