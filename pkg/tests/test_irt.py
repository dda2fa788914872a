import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_dataset, simulate_3pl
from exirt.ensemble import RANDOM_FOREST, train
from exirt.irt import (A_BOUNDS, SEARCH_METHODS, EMConfig, ItemParameters, ResponseMatrix,
                       build_response_matrix, estimate_abilities, estimate_ability,
                       fit_item_parameters, icc_derivative, icc_probability, marginal_loglik,
                       quadrature, total_score, total_scores, write_abilities,
                       write_item_parameters)
from exirt.perturbation import TrainStats, VariationKind, build_plan


def _items(a, b, c):
    return ItemParameters(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))


def test_icc_examples():
    assert icc_probability(0.7, 1.3, 0.7, 0.0) == 0.5
    assert icc_probability(-1.0, 2.0, -1.0, 0.2) == pytest.approx(0.6, abs=1e-15)
    assert icc_probability(1.0, 2.0, 0.0, 0.0) == pytest.approx(0.8807970779778823, abs=1e-15)


@given(st.floats(-4, 4), st.floats(0.01, 4), st.floats(-4, 4), st.floats(0, 0.5))
def test_icc_bounded_and_increasing(theta, a, b, c):
    p = icc_probability(theta, a, b, c)
    assert c <= p <= 1.0
    assert icc_probability(theta + 0.5, a, b, c) >= p
    assert icc_derivative(theta, a, b, c) >= 0


def test_total_score_examples():
    items = _items(np.ones(10), np.zeros(10), np.zeros(10))
    theta = np.log(9.0)  # P = 0.9 on every item
    assert total_score(np.ones(10), theta, items) == pytest.approx(9.0, abs=1e-12)
    assert total_score(np.zeros(10), theta, items) == pytest.approx(-1.0, abs=1e-12)
    # mixed row: choose b so that P = 0.8, 0.6, 0.7 at theta = 0
    p = np.array([0.8, 0.6, 0.7])
    mixed = _items(np.ones(3), -np.log(p / (1 - p)), np.zeros(3))
    assert total_score([1, 1, 0], 0.0, mixed) == pytest.approx(1.1, abs=1e-12)
    with pytest.raises(ValueError):
        total_score([1, 0], 0.0, mixed)


def test_quadrature_weights():
    nodes, w = quadrature(40)
    assert nodes[0] == -4 and nodes[-1] == 4 and len(nodes) == 40
    assert w.sum() == pytest.approx(1.0)
    assert np.sum(w * nodes) == pytest.approx(0.0, abs=1e-12)
    assert np.sum(w * nodes ** 2) == pytest.approx(1.0, abs=2e-3)


@pytest.mark.parametrize("method", sorted(SEARCH_METHODS))
def test_ability_examples(method):
    items = _items(np.ones(5), np.linspace(-1, 1, 5), np.zeros(5))
    assert estimate_ability(np.ones(5), items, method) >= 4 - 1e-3
    assert estimate_ability(np.zeros(5), items, method) <= -4 + 1e-3
    two = _items([1, 1], [-1, 1], [0, 0])
    assert abs(estimate_ability([1, 0], two, method)) < 1e-3


@pytest.mark.parametrize("method", sorted(SEARCH_METHODS))
def test_ability_methods_agree(method):
    U, theta, a, b, c = simulate_3pl(20, 30, seed=4)
    items = _items(a, b, c)
    ref = np.array([estimate_ability(u, items, "golden") for u in U])
    got = np.array([estimate_ability(u, items, method) for u in U])
    assert np.allclose(got, ref, atol=5e-4)


def test_ability_rejects_unknown_method():
    with pytest.raises(ValueError, match="unknown search method"):
        estimate_ability([1, 0], _items([1, 1], [0, 0], [0, 0]), "newton")


@given(st.lists(st.integers(0, 1), min_size=8, max_size=8), st.data())
def test_respondent_dominance(row, data):
    items = _items(np.linspace(0.5, 2, 8), np.linspace(-2, 2, 8), np.linspace(0, 0.25, 8))
    y = np.array(row)
    zeros = np.flatnonzero(y == 0)
    if not len(zeros):
        return
    x = y.copy()
    x[data.draw(st.sampled_from(list(zeros)))] = 1
    assert estimate_ability(x, items) >= estimate_ability(y, items) - 1e-3


def test_fit_rejects_identical_rows():
    with pytest.raises(ValueError, match="no discrimination signal"):
        fit_item_parameters(ResponseMatrix(np.tile([1, 0, 1], (5, 1))))
    with pytest.raises(ValueError):
        fit_item_parameters(ResponseMatrix(np.array([[1, 0, 1]])))


def test_fit_clamps_degenerate_items_and_ties_identical_columns():
    U, *_ = simulate_3pl(120, 8, seed=2)
    U[:, 0] = 1
    U[:, 1] = 0
    U[:, 2] = U[:, 3]
    items = fit_item_parameters(ResponseMatrix(U))
    assert (items.a[0], items.b[0], items.c[0]) == (A_BOUNDS[0], -4.0, 0.0)
    assert (items.a[1], items.b[1], items.c[1]) == (A_BOUNDS[0], 4.0, 0.0)
    assert items.a[2] == pytest.approx(items.a[3], abs=1e-6)
    assert items.b[2] == pytest.approx(items.b[3], abs=1e-6)
    assert items.c[2] == pytest.approx(items.c[3], abs=1e-6)


def test_fit_pure_mml_history_is_marginal_loglik():
    U, *_ = simulate_3pl(150, 12, seed=8)
    rm = ResponseMatrix(U)
    items = fit_item_parameters(rm, EMConfig(a_prior_sd=None, c_prior=None))
    assert items.n_iter >= 1
    assert items.loglik_history[-1] == pytest.approx(marginal_loglik(rm, items), rel=1e-12)
    assert np.all(np.diff(items.loglik_history) >= -1e-9 * abs(items.loglik_history[0]))


def test_fit_respects_bounds():
    U, *_ = simulate_3pl(100, 10, seed=11)
    items = fit_item_parameters(ResponseMatrix(U), EMConfig(a_prior_sd=None, c_prior=None))
    assert np.all((items.a >= 0.01) & (items.a <= 4))
    assert np.all((items.b >= -4) & (items.b <= 4))
    assert np.all((items.c >= 0) & (items.c <= 0.5))


def test_response_matrix_validation():
    with pytest.raises(ValueError):
        ResponseMatrix(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        ResponseMatrix(np.zeros(3))
    rm = ResponseMatrix(np.zeros((2, 3)))
    assert rm.respondent_ids == [0, 1] and rm.item_ids == [0, 1, 2]


def _noise_model():
    rng = np.random.default_rng(1)
    x0, noise = rng.normal(size=(2, 120))
    ds = make_dataset({"x0": x0, "noise": noise}, (x0 > 0).astype(int))
    # a model that never sees the noise column: single-attribute trees
    sub = make_dataset({"x0": x0}, ds.labels)
    m = train(RANDOM_FOREST, sub, n_trees=5, seed=0)
    m.feature_names, m.feature_kinds = ds.feature_names, ds.kinds
    return m, ds


def test_response_matrix_from_plan():
    m, ds = _noise_model()
    test = ds.take(np.arange(50))
    plan = build_plan(2, [VariationKind.NEGATE, VariationKind.BINNING], 2)
    rm = build_response_matrix(plan, m, test, TrainStats.from_dataset(ds))
    assert rm.shape == (len(plan), 50)
    # the model ignores column 1, so varying it leaves row 0 unchanged
    for spec in plan.covering(1):
        if spec.attribute_set == (1,):
            assert np.array_equal(rm.U[spec.respondent_id], rm.U[0])


def test_response_matrix_shape_31_by_50():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 5))
    ds = make_dataset({f"x{i}": X[:, i] for i in range(5)}, (X[:, 0] > 0).astype(int))
    m = train(RANDOM_FOREST, ds, n_trees=5)
    rm = build_response_matrix(build_plan(5), m, ds)
    assert rm.shape == (31, 50)
    assert rm.U[0].mean() == np.mean(m.predict(ds.X) == ds.labels)


def test_perfect_model_row_of_ones():
    x = np.r_[np.zeros(10), np.ones(10)]
    z = np.random.default_rng(0).permutation(20).astype(float)
    ds = make_dataset({"x": x, "z": z}, x.astype(int))
    m = train(RANDOM_FOREST, ds, n_trees=3, min_leaf=1)
    rm = build_response_matrix(build_plan(2, [VariationKind.NEGATE], 1), m, ds)
    assert rm.U[0].tolist() == [1] * 20


def test_engine_errors_carry_respondent_context():
    m, ds = _noise_model()

    def broken(rows, spec, stats):
        if spec.respondent_id == 2:
            raise ValueError("boom")
        return rows

    with pytest.raises(RuntimeError, match="respondent 2"):
        build_response_matrix(build_plan(2, [VariationKind.NEGATE], 1), m, ds, engine=broken)


def test_writers(tmp_path):
    items = _items([1.0, 2.0], [0.5, -0.5], [0.1, 0.0])
    text = write_item_parameters(tmp_path / "i.csv", items, ["r3", "r9"]).read_text()
    assert text.splitlines() == ["item_id,a,b,c", "r3,1.0,0.5,0.1", "r9,2.0,-0.5,0.0"]
    rm = ResponseMatrix(np.array([[1, 0], [1, 1]]))
    est = estimate_abilities(rm, items)
    scores = total_scores(rm, items, est.theta)
    text = write_abilities(tmp_path / "r.csv", rm.respondent_ids, est.theta, scores).read_text()
    assert text.splitlines()[0] == "respondent_id,theta,total_score"
    assert len(text.splitlines()) == 3
