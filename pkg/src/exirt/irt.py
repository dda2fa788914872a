"""Three-parameter logistic IRT: response matrices, item calibration,
ability estimation and the Total Score.

Item calibration is Bock-Aitkin marginal maximum likelihood: abilities are
integrated out against a standard-normal prior on a fixed quadrature grid,
and the M-step maximises each item's expected complete-data log-likelihood
inside box bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.special import expit, logsumexp

from ._io import write_csv

log = logging.getLogger(__name__)

A_BOUNDS = (0.01, 4.0)
B_BOUNDS = (-4.0, 4.0)
C_BOUNDS = (0.0, 0.5)
THETA_BOUNDS = (-4.0, 4.0)

_EPS = 1e-12


@dataclass
class ResponseMatrix:
    """Dichotomous respondents x items correctness matrix.

    ``U[j, i] == 1`` when respondent ``j`` answered item ``i`` correctly.
    """

    U: np.ndarray
    respondent_ids: list = field(default_factory=list)
    item_ids: list = field(default_factory=list)

    def __post_init__(self):
        U = np.asarray(self.U)
        if U.ndim != 2:
            raise ValueError("response matrix must be 2-D")
        if U.size and not np.isin(U, (0, 1)).all():
            raise ValueError("response matrix must contain only 0 and 1")
        self.U = U.astype(np.int8)
        if not self.respondent_ids:
            self.respondent_ids = list(range(U.shape[0]))
        if not self.item_ids:
            self.item_ids = list(range(U.shape[1]))
        if len(self.respondent_ids) != U.shape[0] or len(self.item_ids) != U.shape[1]:
            raise ValueError("id lists do not match matrix shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape


@dataclass
class ItemParameters:
    """Per-item discrimination ``a``, difficulty ``b`` and guessing ``c``.

    ``loglik_history`` holds the EM objective after every iteration when the
    parameters came out of :func:`fit_item_parameters`: the marginal
    log-likelihood, plus the log prior density when priors are enabled.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    loglik_history: list = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if not (self.a.shape == self.b.shape == self.c.shape) or self.a.ndim != 1:
            raise ValueError("a, b and c must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return len(self.a)


@dataclass
class AbilityEstimate:
    theta: np.ndarray
    method: str


@dataclass
class EMConfig:
    """EM settings.

    ``a_prior_sd`` (log-normal scale on discrimination) and ``c_prior``
    (Beta shape pair on guessing) turn the M-step into a Bayes-modal one;
    set both to ``None`` for plain marginal maximum likelihood. With 3PL
    and a few hundred respondents the plain variant drifts to the bounds.
    """

    quadrature_points: int = 40
    max_iter: int = 50
    tol: float = 1e-4
    a_prior_sd: float | None = 0.5
    c_prior: tuple[float, float] | None = (2.0, 10.0)


def icc_probability(theta, a, b, c):
    """P(correct | theta) = c + (1 - c) / (1 + exp(-a (theta - b))).

    Broadcasts over numpy arrays.
    """
    theta = np.asarray(theta, dtype=float)
    out = c + (1.0 - np.asarray(c, dtype=float)) * expit(a * (theta - b))
    return float(out) if np.ndim(out) == 0 else out


def icc_derivative(theta, a, b, c):
    """Analytic dP/dtheta of :func:`icc_probability`."""
    z = a * (np.asarray(theta, dtype=float) - b)
    # expit(-z) rather than 1 - expit(z): exact in the tails
    out = (1.0 - np.asarray(c, dtype=float)) * a * expit(z) * expit(-z)
    return float(out) if np.ndim(out) == 0 else out


def total_score(responses, theta: float, items: ItemParameters) -> float:
    """Sum of hit probabilities on correct items minus miss probabilities
    on wrong ones."""
    u = np.asarray(responses)
    if u.shape != items.a.shape:
        raise ValueError("response row length does not match item count")
    p = icc_probability(theta, items.a, items.b, items.c)
    return float(np.sum(np.where(u == 1, p, -(1.0 - p))))


# ---------------------------------------------------------------------------
# item calibration
# ---------------------------------------------------------------------------

def quadrature(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Equally spaced nodes on the ability interval with normalised N(0,1)
    weights."""
    nodes = np.linspace(THETA_BOUNDS[0], THETA_BOUNDS[1], n_points)
    w = np.exp(-0.5 * nodes ** 2)
    return nodes, w / w.sum()


def _log_p(nodes, a, b, c):
    p = icc_probability(nodes[None, :], a[:, None], b[:, None], c[:, None])
    p = np.clip(p, _EPS, 1.0 - _EPS)
    return np.log(p), np.log1p(-p)


def _e_step(U, nodes, log_w, a, b, c):
    log_p, log_q = _log_p(nodes, a, b, c)
    ll = U @ log_p + (1 - U) @ log_q  # respondents x nodes
    joint = ll + log_w[None, :]
    marg = logsumexp(joint, axis=1)
    post = np.exp(joint - marg[:, None])
    n_q = post.sum(axis=0)
    r_iq = U.T @ post
    return float(marg.sum()), n_q, r_iq


def _log_prior(params, config: EMConfig):
    k = len(params) // 3
    a = params[:k]
    c = np.clip(params[2 * k:], 1e-6, 1.0 - 1e-6)
    lp = np.zeros(k)
    grad = np.zeros(3 * k)
    if config.a_prior_sd is not None:
        la = np.log(a)
        var = config.a_prior_sd ** 2
        lp += -la - la ** 2 / (2.0 * var)
        grad[:k] = -1.0 / a - la / (var * a)
    if config.c_prior is not None:
        alpha, beta = config.c_prior
        lp += (alpha - 1.0) * np.log(c) + (beta - 1.0) * np.log1p(-c)
        grad[2 * k:] = (alpha - 1.0) / c - (beta - 1.0) / (1.0 - c)
    return lp, grad


def _expected_loglik(params, nodes, n_q, r_iq):
    """Per-item expected complete-data log-likelihood and its gradient."""
    k = len(params) // 3
    a, b, c = params[:k], params[k:2 * k], params[2 * k:]
    z = a[:, None] * (nodes[None, :] - b[:, None])
    s = expit(z)
    p = np.clip(c[:, None] + (1.0 - c[:, None]) * s, _EPS, 1.0 - _EPS)
    w_q = n_q[None, :] - r_iq
    q_item = (r_iq * np.log(p) + w_q * np.log1p(-p)).sum(axis=1)
    dq_dp = r_iq / p - w_q / (1.0 - p)
    ds = s * (1.0 - s) * (1.0 - c[:, None])
    ga = (dq_dp * ds * (nodes[None, :] - b[:, None])).sum(axis=1)
    gb = (dq_dp * ds * -a[:, None]).sum(axis=1)
    gc = (dq_dp * (1.0 - s)).sum(axis=1)
    return q_item, np.concatenate([ga, gb, gc])


def _initial_params(U):
    p = U.mean(axis=0).clip(0.02, 0.98)
    k = U.shape[1]
    a = np.ones(k)
    b = np.clip(-np.log(p / (1.0 - p)), *B_BOUNDS)
    c = np.full(k, 0.05)
    return a, b, c


def fit_item_parameters(rm: ResponseMatrix, config: EMConfig | None = None,
                        check_monotone: bool = True) -> ItemParameters:
    """Calibrate 3PL item parameters by Bock-Aitkin EM.

    Items that every respondent got right (or wrong) carry no information;
    they are kept with clamped parameters (``a`` at its floor, ``b`` at the
    easy or hard bound, ``c = 0``) and take no part in the EM loop.

    Raises:
        ValueError: if every respondent gave the same answers, or the
            matrix is too small to calibrate.
    """
    config = config or EMConfig()
    U = rm.U.astype(float)
    n_resp, n_items = U.shape
    if n_resp < 2 or n_items < 2:
        raise ValueError("need at least 2 respondents and 2 items")
    if (rm.U == rm.U[0]).all():
        raise ValueError("no discrimination signal: all respondent rows are identical")

    col = U.mean(axis=0)
    all_right, all_wrong = col == 1.0, col == 0.0
    live = ~(all_right | all_wrong)

    a = np.full(n_items, A_BOUNDS[0])
    b = np.where(all_right, B_BOUNDS[0], B_BOUNDS[1])
    c = np.zeros(n_items)

    U_live = U[:, live]
    k = U_live.shape[1]
    history: list[float] = []
    n_iter = 0
    converged = False
    if k:
        nodes, w = quadrature(config.quadrature_points)
        log_w = np.log(w)
        la, lb, lc = _initial_params(U_live)
        bounds = [A_BOUNDS] * k + [B_BOUNDS] * k + [C_BOUNDS] * k

        def objective(x):
            q, g = _expected_loglik(x, nodes, n_q, r_iq)
            lp, gp = _log_prior(x, config)
            return q + lp, g + gp

        ll, n_q, r_iq = _e_step(U_live, nodes, log_w, la, lb, lc)
        history.append(ll + _log_prior(np.concatenate([la, lb, lc]), config)[0].sum())
        for n_iter in range(1, config.max_iter + 1):
            x0 = np.concatenate([la, lb, lc])
            q_old, _ = objective(x0)

            def neg(x):
                q, g = objective(x)
                return -q.sum(), -g

            res = optimize.minimize(neg, x0, jac=True, method="L-BFGS-B",
                                    bounds=bounds,
                                    options={"maxiter": 200, "ftol": 1e-12, "gtol": 1e-8})
            x1 = np.clip(res.x, [lo for lo, _ in bounds], [hi for _, hi in bounds])
            q_new, _ = objective(x1)
            # generalised EM: an item only moves if its own Q improves
            keep = q_new < q_old
            x1 = np.where(np.tile(keep, 3), x0, x1)
            la, lb, lc = x1[:k], x1[k:2 * k], x1[2 * k:]

            ll_new, n_q, r_iq = _e_step(U_live, nodes, log_w, la, lb, lc)
            ll_new += _log_prior(x1, config)[0].sum()
            if check_monotone and ll_new < history[-1] - 1e-9 * max(1.0, abs(history[-1])):
                raise RuntimeError(
                    f"EM marginal log-likelihood decreased at iteration {n_iter}: "
                    f"{history[-1]!r} -> {ll_new!r}")
            history.append(ll_new)
            if ll_new - history[-2] < config.tol:
                converged = True
                break
        a[live], b[live], c[live] = la, lb, lc

    return ItemParameters(a, b, c, loglik_history=history, n_iter=n_iter,
                          converged=converged)


def marginal_loglik(rm: ResponseMatrix, items: ItemParameters,
                    quadrature_points: int = 40) -> float:
    """Marginal log-likelihood of the informative items under ``items``."""
    U = rm.U.astype(float)
    col = U.mean(axis=0)
    live = (col > 0) & (col < 1)
    nodes, w = quadrature(quadrature_points)
    ll, _, _ = _e_step(U[:, live], nodes, np.log(w), items.a[live],
                       items.b[live], items.c[live])
    return ll


# ---------------------------------------------------------------------------
# ability estimation
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, lo, hi, tol):
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def _clipped(f, lo, hi):
    """Extend ``f`` past ``[lo, hi]`` with a quadratic wall so scipy's
    unbounded bracketing searches stay meaningful at the bounds."""
    def g(x):
        xc = min(max(x, lo), hi)
        return f(xc) + (x - xc) ** 2
    return g


def _golden2(f, lo, hi, tol):
    x = optimize.golden(_clipped(f, lo, hi), brack=(lo, hi), tol=tol / max(abs(hi), 1.0))
    return float(np.clip(x, lo, hi))


def _ternary(f, lo, hi, tol):
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return 0.5 * (lo + hi)


def _dichotomous(f, lo, hi, tol):
    delta = tol / 4.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid - delta) <= f(mid + delta):
            hi = mid + delta
        else:
            lo = mid - delta
    return 0.5 * (lo + hi)


def _fibonacci(f, lo, hi, tol):
    fib = [1.0, 1.0]
    while fib[-1] < (hi - lo) / tol:
        fib.append(fib[-1] + fib[-2])
    n = len(fib) - 1
    x1 = lo + fib[n - 2] / fib[n] * (hi - lo)
    x2 = lo + fib[n - 1] / fib[n] * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for k in range(n - 1, 1, -1):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = lo + fib[k - 2] / fib[k] * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + fib[k - 1] / fib[k] * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def _brent(f, lo, hi, tol):
    x = optimize.brent(_clipped(f, lo, hi), brack=(lo, hi), tol=tol)
    return float(np.clip(x, lo, hi))


def _bounded(f, lo, hi, tol):
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    return float(res.x)


SEARCH_METHODS: dict[str, Callable] = {
    "golden": _golden,
    "brent": _brent,
    "bounded": _bounded,
    "ternary": _ternary,
    "fibonacci": _fibonacci,
    "dichotomous": _dichotomous,
    "golden2": _golden2,
}


def _neg_loglik(u, items):
    def f(theta):
        p = np.clip(icc_probability(theta, items.a, items.b, items.c), _EPS, 1 - _EPS)
        return -float(np.sum(np.where(u == 1, np.log(p), np.log1p(-p))))
    return f


def estimate_ability(responses, items: ItemParameters, method: str = "golden",
                     tol: float = 1e-4, grid_step: float = 0.1) -> float:
    """Maximum-likelihood ability of one respondent on ``[-4, 4]``.

    A coarse grid scan first locates the best region (3PL likelihoods can
    be multimodal); ``method`` then refines inside the neighbouring grid
    cells.
    """
    if method not in SEARCH_METHODS:
        raise ValueError(f"unknown search method {method!r}; "
                         f"choose from {sorted(SEARCH_METHODS)}")
    u = np.asarray(responses)
    if u.shape != items.a.shape:
        raise ValueError("response row length does not match item count")
    f = _neg_loglik(u, items)
    lo_b, hi_b = THETA_BOUNDS
    grid = np.linspace(lo_b, hi_b, int(round((hi_b - lo_b) / grid_step)) + 1)
    p = np.clip(icc_probability(grid[:, None], items.a, items.b, items.c), _EPS, 1 - _EPS)
    vals = -np.where(u == 1, np.log(p), np.log1p(-p)).sum(axis=1)
    g = grid[int(np.argmin(vals))]
    lo, hi = max(lo_b, g - grid_step), min(hi_b, g + grid_step)
    return float(SEARCH_METHODS[method](f, lo, hi, tol))


def estimate_abilities(rm: ResponseMatrix, items: ItemParameters,
                       method: str = "golden") -> AbilityEstimate:
    theta = np.array([estimate_ability(row, items, method) for row in rm.U])
    return AbilityEstimate(theta=theta, method=method)


def total_scores(rm: ResponseMatrix, items: ItemParameters, theta: Sequence[float]) -> np.ndarray:
    return np.array([total_score(row, t, items) for row, t in zip(rm.U, theta)])


def write_item_parameters(path, items: ItemParameters, item_ids=None):
    ids = item_ids if item_ids is not None else range(len(items))
    return write_csv(path, ["item_id", "a", "b", "c"],
                     zip(ids, items.a, items.b, items.c))


def write_abilities(path, respondent_ids, theta, scores):
    return write_csv(path, ["respondent_id", "theta", "total_score"],
                     zip(respondent_ids, theta, scores))


def build_response_matrix(plan, model, test, train_stats=None, engine=None) -> ResponseMatrix:
    """Score every respondent of ``plan`` on the test items.

    Row ``j`` holds 1 where ``model`` still predicts the true label after
    the test matrix was altered according to respondent ``j``.
    ``engine`` defaults to :func:`exirt.perturbation.apply_variation`.
    """
    from .perturbation import TrainStats, apply_variation

    engine = engine or apply_variation
    X = test.X
    if X.shape[1] != plan.f or X.shape[1] != len(model.feature_names):
        raise ValueError("plan, model and test set disagree on the attribute count")
    if train_stats is None:
        train_stats = TrainStats.from_dataset(test)
    y = test.labels
    U = np.empty((len(plan.specs), len(y)), dtype=np.int8)
    for spec in plan.specs:
        try:
            U[spec.respondent_id] = model.predict(engine(X, spec, train_stats)) == y
        except Exception as exc:
            raise RuntimeError(f"respondent {spec.respondent_id} "
                               f"({spec.kind}, {spec.attribute_set}) failed: {exc}") from exc
    return ResponseMatrix(U, [s.respondent_id for s in plan.specs], list(range(len(y))))
