import re

import numpy as np
import pytest
from hypothesis import settings

from exirt.dataset import BINARY, NUMERIC, SYMBOLIC, AttributeColumn, Dataset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# criterion id -> (PASS | FAIL | SKIP, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        num, tag = re.match(r"(\d+)(\w*)", key).groups()
        return int(num), tag

    for key in sorted(ACCEPTANCE, key=order):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{status}  {key}: {detail}")


def make_dataset(columns: dict, labels, name="toy", kinds=None) -> Dataset:
    """Dataset from {name: values}; kinds default to numeric (binary if 0/1)."""
    cols = []
    for col_name, values in columns.items():
        values = np.asarray(values, dtype=float)
        kind = (kinds or {}).get(col_name)
        if kind is None:
            kind = BINARY if set(np.unique(values)) <= {0.0, 1.0} else NUMERIC
        cats = [str(i) for i in range(int(values.max()) + 1)] if kind == SYMBOLIC else None
        cols.append(AttributeColumn(col_name, kind, values, cats))
    return Dataset(name, cols, np.asarray(labels))


@pytest.fixture
def separable():
    """Two numeric attributes; the label is x0 > 0. x1 is pure noise."""
    rng = np.random.default_rng(7)
    x0 = rng.normal(size=200)
    x1 = rng.normal(size=200)
    return make_dataset({"x0": x0, "x1": x1}, (x0 > 0).astype(int))


@pytest.fixture
def xor_data():
    rng = np.random.default_rng(3)
    x0 = rng.uniform(-1, 1, 400)
    x1 = rng.uniform(-1, 1, 400)
    return make_dataset({"x0": x0, "x1": x1}, ((x0 > 0) ^ (x1 > 0)).astype(int))


def simulate_3pl(n_resp=200, n_items=30, seed=0):
    from exirt.irt import icc_probability

    rng = np.random.default_rng(seed)
    theta = rng.normal(size=n_resp)
    a = rng.uniform(0.5, 2.0, n_items)
    b = rng.uniform(-2.0, 2.0, n_items)
    c = rng.uniform(0.0, 0.25, n_items)
    p = icc_probability(theta[:, None], a[None, :], b[None, :], c[None, :])
    U = (rng.uniform(size=p.shape) < p).astype(int)
    return U, theta, a, b, c
