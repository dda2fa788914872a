"""Tabular binary-classification datasets: loading, stratified splits,
the fifteen dataset meta-properties, and h/s binarisation of property
tables."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import read_csv, write_csv

log = logging.getLogger(__name__)

NUMERIC, SYMBOLIC, BINARY = "numeric", "symbolic", "binary"
KINDS = (NUMERIC, SYMBOLIC, BINARY)
MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})


@dataclass
class AttributeColumn:
    """One input attribute.

    Symbolic columns (and binary columns read from non-numeric text) store
    category ids; ``categories[i]`` is the original label of id ``i``.
    """

    name: str
    kind: str
    values: np.ndarray
    categories: list[str] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        if not self.name:
            raise ValueError("attribute names must be non-empty")
        self.values = np.asarray(self.values, dtype=float)
        if not np.isfinite(self.values).all():
            raise ValueError(f"column {self.name!r} has non-finite values")
        if self.kind == BINARY and len(np.unique(self.values)) > 2:
            raise ValueError(f"binary column {self.name!r} has more than 2 distinct values")

    @property
    def is_numeric_valued(self) -> bool:
        """True when arithmetic on the stored values is meaningful."""
        return self.kind == NUMERIC or (self.kind == BINARY and self.categories is None)


@dataclass
class Dataset:
    name: str
    columns: list[AttributeColumn]
    labels: np.ndarray
    class_names: tuple[str, str] = ("0", "1")

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0/1")
        self.labels = self.labels.astype(np.int64)
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for col in self.columns:
            if len(col.values) != len(self.labels):
                raise ValueError(f"column {col.name!r} length does not match row count")

    @property
    def row_count(self) -> int:
        return len(self.labels)

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def kinds(self) -> list[str]:
        return [c.kind for c in self.columns]

    @property
    def X(self) -> np.ndarray:
        if not self.columns:
            return np.empty((self.row_count, 0))
        return np.column_stack([c.values for c in self.columns])

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        cols = [AttributeColumn(c.name, c.kind, c.values[rows], c.categories)
                for c in self.columns]
        return Dataset(self.name, cols, self.labels[rows], self.class_names)

    def drop(self, name: str) -> "Dataset":
        cols = [c for c in self.columns if c.name != name]
        if len(cols) == len(self.columns):
            raise KeyError(name)
        return Dataset(self.name, cols, self.labels, self.class_names)


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def _category_order(values: Iterable[str]) -> list[str]:
    uniq = set(values)
    nums = {v: _parse_float(v) for v in uniq}
    if all(x is not None for x in nums.values()):
        return sorted(uniq, key=lambda v: (nums[v], v))
    return sorted(uniq)


def load_csv(path, label_column: str, schema_hints: Mapping[str, str] | None = None,
             name: str | None = None) -> Dataset:
    """Read a CSV with a header row into a :class:`Dataset`.

    Column kinds are inferred (``binary`` for at most two distinct values,
    else ``numeric`` when every cell parses as a number, else
    ``symbolic``) unless ``schema_hints`` overrides them.
    Any row with a missing cell is an error: nothing is imputed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    header, rows = read_csv(path)
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate column names")
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not found")
    schema_hints = dict(schema_hints or {})
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{r}: expected {len(header)} cells, got {len(row)}")
        for h, cell in zip(header, row):
            if cell.strip().lower() in MISSING_TOKENS:
                raise ValueError(f"{path}:{r}: missing value in column {h!r}")
    cells = {h: [row[i].strip() for row in rows] for i, h in enumerate(header)}

    raw_labels = cells[label_column]
    classes = _category_order(raw_labels)
    if len(classes) != 2:
        raise ValueError(f"{path}: non-binary label ({len(classes)} distinct values "
                         f"in {label_column!r})")
    labels = np.array([classes.index(v) for v in raw_labels])

    columns = []
    for h in header:
        if h == label_column:
            continue
        col_cells = cells[h]
        parsed = [_parse_float(v) for v in col_cells]
        all_numeric = all(x is not None for x in parsed)
        distinct = len(set(col_cells))
        kind = schema_hints.pop(h, None)
        if kind is None:
            kind = BINARY if distinct <= 2 else (NUMERIC if all_numeric else SYMBOLIC)
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r} for column {h!r}")
        if kind == NUMERIC:
            if not all_numeric:
                bad = next(v for v, x in zip(col_cells, parsed) if x is None)
                raise ValueError(f"{path}: unparseable numeric cell {bad!r} in column {h!r}")
            if not np.isfinite(parsed).all():
                raise ValueError(f"{path}: non-finite value in column {h!r}")
            columns.append(AttributeColumn(h, kind, np.array(parsed)))
        elif kind == BINARY and all_numeric:
            columns.append(AttributeColumn(h, kind, np.array(parsed)))
        else:
            cats = _category_order(col_cells)
            index = {v: i for i, v in enumerate(cats)}
            columns.append(AttributeColumn(h, kind, np.array([index[v] for v in col_cells]), cats))
    if schema_hints:
        raise ValueError(f"schema hints for unknown columns: {sorted(schema_hints)}")
    return Dataset(name or path.stem, columns, labels, (classes[0], classes[1]))


def split(ds: Dataset, test_fraction: float = 0.3, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified train/test split; row order is preserved inside each part."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    if ds.row_count < 10:
        raise ValueError("need at least 10 rows to split")
    rng = np.random.default_rng(seed)
    test_idx = []
    for cls in (0, 1):
        idx = np.flatnonzero(ds.labels == cls)
        if len(idx) == 0:
            raise ValueError(f"class {cls} is absent")
        n_test = int(round(len(idx) * test_fraction))
        if n_test == 0 or n_test == len(idx):
            raise ValueError(f"class {cls} would be empty in one partition")
        test_idx.append(rng.permutation(idx)[:n_test])
    test_mask = np.zeros(ds.row_count, dtype=bool)
    test_mask[np.concatenate(test_idx)] = True
    return ds.take(np.flatnonzero(~test_mask)), ds.take(np.flatnonzero(test_mask))


# ---------------------------------------------------------------------------
# meta-properties
# ---------------------------------------------------------------------------

@dataclass
class PropertyVector:
    number_of_features: int
    number_of_instances: int
    dimensionality: float
    percentage_of_binary_features: float
    std_nominal_distinct_values: float
    mean_nominal_distinct_values: float
    class_entropy: float
    autocorrelation: float
    number_of_numeric_features: int
    number_of_symbolic_features: int
    number_of_binary_features: int
    percentage_of_symbolic_features: float
    percentage_of_numeric_features: float
    majority_class_percentage: float
    minority_class_percentage: float

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_array(self) -> np.ndarray:
        return np.array([float(getattr(self, n)) for n in self.names()])


def class_entropy(labels) -> float:
    """Shannon entropy of the label distribution, in bits."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum()) + 0.0


def meta_features(ds: Dataset) -> PropertyVector:
    n = ds.row_count
    f = len(ds.columns)
    if n == 0 or f == 0:
        raise ValueError("meta-features need at least one row and one attribute")
    kinds = ds.kinds
    n_num, n_sym, n_bin = (kinds.count(k) for k in (NUMERIC, SYMBOLIC, BINARY))
    distinct = [len(np.unique(c.values)) for c in ds.columns if c.kind == SYMBOLIC]
    ones = int(ds.labels.sum())
    major = max(ones, n - ones) / n * 100.0
    same = float(np.mean(ds.labels[1:] == ds.labels[:-1])) if n > 1 else 1.0
    return PropertyVector(
        number_of_features=f,
        number_of_instances=n,
        dimensionality=f / n,
        percentage_of_binary_features=n_bin / f * 100.0,
        std_nominal_distinct_values=float(np.std(distinct)) if distinct else 0.0,
        mean_nominal_distinct_values=float(np.mean(distinct)) if distinct else 0.0,
        class_entropy=class_entropy(ds.labels),
        autocorrelation=same,
        number_of_numeric_features=n_num,
        number_of_symbolic_features=n_sym,
        number_of_binary_features=n_bin,
        percentage_of_symbolic_features=n_sym / f * 100.0,
        percentage_of_numeric_features=n_num / f * 100.0,
        majority_class_percentage=major,
        minority_class_percentage=100.0 - major,
    )


# OpenML-style column names accepted when reading a property table
_ALIASES = {
    "numberoffeatures": "number_of_features",
    "numberofinstances": "number_of_instances",
    "dimensionality": "dimensionality",
    "percentageofbinaryfeatures": "percentage_of_binary_features",
    "stdvnominalattdistinctvalues": "std_nominal_distinct_values",
    "stdnominalattdistinctvalues": "std_nominal_distinct_values",
    "standarddeviationnominalofattributedistinctvalues": "std_nominal_distinct_values",
    "meannominalattdistinctvalues": "mean_nominal_distinct_values",
    "meannominalattributedistinctvalues": "mean_nominal_distinct_values",
    "classentropy": "class_entropy",
    "autocorrelation": "autocorrelation",
    "autocorrelation_": "autocorrelation",
    "numberofnumericfeatures": "number_of_numeric_features",
    "numberofsymbolicfeatures": "number_of_symbolic_features",
    "numberofbinaryfeatures": "number_of_binary_features",
    "percentageofsymbolicfeatures": "percentage_of_symbolic_features",
    "percentageofnumericfeatures": "percentage_of_numeric_features",
    "majorityclasspercentage": "majority_class_percentage",
    "minorityclasspercentage": "minority_class_percentage",
}


def _canonical(name: str) -> str | None:
    key = re.sub(r"[^a-z0-9]", "", name.lower())
    if key in _ALIASES:
        return _ALIASES[key]
    for n in PropertyVector.names():
        if key == n.replace("_", ""):
            return n
    return None


def write_property_table(path, table: Sequence[tuple[str, PropertyVector]]):
    names = PropertyVector.names()
    return write_csv(path, ["dataset"] + names,
                     ([name] + [getattr(pv, n) for n in names] for name, pv in table))


def read_property_table(path) -> list[tuple[str, np.ndarray]]:
    """Read a property table written by :func:`write_property_table` or an
    OpenML-style export with CamelCase headers.

    The first column that is not one of the fifteen properties is taken as
    the dataset name; extra columns are ignored. Returns rows of
    ``(name, values)`` with values in :meth:`PropertyVector.names` order.
    """
    header, rows = read_csv(path)
    mapping = {}
    name_col = None
    for i, h in enumerate(header):
        canon = _canonical(h)
        if canon is not None and canon not in mapping:
            mapping[canon] = i
        elif name_col is None and canon is None:
            name_col = i
    missing = [n for n in PropertyVector.names() if n not in mapping]
    if missing:
        raise ValueError(f"{path}: property columns missing: {missing}")
    out = []
    for r, row in enumerate(rows):
        name = row[name_col] if name_col is not None else f"dataset_{r}"
        out.append((name, np.array([float(row[mapping[n]]) for n in PropertyVector.names()])))
    return out


@dataclass
class BinaryPropertyTable:
    rows: list[str]
    columns: list[str]
    cells: list[list[str]] = field(default_factory=list)


def binarize_properties(table: Sequence[tuple[str, PropertyVector | np.ndarray]],
                        columns: Sequence[str] | None = None) -> BinaryPropertyTable:
    """Map each property value to ``h`` (at or above the column mean) or
    ``s`` (below it)."""
    if len(table) < 2:
        raise ValueError("binarisation needs at least 2 rows")
    names = [n for n, _ in table]
    values = np.array([v.as_array() if isinstance(v, PropertyVector) else np.asarray(v, float)
                       for _, v in table])
    columns = list(columns) if columns is not None else PropertyVector.names()
    if values.shape[1] != len(columns):
        raise ValueError("column names do not match property width")
    means = values.mean(axis=0)
    # ties at the mean count as h even after float rounding in the mean
    slack = 1e-12 * np.maximum(1.0, np.abs(means))
    high = values >= means - slack
    cells = [["h" if x else "s" for x in row] for row in high]
    return BinaryPropertyTable(names, columns, cells)


def write_binary_table(path, table: BinaryPropertyTable):
    return write_csv(path, ["dataset"] + table.columns,
                     ([name] + row for name, row in zip(table.rows, table.cells)))
