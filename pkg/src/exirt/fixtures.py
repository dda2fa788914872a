"""Paths to the bundled fixture datasets and their benchmark manifest."""

from importlib import resources
from pathlib import Path

NAMES = ("planted_noise", "mixed_symbolic", "imbalanced_numeric")


def data_dir() -> Path:
    return Path(str(resources.files("exirt") / "data"))


def fixture_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(name)
    return data_dir() / f"{name}.csv"


def manifest_path() -> Path:
    return data_dir() / "fixtures.toml"
