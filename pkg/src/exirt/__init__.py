"""Global relevance ranks for tree ensembles from Item Response Theory,
plus a benchmark harness comparing them with other attribute ranks."""

from .dataset import Dataset, load_csv, meta_features, split
from .ensemble import (TrainedEnsemble, load_model, save_model, train, train_gradient_boosting,
                       train_random_forest)
from .explainer import ExplainConfig, ExplainReport, explain, export_report
from .ranking import AttributeRank

__all__ = [
    "AttributeRank", "Dataset", "ExplainConfig", "ExplainReport", "TrainedEnsemble",
    "explain", "export_report", "load_csv", "load_model", "meta_features", "save_model",
    "split", "train", "train_gradient_boosting", "train_random_forest",
]

__version__ = "0.1.0"
