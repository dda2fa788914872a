"""eXirt: attribute relevance from IRT abilities of perturbed-input
respondents.

Pipeline: respondent plan -> response matrix -> 3PL item calibration ->
ability and Total Score per respondent -> each attribute's score is the
mean Total Score of the respondents that perturb it. A *low* score means
perturbing the attribute hurts the model, so ranks are ascending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import plots
from .dataset import Dataset
from .ensemble import TrainedEnsemble
from .irt import (EMConfig, ItemParameters, ResponseMatrix, build_response_matrix,
                  estimate_abilities, fit_item_parameters, total_scores,
                  write_abilities, write_item_parameters)
from .perturbation import (DEFAULT_KINDS, RespondentPlan, TrainStats, VariationKind,
                           build_plan, write_plan)
from .ranking import AttributeRank, write_rank

MEASURE = "exirt"


@dataclass
class ExplainConfig:
    kinds: Sequence = DEFAULT_KINDS
    max_arity: int = 2
    base_seed: int = 0
    ability_method: str = "golden"
    em: EMConfig = field(default_factory=EMConfig)

    @property
    def v(self) -> int:
        return len(self.kinds)

    @property
    def c(self) -> int:
        return self.max_arity


@dataclass
class ExplainReport:
    rank: AttributeRank
    item_params: ItemParameters
    theta: np.ndarray
    total_scores: np.ndarray
    plan: RespondentPlan
    responses: ResponseMatrix
    feature_names: list[str]


def attribute_scores(plan: RespondentPlan, scores: np.ndarray) -> np.ndarray:
    """Mean respondent score over the respondents that perturb each
    attribute. The original model (empty attribute set) never counts."""
    out = np.empty(plan.f)
    for a in range(plan.f):
        ids = [s.respondent_id for s in plan.covering(a)]
        out[a] = np.mean(scores[ids])
    return out


def explain(model: TrainedEnsemble, train: Dataset, test: Dataset,
            cfg: ExplainConfig | None = None) -> ExplainReport:
    cfg = cfg or ExplainConfig()
    if test.row_count == 0:
        raise ValueError("test set is empty")
    if model.feature_names != train.feature_names or test.feature_names != train.feature_names:
        raise ValueError("model, train and test attribute names differ")
    f = len(train.feature_names)
    plan = build_plan(f, [VariationKind.parse(k) for k in cfg.kinds], cfg.max_arity,
                      cfg.base_seed)
    stats = TrainStats.from_dataset(train)
    rm = build_response_matrix(plan, model, test, stats)
    items = fit_item_parameters(rm, cfg.em)
    theta = estimate_abilities(rm, items, cfg.ability_method).theta
    scores = total_scores(rm, items, theta)
    per_attr = attribute_scores(plan, scores)
    rank = AttributeRank.from_scores(MEASURE, train.feature_names, per_attr, ascending=True)
    return ExplainReport(rank, items, theta, scores, plan, rm, list(train.feature_names))


def export_report(report: ExplainReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    written = [
        write_rank(out / "rank.csv", report.rank),
        write_item_parameters(out / "item_parameters.csv", report.item_params,
                              report.responses.item_ids),
        write_abilities(out / "respondents.csv", report.responses.respondent_ids,
                        report.theta, report.total_scores),
        write_plan(out / "plan.csv", report.plan, report.feature_names),
    ]
    # plotted so the most relevant attribute (lowest mean Total Score)
    # gets the tallest bar
    worst = max(e.score for e in report.rank.entries)
    written.append(plots.rank_bars(
        out / "rank.svg", report.rank.attributes,
        [worst - e.score for e in report.rank.entries],
        "relevance = max score - mean Total Score of respondents perturbing the attribute",
        "eXirt attribute relevance"))
    return written
