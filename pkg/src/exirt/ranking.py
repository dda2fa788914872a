"""Attribute ranks: the exchange format between explainers and analytics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from ._io import read_csv, write_csv

RELEVANCE = "relevance"
IMPORTANCE = "importance"


@dataclass(frozen=True)
class RankEntry:
    attribute: str
    score: float
    position: int


@dataclass
class AttributeRank:
    """Attributes ordered from most to least relevant.

    ``ascending`` records the measure's direction: True when a *lower*
    score means a more relevant attribute (eXirt), False otherwise.
    ``kind`` separates relevance ranks (built from model outputs) from
    importance ranks (built from true labels).
    """

    measure: str
    entries: list[RankEntry]
    ascending: bool = False
    kind: str = RELEVANCE

    @classmethod
    def from_scores(cls, measure: str, names: Sequence[str], scores: Sequence[float],
                    ascending: bool = False, kind: str = RELEVANCE) -> "AttributeRank":
        if len(names) != len(scores):
            raise ValueError("one score per attribute is required")
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        sign = 1.0 if ascending else -1.0
        order = sorted(range(len(names)), key=lambda i: (sign * float(scores[i]), names[i]))
        entries = [RankEntry(names[i], float(scores[i]), pos)
                   for pos, i in enumerate(order, start=1)]
        return cls(measure, entries, ascending, kind)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def attributes(self) -> list[str]:
        return [e.attribute for e in self.entries]

    def score_of(self, attribute: str) -> float:
        return self._lookup(attribute).score

    def position_of(self, attribute: str) -> int:
        return self._lookup(attribute).position

    def _lookup(self, attribute):
        for e in self.entries:
            if e.attribute == attribute:
                return e
        raise KeyError(attribute)

    def relevance_ranks(self) -> dict[str, float]:
        """Average-tied rank per attribute, 1 = most relevant."""
        scores = np.array([e.score for e in self.entries])
        key = scores if self.ascending else -scores
        ranks = rankdata(key, method="average")
        return {e.attribute: float(r) for e, r in zip(self.entries, ranks)}


def write_rank(path, rank: AttributeRank):
    return write_csv(path, ["measure", "attribute", "score", "position"],
                     ((rank.measure, e.attribute, e.score, e.position) for e in rank.entries))


def read_rank(path, ascending: bool | None = None, kind: str = RELEVANCE) -> AttributeRank:
    """Read a rank CSV. The direction is inferred from the stored order
    unless given."""
    header, rows = read_csv(path)
    if header[:4] != ["measure", "attribute", "score", "position"]:
        raise ValueError(f"{path}: not a rank file")
    rows = sorted(rows, key=lambda r: int(r[3]))
    entries = [RankEntry(r[1], float(r[2]), int(r[3])) for r in rows]
    if ascending is None:
        s = [e.score for e in entries]
        ascending = len(s) > 1 and s[0] < s[-1]
    measure = rows[0][0] if rows else ""
    return AttributeRank(measure, entries, ascending, kind)
