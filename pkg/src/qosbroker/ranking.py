"""Two-level weights, ideal-vector targets, and weighted-Euclidean ranking.

System weights split 0.67 across the requested-and-present attributes and
0.33 across the remaining reduced-system attributes (a single non-empty
group takes the whole unit); user weights multiply onto requested
attributes. Weighted values are raw values times the combined weight. The
target vector takes the user's weighted request value for requested
attributes, zero for non-requested lower-better attributes, and the best
weighted observation for non-requested higher-better ones. A provider's
score is the Euclidean distance of its weighted row from the target vector;
smaller is better.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyRDS
from .model import DecisionSystem, DefinitionDocument, InformationSystem, LOWER_BETTER

REQUESTED_SHARE = 0.67
OTHER_SHARE = 0.33
SCORE_TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightEntry:
    system_weight: float
    user_weight: float | None = None

    @property
    def combined(self) -> float:
        return self.system_weight * (1.0 if self.user_weight is None else self.user_weight)


@dataclass(frozen=True)
class WeightTable:
    entries: Mapping[str, WeightEntry]  # keyed by attribute, RDS order
    requested: frozenset[str]  # requested-and-present attributes

    def combined(self, attribute: str) -> float:
        return self.entries[attribute].combined


@dataclass(frozen=True)
class WeightedTable:
    attributes: tuple[str, ...]
    provider_ids: tuple[str, ...]
    display_names: Mapping[str, str]
    values: np.ndarray  # providers x attributes, raw * combined weight
    target_vector: np.ndarray
    dynamic_attributes: frozenset[str]

    @property
    def rows(self) -> dict[str, dict[str, float]]:
        return {
            pid: dict(zip(self.attributes, self.values[i]))
            for i, pid in enumerate(self.provider_ids)
        }

    @property
    def targets(self) -> dict[str, float]:
        return dict(zip(self.attributes, self.target_vector))


@dataclass(frozen=True)
class RankedEntry:
    provider_id: str
    display_name: str
    score: float
    rank: int
    tiebreak_trail: tuple[str, ...]


def _rds_base(rds: DecisionSystem | InformationSystem) -> InformationSystem:
    return rds.base if isinstance(rds, DecisionSystem) else rds


def assign_weights(
    rds: DecisionSystem | InformationSystem, request: DefinitionDocument
) -> WeightTable:
    """System weights per the 0.67/0.33 split, times user weights where given."""
    base = _rds_base(rds)
    names = base.attribute_names
    if not names:
        raise EmptyRDS("reduced system has no attributes")
    requested = [n for n in names if n in request.attributes]
    others = [n for n in names if n not in request.attributes]
    if requested and others:
        requested_w = REQUESTED_SHARE / len(requested)
        other_w = OTHER_SHARE / len(others)
    else:
        requested_w = 1.0 / len(requested) if requested else 0.0
        other_w = 1.0 / len(others) if others else 0.0
    entries = {}
    for name in names:
        if name in request.attributes:
            entries[name] = WeightEntry(requested_w, request.weight(name))
        else:
            entries[name] = WeightEntry(other_w, None)
    return WeightTable(entries=entries, requested=frozenset(requested))


def build_weighted_table(
    rds: DecisionSystem | InformationSystem,
    weights: WeightTable,
    request: DefinitionDocument,
) -> WeightedTable:
    """Weighted value matrix (raw values, not normalized) plus the target vector."""
    base = _rds_base(rds)
    names = base.attribute_names
    combined = np.array([weights.combined(n) for n in names])
    values = base.matrix() * combined
    targets = np.empty(len(names))
    for j, name in enumerate(names):
        if name in weights.requested:
            targets[j] = request.value(name) * combined[j]
        elif base.spec(name).direction == LOWER_BETTER:
            targets[j] = 0.0
        else:
            targets[j] = values[:, j].max()
    return WeightedTable(
        attributes=names,
        provider_ids=base.provider_ids,
        display_names={p.id: p.display_name for p in base.providers},
        values=values,
        target_vector=targets,
        dynamic_attributes=frozenset(s.name for s in base.schema if s.is_dynamic),
    )


def compute_score(row: Mapping[str, float], targets: Mapping[str, float]) -> float:
    """Euclidean distance between a weighted provider row and the target vector."""
    if set(row) != set(targets):
        raise ValueError("row and targets must share one attribute set")
    return math.sqrt(sum((row[a] - targets[a]) ** 2 for a in row))


def _trail_groups(scores: np.ndarray, order: list[int]) -> list[list[int]]:
    groups: list[list[int]] = []
    for pos in order:
        if groups and abs(scores[pos] - scores[groups[-1][-1]]) <= SCORE_TIE_TOLERANCE:
            groups[-1].append(pos)
        else:
            groups.append([pos])
    return groups


def rank_providers(table: WeightedTable) -> list[RankedEntry]:
    """Ascending-score order; ties fall back to the dynamic-only score, then id.

    Each entry's tiebreak_trail records the rules that were needed to place it.
    """
    if not table.provider_ids:
        raise ValueError("cannot rank an empty table")
    deltas = table.values - table.target_vector
    scores = np.sqrt((deltas**2).sum(axis=1))
    dyn_cols = [j for j, a in enumerate(table.attributes) if a in table.dynamic_attributes]
    dyn_scores = np.sqrt((deltas[:, dyn_cols] ** 2).sum(axis=1))

    by_score = sorted(range(len(scores)), key=lambda i: scores[i])
    entries: list[tuple[int, tuple[str, ...]]] = []
    for group in _trail_groups(scores, by_score):
        if len(group) == 1:
            entries.append((group[0], ("score",)))
            continue
        group.sort(key=lambda i: (dyn_scores[i], table.provider_ids[i]))
        for sub in _trail_groups(dyn_scores, group):
            trail = ("score", "dynamic_qos_score")
            if len(sub) > 1:
                trail += ("provider_id",)
            for i in sub:
                entries.append((i, trail))

    return [
        RankedEntry(
            provider_id=table.provider_ids[i],
            display_name=table.display_names[table.provider_ids[i]],
            score=float(scores[i]),
            rank=rank,
            tiebreak_trail=trail,
        )
        for rank, (i, trail) in enumerate(entries, start=1)
    ]


def ranked_list_to_json(entries: Sequence[RankedEntry]) -> str:
    return json.dumps(
        [
            {
                "provider_id": e.provider_id,
                "name": e.display_name,
                "score": round(e.score, 6),
                "rank": e.rank,
                "tiebreak_trail": list(e.tiebreak_trail),
            }
            for e in entries
        ],
        indent=2,
    )


def ranked_list_to_csv(entries: Sequence[RankedEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["provider_id", "name", "score", "rank", "tiebreak_trail"])
    for e in entries:
        writer.writerow(
            [e.provider_id, e.display_name, f"{e.score:.6f}", e.rank,
             "|".join(e.tiebreak_trail)]
        )
    return buf.getvalue()
