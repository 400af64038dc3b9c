"""Fuzzy discernibility clauses and all-reducts search-space reduction.

For every unordered provider pair with different decision labels, a clause
records each attribute's discernibility degree: normalized absolute
difference for numeric attributes, crisp 0/1 inequality for categorical
levels. Degrees aggregate by bounded sum (capped at 1); a clause is kept,
and an attribute subset satisfies it, when the capped sum reaches the
precision threshold 1 - alpha. A reduct is an inclusion-minimal subset
satisfying every kept clause.

Degenerate inputs (no kept clauses, or threshold 0 at alpha = 1) yield a
single reduct equal to the full attribute set, so downstream projection
falls back to the unreduced system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import TooManyAttributes, ValidationError
from .model import (
    AttributeSpec,
    DecisionSystem,
    DefinitionDocument,
    FuzzyDegree,
    InformationSystem,
    min_max_normalize,
)

# Absolute slack for threshold comparisons, shared by the keep rule, the
# subset-satisfaction predicate, the enumerator, and the brute-force oracle,
# so that differing float summation orders cannot disagree.
THRESHOLD_SLACK = 1e-12

DEFAULT_MAX_ATTRIBUTES = 24
ORACLE_MAX_ATTRIBUTES = 14

_ACTIVE_LIMIT = 2048  # clause working-set size before lazy activation kicks in


@dataclass(frozen=True)
class ReductConfig:
    alpha: float = 0.15
    max_attributes: int = DEFAULT_MAX_ATTRIBUTES

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha out of [0,1]: {self.alpha}")


@dataclass(frozen=True)
class FuzzyClause:
    pair: tuple[str, str]
    degrees: Mapping[str, FuzzyDegree]


@dataclass(frozen=True)
class Reduct:
    attributes: frozenset[str]

    def sorted_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.attributes))


@dataclass(frozen=True)
class ClauseSet:
    """Kept clauses in matrix form: one row per pair, one column per attribute."""

    attributes: tuple[str, ...]
    threshold: float
    pairs: tuple[tuple[str, str], ...]
    degrees: np.ndarray = field(repr=False)

    @property
    def clauses(self) -> tuple[FuzzyClause, ...]:
        return tuple(
            FuzzyClause(pair=pair, degrees=dict(zip(self.attributes, row)))
            for pair, row in zip(self.pairs, self.degrees)
        )


def pair_discernibility(spec: AttributeSpec, x: float, y: float) -> FuzzyDegree:
    """Degree to which one attribute tells two providers apart.

    Numeric inputs are expected min-max normalized; categorical inputs are
    raw levels compared crisply.
    """
    if spec.is_categorical:
        return 0.0 if int(x) == int(y) else 1.0
    return abs(x - y)


def _meets(sums: np.ndarray | float, threshold: float):
    return np.minimum(sums, 1.0) >= threshold - THRESHOLD_SLACK


def build_clause_set(ds: DecisionSystem, config: ReductConfig = ReductConfig()) -> ClauseSet:
    """One clause per differently-labeled pair, filtered by the keep rule."""
    base = ds.base
    names = base.attribute_names
    raw = base.matrix()
    norm = min_max_normalize(base).values
    categorical = np.array([s.is_categorical for s in base.schema])
    labels = np.array([ds.labels[pid] for pid in base.provider_ids])

    i_idx, j_idx = np.triu_indices(len(base.providers), k=1)
    differ = labels[i_idx] != labels[j_idx]
    i_idx, j_idx = i_idx[differ], j_idx[differ]

    numeric_deg = np.abs(norm[i_idx] - norm[j_idx])
    categorical_deg = (raw[i_idx] != raw[j_idx]).astype(float)
    degrees = np.where(categorical, categorical_deg, numeric_deg)

    threshold = 1.0 - config.alpha
    kept = _meets(degrees.sum(axis=1), threshold)
    ids = base.provider_ids
    pairs = tuple(
        (ids[i], ids[j]) for i, j in zip(i_idx[kept], j_idx[kept])
    )
    return ClauseSet(
        attributes=names,
        threshold=threshold,
        pairs=pairs,
        degrees=degrees[kept].astype(float),
    )


def subset_satisfies(clause: FuzzyClause, subset: Iterable[str], threshold: float) -> bool:
    """Bounded-sum satisfaction of one clause by an attribute subset."""
    total = sum(clause.degrees.get(name, 0.0) for name in set(subset))
    return bool(_meets(total, threshold))


class _MaskBag:
    """Growable set of bitmasks with a vectorized subset query."""

    def __init__(self, seeds: Iterable[int] = ()):
        seeds = list(seeds)
        self._buf = np.empty(max(64, 2 * len(seeds)), dtype=np.int64)
        self._n = len(seeds)
        if seeds:
            self._buf[: self._n] = seeds

    def add(self, mask: int) -> None:
        if self._n == len(self._buf):
            self._buf = np.concatenate([self._buf, np.empty_like(self._buf)])
        self._buf[self._n] = mask
        self._n += 1

    def contains_subset_of(self, mask: int) -> bool:
        if not self._n:
            return False
        return bool(((self._buf[: self._n] & ~np.int64(mask)) == 0).any())


def _minimal_masks(masks: Iterable[int]) -> list[int]:
    kept = _MaskBag()
    out: list[int] = []
    for mask in sorted(set(masks), key=lambda v: (bin(v).count("1"), v)):
        if not kept.contains_subset_of(mask):
            kept.add(mask)
            out.append(mask)
    return out


def _search_minimal(
    degrees: np.ndarray, threshold: float, seeds: Sequence[int] = ()
) -> list[int]:
    """New inclusion-minimal attribute bitmasks satisfying every clause row.

    Branch and bound: clauses ordered hardest first; branching on the first
    unsatisfied clause's positive-degree attributes with ordered exclusion,
    pruning supersets of already-found covers and infeasible branches.
    ``seeds`` are known covers whose subtrees are pruned and not re-reported.
    """
    n_clauses, m = degrees.shape
    order = np.argsort(degrees.sum(axis=1), kind="stable")
    rows = degrees[order]
    cols = [np.ascontiguousarray(rows[:, j]) for j in range(m)]
    full = (1 << m) - 1
    found = _MaskBag(seeds)
    new: list[int] = []

    def search(mask: int, banned: int, sums: np.ndarray) -> None:
        if found.contains_subset_of(mask):
            return
        sat = _meets(sums, threshold)
        if sat.all():
            found.add(mask)
            new.append(mask)
            return
        branch = int(np.argmin(sat))
        row = rows[branch]
        allowed = full & ~banned & ~mask
        candidates = [j for j in range(m) if (allowed >> j) & 1 and row[j] > 0.0]
        if not _meets(sums[branch] + sum(row[j] for j in candidates), threshold):
            return
        candidates.sort(key=lambda j: -row[j])
        blocked = banned
        for j in candidates:
            search(mask | (1 << j), blocked, sums + cols[j])
            blocked |= 1 << j

    search(0, 0, np.zeros(n_clauses))
    return _minimal_masks(new)


def _minimal_covers(degrees: np.ndarray, threshold: float) -> list[int]:
    """Minimal covers of the full clause set, via lazy clause activation.

    Search runs over the hardest clauses first; a candidate violating an
    inactive clause pulls that clause into the working set, while verified
    candidates are confirmed and seed later rounds, until every new
    candidate verifies against the full matrix.
    """
    n_clauses, m = degrees.shape
    if n_clauses <= _ACTIVE_LIMIT:
        return _search_minimal(degrees, threshold)
    hardness = np.argsort(degrees.sum(axis=1), kind="stable")
    active = set(int(i) for i in hardness[:_ACTIVE_LIMIT])
    confirmed: list[int] = []
    while True:
        index = np.fromiter(sorted(active), dtype=int)
        candidates = _search_minimal(degrees[index], threshold, seeds=confirmed)
        grew = False
        for mask in candidates:
            chosen = [j for j in range(m) if (mask >> j) & 1]
            sums = degrees[:, chosen].sum(axis=1)
            violated = np.nonzero(~np.asarray(_meets(sums, threshold)))[0]
            if violated.size:
                active.add(int(violated[np.argmin(sums[violated])]))
                grew = True
            else:
                confirmed.append(mask)
        if not grew:
            return _minimal_masks(confirmed)


def _masks_to_reducts(masks: Iterable[int], attributes: Sequence[str]) -> frozenset[Reduct]:
    return frozenset(
        Reduct(frozenset(attributes[j] for j in range(len(attributes)) if (mask >> j) & 1))
        for mask in masks
    )


def enumerate_all_reducts(
    cs: ClauseSet, max_attributes: int = DEFAULT_MAX_ATTRIBUTES
) -> frozenset[Reduct]:
    """Every minimal attribute subset satisfying all kept clauses.

    Fallback: an empty kept-clause set or a zero threshold yields exactly one
    reduct, the full conditional attribute set.
    """
    m = len(cs.attributes)
    if m > max_attributes:
        raise TooManyAttributes(f"{m} attributes exceeds the guard of {max_attributes}")
    if cs.degrees.shape[0] == 0 or cs.threshold <= 0.0:
        return frozenset({Reduct(frozenset(cs.attributes))})
    masks = _minimal_covers(cs.degrees, cs.threshold)
    return _masks_to_reducts(masks, cs.attributes)


def brute_force_reducts_oracle(
    cs: ClauseSet, max_attributes: int = ORACLE_MAX_ATTRIBUTES
) -> frozenset[Reduct]:
    """Independent oracle: check all 2^m subsets, keep the minimal satisfying ones."""
    m = len(cs.attributes)
    if m > max_attributes:
        raise TooManyAttributes(f"{m} attributes exceeds the oracle guard of {max_attributes}")
    if cs.degrees.shape[0] == 0 or cs.threshold <= 0.0:
        return frozenset({Reduct(frozenset(cs.attributes))})
    all_masks = np.arange(1 << m, dtype=np.int64)
    membership = ((all_masks[:, None] >> np.arange(m)) & 1).astype(float)
    sums = membership @ cs.degrees.T
    satisfying = all_masks[np.asarray(_meets(sums, cs.threshold)).all(axis=1)]
    return _masks_to_reducts(_minimal_masks(int(v) for v in satisfying), cs.attributes)


def select_best_reduct(
    reducts: Iterable[Reduct],
    request: DefinitionDocument,
    schema: Sequence[AttributeSpec],
) -> Reduct:
    """Most user-overlapping reduct; ties prefer more dynamic attributes,
    then the lexicographically smallest sorted name list."""
    pool = list(reducts)
    if not pool:
        raise ValueError("no reducts to select from")
    requested = request.attributes
    dynamic = {s.name for s in schema if s.is_dynamic}

    def key(reduct: Reduct):
        overlap = len(reduct.attributes & requested)
        dyn = len(reduct.attributes & dynamic)
        return (-overlap, -dyn, reduct.sorted_names())

    return min(pool, key=key)


def project_to_rds(ds: DecisionSystem, reduct: Reduct) -> DecisionSystem:
    """Restrict to the reduct's attributes plus any missing network-layer ones."""
    keep = set(reduct.attributes) | {s.name for s in ds.base.schema if s.network_layer}
    schema = tuple(s for s in ds.base.schema if s.name in keep)
    providers = tuple(
        type(p)(
            id=p.id,
            display_name=p.display_name,
            values={s.name: p.values[s.name] for s in schema},
        )
        for p in ds.base.providers
    )
    return DecisionSystem(
        base=InformationSystem(schema=schema, providers=providers),
        labels=dict(ds.labels),
    )
