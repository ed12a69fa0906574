"""Pareto machinery shared by both optimizers.

Pure functions over bi-objective minimization points:

- ``dominates``: scalar Pareto dominance check
- ``non_dominated_sort``: partition a population into successive
  non-dominated fronts (with per-individual rank and crowding distance)
- ``crowding_distance``: per-front diversity measure
- ``hypervolume_2d``: exact dominated area bounded by a reference point
- ``truncate_by_crowding``: diversity-preserving front truncation

All operations are pure functions of their inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

#: A bi-objective value: (classification error, selected-feature ratio),
#: both minimized, both in [0, 1].
ObjectivePair = tuple[float, float]


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Check whether objective vector ``a`` Pareto-dominates ``b``.

    Minimization on every objective: ``a`` dominates ``b`` iff ``a`` is no
    worse on all objectives and strictly better on at least one.  The
    relation is irreflexive and antisymmetric; equal vectors never dominate
    each other.
    """
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def _dominance_matrix(objectives: np.ndarray) -> np.ndarray:
    """Pairwise dominance: result[i, j] is True iff i dominates j."""
    a = objectives[:, np.newaxis, :]
    b = objectives[np.newaxis, :, :]
    return np.all(a <= b, axis=2) & np.any(a < b, axis=2)


@dataclass(frozen=True)
class RankedPopulation:
    """Non-dominated sorting result.

    ``fronts[0]`` holds the indices of the individuals dominated by nobody;
    ``fronts[r]`` is the non-dominated set after removing fronts ``0..r-1``.
    Indices within a front keep their input order.  ``rank[i]`` is the front
    index of individual ``i`` and ``crowding[i]`` its crowding distance
    within that front (``inf`` for per-objective boundary individuals).
    """

    fronts: list[list[int]]
    rank: np.ndarray
    crowding: np.ndarray


def non_dominated_sort(objectives) -> RankedPopulation:
    """Sort a population into non-dominated fronts.

    Args:
        objectives: array-like of shape (n, 2) (any number of objectives
            works) holding one objective vector per individual.

    Returns:
        A :class:`RankedPopulation`.  Every individual appears in exactly
        one front; individuals within a front are mutually non-dominated.

    Raises:
        ValueError: on an empty population.
    """
    objs = np.asarray(objectives, dtype=np.float64)
    if objs.ndim == 1:
        objs = objs.reshape(0, 2) if objs.size == 0 else objs.reshape(1, -1)
    n = objs.shape[0]
    if n == 0:
        raise ValueError("empty population")

    dom = _dominance_matrix(objs)
    # domination_count[i]: number of individuals currently dominating i
    domination_count = dom.sum(axis=0)

    rank = np.full(n, -1, dtype=np.int64)
    fronts: list[list[int]] = []
    remaining = np.arange(n)
    level = 0
    while remaining.size:
        in_front = domination_count[remaining] == 0
        members = remaining[in_front]
        rank[members] = level
        fronts.append(members.tolist())
        remaining = remaining[~in_front]
        if remaining.size:
            domination_count[remaining] -= dom[np.ix_(members, remaining)].sum(axis=0)
        level += 1

    crowding = np.empty(n, dtype=np.float64)
    for members in fronts:
        crowding[members] = crowding_distance(objs[members])
    return RankedPopulation(fronts=fronts, rank=rank, crowding=crowding)


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each individual within one front.

    For each objective the front is sorted by that objective; the two
    boundary individuals receive an infinite sentinel and interior
    individuals accumulate ``(next - prev) / (max - min)``.  An objective
    with ``max == min`` contributes 0 to every individual, keeping the
    measure finite and sort-stable on degenerate fronts.

    The caller guarantees the front is mutually non-dominated; this is not
    checked.  Fronts of size 1 or 2 are all-boundary (every distance
    infinite).

    Raises:
        ValueError: on an empty front.
    """
    objs = np.asarray(front, dtype=np.float64)
    if objs.ndim == 1 and objs.size:
        objs = objs.reshape(1, -1)
    n = objs.shape[0]
    if n == 0:
        raise ValueError("empty front")
    if n <= 2:
        return np.full(n, np.inf)

    distances = np.zeros(n, dtype=np.float64)
    for m in range(objs.shape[1]):
        order = np.argsort(objs[:, m], kind="stable")
        lo = objs[order[0], m]
        hi = objs[order[-1], m]
        distances[order[0]] = np.inf
        distances[order[-1]] = np.inf
        if hi > lo:
            gaps = (objs[order[2:], m] - objs[order[:-2], m]) / (hi - lo)
            distances[order[1:-1]] += gaps
    return distances


def hypervolume_2d(front, ref: Sequence[float] = (1.0, 1.0)) -> float:
    """Exact area dominated by a 2-D front, bounded by ``ref``.

    The result is the area of the union of rectangles
    ``[f1_i, ref1] x [f2_i, ref2]``, computed by sorting the surviving
    non-dominated points by the first objective and summing disjoint
    strips.  Points at or beyond the reference on either objective are
    clipped to zero area rather than rejected.  An empty front has
    hypervolume 0.
    """
    ref1, ref2 = float(ref[0]), float(ref[1])
    objs = np.asarray(front, dtype=np.float64)
    if objs.size == 0:
        return 0.0
    if objs.ndim == 1:
        objs = objs.reshape(1, -1)

    inside = (objs[:, 0] < ref1) & (objs[:, 1] < ref2)
    objs = objs[inside]
    if objs.shape[0] == 0:
        return 0.0

    order = np.lexsort((objs[:, 1], objs[:, 0]))
    area = 0.0
    prev_x: float | None = None
    prev_y = ref2
    for i in order:
        x, y = objs[i]
        if y >= prev_y:
            continue  # dominated: adds no area
        if prev_x is not None:
            area += (x - prev_x) * (ref2 - prev_y)
        prev_x, prev_y = x, y
    area += (ref1 - prev_x) * (ref2 - prev_y)
    return float(area)


def truncate_by_crowding(
    front: Sequence[T],
    n: int,
    key: Callable[[T], Sequence[float]] | None = None,
) -> list[T]:
    """Keep the ``n`` most spread-out members of a mutually non-dominated front.

    Members are ranked by crowding distance (largest first); ties, including
    ties between infinite distances, are broken by input order with the
    earlier index kept.  Kept members are returned in their input order.
    If the front already fits, it is returned unchanged (as a new list).

    Args:
        front: front members; objective pairs themselves, or richer objects
            when ``key`` extracts the pair.
        n: number of members to keep, at least 1.
        key: optional accessor mapping a member to its objective pair.
    """
    if n < 1:
        raise ValueError("truncation size must be at least 1")
    members = list(front)
    if len(members) <= n:
        return members
    objs = [key(m) if key is not None else m for m in members]
    dist = crowding_distance(np.asarray(objs, dtype=np.float64))
    ranked = sorted(range(len(members)), key=lambda i: (-dist[i], i))
    keep = sorted(ranked[:n])
    return [members[i] for i in keep]
