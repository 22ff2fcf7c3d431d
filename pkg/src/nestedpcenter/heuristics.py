"""Starting heuristics that turn per-period p-center solutions into feasible
nested chains, plus the score-based rounding heuristic.

All tie-breaking is total so every heuristic is deterministic: candidates are
compared by resulting radius, then by how many customers sit exactly at that
radius, then by lexicographic facility-set order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .instances import Chain, Instance, Schedule


@dataclass(frozen=True)
class HeuristicResult:
    chain: Chain
    objective_abs: int
    objective_rel: Optional[Fraction]
    source: str


def _finish(
    inst: Instance,
    sets: Sequence[Iterable[int]],
    source: str,
    d_star: Optional[Sequence[int]],
) -> HeuristicResult:
    chain = Chain.from_sets(inst, sets)
    rel = None
    if d_star is not None and all(d > 0 for d in d_star):
        rel = max(Fraction(r - d, d) for r, d in zip(chain.radii, d_star))
    return HeuristicResult(
        chain=chain,
        objective_abs=chain.objective_abs,
        objective_rel=rel,
        source=source,
    )


def _radius_and_tie(inst: Instance, members: Tuple[int, ...]) -> Tuple[int, int]:
    sub = inst.dist[np.ix_(inst.customers, members)]
    nearest = sub.min(axis=1)
    radius = int(nearest.max())
    return radius, int((nearest == radius).sum())


def heuristic_shrink(
    inst: Instance,
    schedule: Schedule,
    jH: Iterable[int],
    d_star: Optional[Sequence[int]] = None,
) -> HeuristicResult:
    """Build the chain backwards from an optimal last-period set, removing the
    facilities whose loss increases the coverage radius least."""
    current = tuple(sorted(set(jH)))
    if len(current) != schedule.p[-1]:
        raise ValueError("starting set must have the last period's cardinality")
    sets: List[Tuple[int, ...]] = [current]
    for h in range(schedule.H - 1, 0, -1):
        delta = schedule.p[h] - schedule.p[h - 1]
        if delta == 0:
            sets.append(current)
            continue
        best = None
        for removal in combinations(current, delta):
            candidate = tuple(j for j in current if j not in removal)
            radius, at_radius = _radius_and_tie(inst, candidate)
            key = (radius, at_radius, candidate)
            if best is None or key < best:
                best = key
        current = best[2]
        sets.append(current)
    sets.reverse()
    return _finish(inst, sets, "shrink", d_star)


def heuristic_grow(
    inst: Instance,
    schedule: Schedule,
    j1: Iterable[int],
    d_star: Optional[Sequence[int]] = None,
) -> HeuristicResult:
    """Build the chain forwards from an optimal first-period set, adding the
    facilities that reduce the coverage radius most."""
    current = tuple(sorted(set(j1)))
    if len(current) != schedule.p[0]:
        raise ValueError("starting set must have the first period's cardinality")
    sets: List[Tuple[int, ...]] = [current]
    for h in range(1, schedule.H):
        delta = schedule.p[h] - schedule.p[h - 1]
        if delta == 0:
            sets.append(current)
            continue
        outside = [j for j in range(inst.n) if j not in current]
        best = None
        for addition in combinations(outside, delta):
            candidate = tuple(sorted(current + addition))
            radius, at_radius = _radius_and_tie(inst, candidate)
            key = (radius, at_radius, candidate)
            if best is None or key < best:
                best = key
        current = best[2]
        sets.append(current)
    return _finish(inst, sets, "grow", d_star)


def heuristic_count(
    inst: Instance,
    schedule: Schedule,
    pc_solutions: Sequence[Iterable[int]],
    d_star: Optional[Sequence[int]] = None,
) -> HeuristicResult:
    """Open the facilities that occur most often across the per-period
    p-center solutions, then grow greedily over their union."""
    if len(pc_solutions) != schedule.H:
        raise ValueError("need one p-center solution per period")
    counts = np.zeros(inst.n, dtype=np.int64)
    union: set = set()
    for sol in pc_solutions:
        for j in set(sol):
            counts[j] += 1
            union.add(j)

    ranked = sorted(range(inst.n), key=lambda j: (-counts[j], j))
    current = sorted(ranked[: schedule.p[0]])

    sets: List[Tuple[int, ...]] = []
    cdist = inst.dist[list(inst.customers), :]
    covdist = cdist[:, current].min(axis=1)

    next_h = 0
    while next_h < schedule.H and schedule.p[next_h] == len(current):
        sets.append(tuple(current))
        next_h += 1

    while next_h < schedule.H:
        pool = [j for j in sorted(union) if j not in current]
        if not pool:
            pool = [j for j in range(inst.n) if j not in current]
        radii = np.minimum(covdist[:, None], cdist[:, pool]).max(axis=0)
        pick = pool[int(np.lexsort((pool, radii))[0])]
        covdist = np.minimum(covdist, cdist[:, pick])
        current = sorted(current + [pick])
        while next_h < schedule.H and schedule.p[next_h] == len(current):
            sets.append(tuple(current))
            next_h += 1
    return _finish(inst, sets, "count", d_star)


def primal_from_scores(
    inst: Instance,
    schedule: Schedule,
    scores,
) -> Chain:
    """Round per-facility, per-period weights into a nested chain by taking
    prefixes of the facilities sorted by total weight (nesting holds by
    construction)."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim == 1:
        totals = arr
    else:
        totals = arr.sum(axis=0)
    if totals.shape != (inst.n,):
        raise ValueError("scores must cover every facility")
    ranked = sorted(range(inst.n), key=lambda j: (-totals[j], j))
    sets = [tuple(sorted(ranked[: schedule.p[h]])) for h in range(schedule.H)]
    return Chain.from_sets(inst, sets)


_SOURCE_ORDER = {"shrink": 0, "count": 1, "grow": 2}


def best_start(
    inst: Instance,
    schedule: Schedule,
    d_star: Sequence[int],
    witnesses: Sequence[Sequence[int]],
    objective: str = "absolute",
) -> HeuristicResult:
    """Run all three starting heuristics and keep the best for the given
    objective; ties go to the earlier source (shrink, count, grow)."""
    if objective not in ("absolute", "relative"):
        raise ValueError("objective must be 'absolute' or 'relative'")
    results = [
        heuristic_shrink(inst, schedule, witnesses[-1], d_star),
        heuristic_count(inst, schedule, witnesses, d_star),
        heuristic_grow(inst, schedule, witnesses[0], d_star),
    ]
    results.sort(key=lambda r: _SOURCE_ORDER[r.source])
    if objective == "relative":
        if any(r.objective_rel is None for r in results):
            raise ValueError("relative objective undefined: some period optimum is zero")
        return min(results, key=lambda r: (r.objective_rel, _SOURCE_ORDER[r.source]))
    return min(results, key=lambda r: (r.objective_abs, _SOURCE_ORDER[r.source]))
