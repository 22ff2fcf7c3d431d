"""Exhaustive-enumeration ground truth for tiny instances.

These routines are deliberately independent of the solver and p-center
engines: plain subset enumeration with directly evaluated radii. They back
every frozen expected value and equivalence test in the suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .instances import Chain, Instance, Schedule

NESTED_GUARD = 10 ** 8
PCENTER_GUARD = 10 ** 7


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimum_abs: int
    optimum_rel: Optional[Fraction]
    all_optimal_chains_abs: Tuple[Tuple[Tuple[int, ...], ...], ...]
    chain_count: int
    best_chain_abs: Chain
    best_chain_rel: Optional[Chain]


def nested_chain_count(n: int, schedule: Schedule) -> int:
    """Closed-form count of nested chains: prod_h C(n - p^{h-1}, p^h - p^{h-1})."""
    count = 1
    prev = 0
    for p in schedule.p:
        count *= math.comb(n - prev, p - prev)
        prev = p
    return count


def enumerate_pcenter(inst: Instance, p: int) -> Tuple[int, List[Tuple[int, ...]]]:
    """Exhaustive p-center: optimum radius and every optimal facility set."""
    if math.comb(inst.n, p) > PCENTER_GUARD:
        raise OracleTooLarge("instance too large for oracle")
    dist = inst.dist[list(inst.customers), :]
    best = None
    winners: List[Tuple[int, ...]] = []
    for subset in combinations(range(inst.n), p):
        radius = int(dist[:, subset].min(axis=1).max())
        if best is None or radius < best:
            best = radius
            winners = [subset]
        elif radius == best:
            winners.append(subset)
    return best, winners


def enumerate_nested(inst: Instance, schedule: Schedule) -> OracleResult:
    """Evaluate every feasible nested chain under both objectives."""
    schedule.validate_for(inst)
    total = nested_chain_count(inst.n, schedule)
    if total > NESTED_GUARD:
        raise OracleTooLarge("instance too large for oracle")

    d_star = [enumerate_pcenter(inst, p)[0] for p in schedule.p]
    rel_defined = all(d > 0 for d in d_star)

    dist = inst.dist[list(inst.customers), :]
    n = inst.n
    H = schedule.H
    counts = [0]

    best_abs: Optional[int] = None
    winners_abs: List[Tuple[Tuple[int, ...], ...]] = []
    best_rel: Optional[Fraction] = None
    winner_rel: Optional[Tuple[Tuple[int, ...], ...]] = None

    radii = [0] * H
    sets: List[Tuple[int, ...]] = [()] * H

    def complete_period(h: int, members: Tuple[int, ...], covdist: np.ndarray) -> None:
        nonlocal best_abs, best_rel, winner_rel
        radii[h] = int(covdist.max())
        sets[h] = members
        if h + 1 < H:
            grow(h + 1, members, covdist, -1, schedule.p[h + 1] - schedule.p[h])
            return
        counts[0] += 1
        value = sum(radii)
        chain_sets = tuple(sets)
        if best_abs is None or value < best_abs:
            best_abs = value
            winners_abs.clear()
            winners_abs.append(chain_sets)
        elif value == best_abs:
            winners_abs.append(chain_sets)
        if rel_defined:
            regret = max(Fraction(r - d, d) for r, d in zip(radii, d_star))
            if best_rel is None or regret < best_rel:
                best_rel = regret
                winner_rel = chain_sets

    def grow(h: int, members: Tuple[int, ...], covdist: np.ndarray, last: int, slots: int) -> None:
        if slots == 0:
            complete_period(h, members, covdist)
            return
        for j in range(last + 1, n - slots + 1):
            if j in members:
                continue
            grow(h, members + (j,), np.minimum(covdist, dist[:, j]), j, slots - 1)

    start = np.full(len(inst.customers), np.iinfo(np.int64).max, dtype=np.int64)
    grow(0, (), start, -1, schedule.p[0])

    canonical = tuple(sorted(tuple(tuple(sorted(s)) for s in w) for w in winners_abs))
    best_chain_abs = Chain.from_sets(inst, canonical[0])
    best_chain_rel = Chain.from_sets(inst, winner_rel) if winner_rel is not None else None
    assert counts[0] == total
    return OracleResult(
        optimum_abs=int(best_abs),
        optimum_rel=best_rel,
        all_optimal_chains_abs=canonical,
        chain_count=counts[0],
        best_chain_abs=best_chain_abs,
        best_chain_rel=best_chain_rel,
    )


def random_grid_instance(n: int, seed: int, coord_range: int = 50) -> Instance:
    """Seeded instance: integer grid points with rounded Euclidean distances.

    Points are drawn without replacement so distances between distinct points
    are positive; the metric matches the TSPLIB rounding convention.
    """
    rng = np.random.RandomState(seed)
    cells = coord_range * coord_range
    if n > cells:
        raise ValueError("grid too small for distinct points")
    flat = rng.choice(cells, size=n, replace=False)
    pts = np.stack([flat // coord_range, flat % coord_range], axis=1).astype(np.float64)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.floor(np.sqrt((diff ** 2).sum(axis=2)) + 0.5).astype(np.int64)
    return Instance.from_matrix(f"grid-n{n}-s{seed}", dist, triangle_slack=1)
