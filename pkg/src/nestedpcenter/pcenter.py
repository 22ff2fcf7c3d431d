"""Exact p-center solver: binary search over distinct distances with an
exact set-cover decision engine.

The cover engine works on customer bitmasks (arbitrary-precision ints), with
a greedy cover for fast feasible answers, a scattered-customer bound for fast
infeasible answers, and branch-and-bound over the covering facilities of the
most constrained customer in between.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .instances import Instance

UNKNOWN = object()  # cover search gave up under a node cap; not proof of either answer


@dataclass(frozen=True)
class CoverProblem:
    """Decision subproblem: cover ``universe`` within ``radius`` using at most
    ``budget`` facilities from ``allowed``, ``forced`` of which are pre-opened."""

    radius: int
    universe: Tuple[int, ...]
    allowed: Tuple[int, ...]
    forced: Tuple[int, ...] = ()
    budget: int = 1

    def __post_init__(self):
        if not set(self.forced) <= set(self.allowed):
            raise ValueError("forced facilities must be allowed")
        if len(self.forced) > self.budget:
            raise ValueError("forced facilities exceed the budget")


def _cover_cache(inst: Instance) -> Dict[int, List[int]]:
    cache = getattr(inst, "_cover_masks", None)
    if cache is None:
        cache = {}
        object.__setattr__(inst, "_cover_masks", cache)
    return cache


def _masks_at(inst: Instance, radius: int) -> List[int]:
    """Per-facility bitmask of customer positions covered within ``radius``."""
    cache = _cover_cache(inst)
    masks = cache.get(radius)
    if masks is None:
        within = inst.dist[list(inst.customers), :] <= radius
        masks = []
        for j in range(inst.n):
            bits = 0
            for pos in np.flatnonzero(within[:, j]):
                bits |= 1 << int(pos)
            masks.append(bits)
        cache[radius] = masks
    return masks


def _customer_positions(inst: Instance, universe: Sequence[int]) -> List[int]:
    pos_of = {c: k for k, c in enumerate(inst.customers)}
    try:
        return [pos_of[c] for c in universe]
    except KeyError as exc:
        raise ValueError(f"universe member {exc.args[0]} is not a customer") from None


def scatter_count(
    inst: Instance,
    candidates: np.ndarray,
    radius: int,
    key: np.ndarray,
    limit: int,
) -> int:
    """Greedy count of pairwise-unshareable customers among ``candidates``.

    Customers farther apart than ``2*radius + triangle_slack`` cannot share a
    facility, so the count lower-bounds how many facilities any cover at
    ``radius`` needs for them. Stops early once ``limit`` is exceeded;
    ``candidates``/``key`` are indexed by customer position.
    """
    cand = candidates.copy()
    if not cand.any():
        return 0
    cc = _customer_submatrix(inst)
    threshold = 2 * radius + inst.triangle_slack
    count = 0
    while cand.any():
        c = int(np.flatnonzero(cand)[np.argmax(key[cand])])
        count += 1
        if count > limit:
            return count
        cand &= cc[c] > threshold
    return count


def _customer_submatrix(inst: Instance) -> np.ndarray:
    sub = getattr(inst, "_cust_dist", None)
    if sub is None:
        idx = list(inst.customers)
        sub = inst.dist[np.ix_(idx, idx)]
        object.__setattr__(inst, "_cust_dist", sub)
    return sub


def cover_feasible(
    inst: Instance,
    problem: CoverProblem,
    max_nodes: Optional[int] = None,
):
    """Exact feasibility check for a CoverProblem.

    Returns a covering facility set, None if provably infeasible, or UNKNOWN
    when ``max_nodes`` cut the search short (only meaningful for callers that
    use this as a bound primitive; the default is exhaustive).
    """
    masks = _masks_at(inst, problem.radius)
    positions = _customer_positions(inst, problem.universe)
    universe_mask = 0
    for pos in positions:
        universe_mask |= 1 << pos

    forced = sorted(set(problem.forced))
    covered = 0
    for j in forced:
        covered |= masks[j]
    slots = problem.budget - len(forced)
    uncovered = universe_mask & ~covered
    if uncovered == 0:
        return set(forced)

    allowed = sorted(set(problem.allowed) - set(forced))
    cand_masks = {j: masks[j] & universe_mask for j in allowed}

    # any uncovered customer with no allowed facility in range settles it
    reachable = covered
    for j in allowed:
        reachable |= cand_masks[j]
    if uncovered & ~reachable:
        return None
    if slots == 0:
        return None

    # greedy upper bound: max new coverage, lowest index on ties
    g_covered, picks = covered, []
    for _ in range(slots):
        best_j, best_gain = -1, 0
        for j in allowed:
            if j in picks:
                continue
            gain = (cand_masks[j] & ~g_covered).bit_count()
            if gain > best_gain:
                best_gain, best_j = gain, j
        if best_j < 0:
            break
        picks.append(best_j)
        g_covered |= cand_masks[best_j]
        if universe_mask & ~g_covered == 0:
            return set(forced) | set(picks)

    # scatter bound: quick proof of infeasibility
    cand = np.zeros(len(inst.customers), dtype=bool)
    for pos in positions:
        if (uncovered >> pos) & 1:
            cand[pos] = True
    key = _far_key(inst, forced, cand)
    if scatter_count(inst, cand, problem.radius, key, slots) > slots:
        return None

    # branch on the covering facilities of the most constrained customer
    coverers: Dict[int, List[int]] = {}
    for pos in positions:
        coverers[pos] = [j for j in allowed if (cand_masks[j] >> pos) & 1]

    nodes = [0]

    def recurse(covered_bits: int, chosen: Tuple[int, ...], left: int):
        open_bits = universe_mask & ~covered_bits
        if open_bits == 0:
            return set(forced) | set(chosen)
        if left == 0:
            return None
        if max_nodes is not None and nodes[0] > max_nodes:
            return UNKNOWN
        nodes[0] += 1
        # cheapest-to-cover customer; also a packing prune on best coverage
        best_pos, best_opts = -1, None
        max_new = 0
        for j in allowed:
            gain = (cand_masks[j] & open_bits).bit_count()
            if gain > max_new:
                max_new = gain
        if max_new * left < open_bits.bit_count():
            return None
        bits = open_bits
        while bits:
            pos = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            opts = [j for j in coverers[pos] if j not in chosen]
            if not opts:
                return None
            if best_opts is None or len(opts) < len(best_opts):
                best_pos, best_opts = pos, opts
                if len(opts) == 1:
                    break
        saw_unknown = False
        for j in best_opts:
            res = recurse(covered_bits | cand_masks[j], chosen + (j,), left - 1)
            if res is UNKNOWN:
                saw_unknown = True
            elif res is not None:
                return res
        return UNKNOWN if saw_unknown else None

    return recurse(covered, (), slots)


def _far_key(inst: Instance, forced: Sequence[int], cand: np.ndarray) -> np.ndarray:
    """Scatter seed order: prefer customers far from the forced facilities."""
    if forced:
        sub = inst.dist[np.ix_(list(inst.customers), list(forced))]
        return sub.min(axis=1)
    return _customer_submatrix(inst).sum(axis=1)


def solve_pcenter(
    inst: Instance,
    p: int,
    lb_hint: int = 0,
    ub_hint: Optional[int] = None,
) -> Tuple[int, Tuple[int, ...]]:
    """Exact p-center optimum and a witness set of exactly ``p`` facilities.

    Binary search over the distinct distances restricted to
    ``[lb_hint, ub_hint]``; the hints must bracket the optimum.
    """
    if not (1 <= p <= inst.n):
        raise ValueError("p out of range")
    distinct = inst.distinct
    if ub_hint is None:
        ub_hint = distinct[-1]
    lo = bisect_left(distinct, lb_hint)
    hi = bisect_right(distinct, ub_hint) - 1
    if lo > hi:
        raise ValueError("hints exclude every candidate radius")

    all_sites = tuple(range(inst.n))
    witness: Dict[int, Set[int]] = {}

    def feasible(k: int) -> bool:
        res = cover_feasible(
            inst,
            CoverProblem(
                radius=distinct[k],
                universe=inst.customers,
                allowed=all_sites,
                forced=(),
                budget=p,
            ),
        )
        if res is not None:
            witness[k] = res
            return True
        return False

    if not feasible(hi):
        raise ValueError("ub_hint is below the optimum")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1

    chosen = sorted(witness[hi])
    for j in range(inst.n):
        if len(chosen) == p:
            break
        if j not in witness[hi]:
            chosen.append(j)
    return distinct[hi], tuple(sorted(chosen))


def solve_pcenter_sequence(
    inst: Instance, schedule
) -> List[Tuple[int, Tuple[int, ...]]]:
    """p-center optima for all periods, solved with decreasing p so each
    optimum seeds the lower bound of the next (smaller-p) solve."""
    results: Dict[int, Tuple[int, Tuple[int, ...]]] = {}
    lb = 0
    for h in sorted(range(schedule.H), key=lambda h: -schedule.p[h]):
        p = schedule.p[h]
        if p in {schedule.p[g] for g in results}:
            prev = next(g for g in results if schedule.p[g] == p)
            results[h] = results[prev]
            continue
        d, wit = solve_pcenter(inst, p, lb_hint=lb)
        results[h] = (d, wit)
        lb = d
    return [results[h] for h in range(schedule.H)]


def critical_radius(
    inst: Instance,
    customer: int,
    facility_scores: Union[Mapping[int, float], Sequence[float]],
) -> int:
    """Distance at which the cumulative facility score first reaches one.

    Facilities are scanned in ascending distance from ``customer`` (index on
    ties); the returned distance anchors the most violated coverage
    inequality for that customer.
    """
    if isinstance(facility_scores, Mapping):
        scores = np.zeros(inst.n)
        for j, s in facility_scores.items():
            scores[j] = s
    else:
        scores = np.asarray(facility_scores, dtype=np.float64)
    if (scores < 0).any():
        raise ValueError("scores must be non-negative")
    if scores.sum() < 1.0 - 1e-9:
        raise ValueError("total score below one: no critical facility exists")
    row = inst.dist[customer]
    order = sorted(range(inst.n), key=lambda j: (row[j], j))
    total = 0.0
    for j in order:
        total += scores[j]
        if total >= 1.0 - 1e-9:
            return int(row[j])
    raise AssertionError("unreachable: total score checked above")
