"""Exact branch-and-bound over nested facility chains.

Chains are grown period by period; within a period, facilities are added in
strictly increasing (relabeled) index order so every chain is enumerated
exactly once. Nodes are pruned against the incumbent with three bound layers:
the static per-period p-center lower bounds, an all-remaining-sites coverage
relaxation, and a scattered-customer packing argument, with an exact
constrained cover check near the bottom of each period. Both objectives share
the engine; relative-regret comparisons are exact rationals.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bounds import tighten_relative_lb
from .heuristics import best_start
from .instances import Chain, Instance, Schedule, eval_radius
from .pcenter import (
    CoverProblem,
    cover_feasible,
    scatter_count,
    solve_pcenter_sequence,
)

_BIG = np.int64(2 ** 60)


@dataclass
class SolveOptions:
    setting: str = "PH"  # B: no bounds/heuristics, P: bounds, PH: bounds + start heuristics
    time_limit_s: float = 3600.0
    constrained_bound: bool = True
    constrained_depth: int = 3  # run the exact cover bound with this many open slots or fewer
    cover_node_cap: int = 4000  # node cap per cover check used as a bound (exactness not required there)
    exhaustive: bool = False  # disable pruning entirely; enumerates every chain
    memory_limit_mb: Optional[float] = None
    check_interval: int = 1024


@dataclass(frozen=True)
class SolveReport:
    objective: float
    dual_bound: float
    gap_percent: float
    nodes: int
    time_s: float
    chain: Optional[Chain]
    rc: Optional[float]
    ri: Optional[float]
    status: str  # "optimal" | "time_limit"
    objective_exact: Optional[Fraction] = None
    dual_exact: Optional[Fraction] = None
    d_star: Optional[Tuple[int, ...]] = None
    expanded: int = 0
    first_incumbent: Optional[float] = None


@dataclass(frozen=True)
class SearchNode:
    """A partial chain: periods before ``h_current`` are fixed, the current
    period already contains ``partial`` and may only add higher indices."""

    h_current: int
    fixed_sets: Tuple[Tuple[int, ...], ...]
    partial: Tuple[int, ...]
    last_added: int = -1
    lb_node: Optional[int] = None


class MemoryLimitExceeded(RuntimeError):
    pass


class _TimeUp(Exception):
    pass


def compute_regrets(chain: Chain, d_star: Sequence[int]):
    """Per-period and aggregate regrets of a chain against the standalone
    p-center optima. Relative parts are None when some optimum is zero."""
    abs_pp = [r - d for r, d in zip(chain.radii, d_star)]
    abs_sum = sum(abs_pp)
    if all(d > 0 for d in d_star):
        rel_pp = [Fraction(a, d) for a, d in zip(abs_pp, d_star)]
        rel_max = max(rel_pp)
    else:
        rel_pp, rel_max = None, None
    return abs_pp, abs_sum, rel_pp, rel_max


def compute_rc_ri(
    chain: Chain,
    d_star: Sequence[int],
    pc_witnesses: Sequence[Sequence[int]],
) -> Tuple[Optional[float], float]:
    """Relative cost of nesting and relative increase in open facilities."""
    total = sum(d_star)
    rc = None
    if total > 0:
        rc = float(sum(r - d for r, d in zip(chain.radii, d_star)) / total)
    union = set()
    for w in pc_witnesses:
        union |= set(w)
    p_last = len(chain.sets[-1])
    ri = (len(union) - p_last) / p_last
    return rc, ri


class _ChainSearch:
    """Shared DFS engine; ``mode`` selects the objective."""

    def __init__(
        self,
        inst: Instance,
        schedule: Schedule,
        opts: SolveOptions,
        mode: str,
        LB: Sequence[int],
        d_star: Optional[Sequence[int]],
        incumbent: Optional[Chain],
    ):
        self.inst = inst
        self.schedule = schedule
        self.opts = opts
        self.mode = mode
        self.p = schedule.p
        self.H = schedule.H
        self.LB = list(LB)
        self.d_star = list(d_star) if d_star is not None else None
        self.suffix_LB = [0] * (self.H + 1)
        for h in range(self.H - 1, -1, -1):
            self.suffix_LB[h] = self.suffix_LB[h + 1] + self.LB[h]

        cust = list(inst.customers)
        self.m = len(cust)
        cdist_orig = inst.dist[cust, :]
        # relabel facilities: centrality first, so good chains appear early
        score = cdist_orig.sum(axis=0)
        self.perm = np.array(sorted(range(inst.n), key=lambda j: (score[j], j)))
        self.cdist = np.ascontiguousarray(cdist_orig[:, self.perm])
        n = inst.n
        suffix = np.full((self.m, n + 1), _BIG, dtype=np.int64)
        for q in range(n - 1, -1, -1):
            suffix[:, q] = np.minimum(suffix[:, q + 1], self.cdist[:, q])
        self.suffix_min = suffix

        self.n = n
        self.in_chain = np.zeros(n, dtype=bool)
        self.members: List[int] = []
        self.fixed_radii: List[int] = []
        self.fixed_sets: List[Tuple[int, ...]] = []
        self.frame_bounds: List = []

        self.nodes = 0  # complete chains evaluated
        self.expanded = 0
        self.best_chain = incumbent
        self.best_value = self._chain_value(incumbent) if incumbent is not None else None
        self.first_incumbent = self.best_value
        self.timeout_dual = None
        self.deadline = time.perf_counter() + opts.time_limit_s
        self.t_next_check = 0

    # ---- objective plumbing -------------------------------------------------

    def _chain_value(self, chain: Chain):
        if self.mode == "absolute":
            return chain.objective_abs
        return max(Fraction(r - d, d) for r, d in zip(chain.radii, self.d_star))

    def _root_bound(self):
        if self.mode == "absolute":
            return self.suffix_LB[0]
        return Fraction(0)

    def _radius_cap(self, h: int) -> int:
        """Largest current-period radius that can still beat the incumbent."""
        prev = self.fixed_radii[-1] if self.fixed_radii else int(_BIG)
        if self.opts.exhaustive or self.best_value is None:
            return prev
        if self.mode == "absolute":
            cap = self.best_value - 1 - sum(self.fixed_radii) - self.suffix_LB[h + 1]
            return min(prev, int(cap))
        d = self.d_star[h]
        num = d * (self.best_value.numerator + self.best_value.denominator) - 1
        cap = num // self.best_value.denominator
        return min(prev, int(cap))

    def _period_ok(self, h: int, radius: int) -> bool:
        """Can the chain still beat the incumbent after fixing this radius?"""
        if self.opts.exhaustive or self.best_value is None:
            return True
        if self.mode == "absolute":
            done = sum(self.fixed_radii) + radius
            return done + self.suffix_LB[h + 1] < self.best_value
        regret = Fraction(radius - self.d_star[h], self.d_star[h])
        return regret < self.best_value

    def _node_bound(self, h: int):
        if self.mode == "absolute":
            return sum(self.fixed_radii) + self.LB[h] + self.suffix_LB[h + 1]
        if not self.fixed_radii:
            return Fraction(0)
        return max(
            Fraction(r - d, d)
            for r, d in zip(self.fixed_radii, self.d_star)
        )

    # ---- search -------------------------------------------------------------

    def run(self) -> str:
        try:
            self._grow(0, np.full(self.m, _BIG, dtype=np.int64), -1)
            return "optimal"
        except _TimeUp:
            return "time_limit"

    def _tick(self):
        self.expanded += 1
        if self.expanded >= self.t_next_check:
            self.t_next_check = self.expanded + self.opts.check_interval
            if time.perf_counter() > self.deadline:
                pending = self.frame_bounds or [self._root_bound()]
                self.timeout_dual = min(pending)
                raise _TimeUp
            if self.opts.memory_limit_mb is not None:
                import psutil

                rss = psutil.Process().memory_info().rss / (1024 * 1024)
                if rss > self.opts.memory_limit_mb:
                    raise MemoryLimitExceeded(f"resident memory {rss:.0f} MiB over limit")

    def _grow(self, h: int, covdist: np.ndarray, last: int):
        self._tick()
        if len(self.members) == self.p[h]:
            self._complete_period(h, covdist)
            return

        slots = self.p[h] - len(self.members)
        cap = self._radius_cap(h)
        if cap < self.LB[h]:
            return

        pool = np.flatnonzero(~self.in_chain[last + 1:]) + (last + 1)
        if len(pool) < slots:
            return

        if slots == 1:
            vals = np.minimum(covdist[:, None], self.cdist[:, pool]).max(axis=0)
            order = np.lexsort((pool, vals))
            self.frame_bounds.append(self._node_bound(h))
            try:
                for t in order:
                    pos = int(pool[t])
                    if vals[t] > cap and not self.opts.exhaustive:
                        continue
                    self._push(pos)
                    self._grow(h, np.minimum(covdist, self.cdist[:, pos]), pos)
                    self._pop(pos)
            finally:
                self.frame_bounds.pop()
            return

        if not self.opts.exhaustive and not self._completion_possible(
            h, covdist, last, slots, cap
        ):
            return

        child_pool = pool[: len(pool) - slots + 1]
        child_cov = np.minimum(covdist[:, None], self.cdist[:, child_pool])
        # all-open relaxation of the rest of this period, per child
        child_lb = np.minimum(child_cov, self.suffix_min[:, child_pool + 1]).max(axis=0)
        order = np.lexsort((child_pool, child_lb))
        self.frame_bounds.append(self._node_bound(h))
        try:
            for t in order:
                if child_lb[t] > cap and not self.opts.exhaustive:
                    continue
                pos = int(child_pool[t])
                self._push(pos)
                self._grow(h, np.ascontiguousarray(child_cov[:, t]), pos)
                self._pop(pos)
        finally:
            self.frame_bounds.pop()

    def _completion_possible(
        self, h: int, covdist: np.ndarray, last: int, slots: int, cap: int
    ) -> bool:
        """Can the current period finish with radius <= cap? Cheap relaxations
        first, then a node-capped exact cover check near the period bottom."""
        uncovered = covdist > cap
        if uncovered.any():
            if (self.suffix_min[uncovered, last + 1] > cap).any():
                return False
            if scatter_count(self.inst, uncovered, cap, covdist, slots) > slots:
                return False
        if (
            self.opts.constrained_bound
            and slots <= self.opts.constrained_depth
        ):
            pool = np.flatnonzero(~self.in_chain[last + 1:]) + (last + 1)
            universe = [
                self.inst.customers[i] for i in np.flatnonzero(uncovered)
            ]
            if not universe:
                return True
            problem = CoverProblem(
                radius=cap,
                universe=tuple(universe),
                allowed=tuple(int(self.perm[pos]) for pos in pool),
                forced=(),
                budget=slots,
            )
            res = cover_feasible(self.inst, problem, max_nodes=self.opts.cover_node_cap)
            if res is None:
                return False
        return True

    def _push(self, pos: int):
        self.in_chain[pos] = True
        self.members.append(pos)

    def _pop(self, pos: int):
        self.in_chain[pos] = False
        self.members.pop()

    def _complete_period(self, h: int, covdist: np.ndarray):
        radius = int(covdist.max())
        if not self._period_ok(h, radius):
            return
        self.fixed_radii.append(radius)
        self.fixed_sets.append(tuple(sorted(int(self.perm[pos]) for pos in self.members)))
        try:
            if h + 1 < self.H:
                self._grow(h + 1, covdist, -1)
            else:
                self._leaf()
        finally:
            self.fixed_sets.pop()
            self.fixed_radii.pop()

    def _leaf(self):
        self.nodes += 1
        if self.mode == "absolute":
            value = sum(self.fixed_radii)
        else:
            value = max(
                Fraction(r - d, d) for r, d in zip(self.fixed_radii, self.d_star)
            )
        if self.best_value is None or value < self.best_value:
            self.best_value = value
            self.best_chain = Chain(
                sets=tuple(self.fixed_sets), radii=tuple(self.fixed_radii)
            )
            if self.first_incumbent is None:
                self.first_incumbent = value


def _preprocess(inst: Instance, schedule: Schedule):
    seq = solve_pcenter_sequence(inst, schedule)
    d_star = tuple(d for d, _ in seq)
    witnesses = tuple(w for _, w in seq)
    return d_star, witnesses


def _report(
    search: _ChainSearch,
    status: str,
    t0: float,
    d_star,
    witnesses,
) -> SolveReport:
    chain = search.best_chain
    exact = search.best_value
    if chain is None:  # timed out before reaching any leaf and no start chain
        return SolveReport(
            objective=float("inf"),
            dual_bound=float(search.timeout_dual),
            gap_percent=100.0,
            nodes=0,
            time_s=time.perf_counter() - t0,
            chain=None,
            rc=None,
            ri=None,
            status=status,
            d_star=tuple(d_star) if d_star is not None else None,
            expanded=search.expanded,
        )
    if status == "optimal":
        dual_exact = exact
    else:
        dual_exact = search.timeout_dual
        if search.mode == "relative" and dual_exact is not None:
            dual_exact = tighten_relative_lb(Fraction(dual_exact), search.d_star)
        if exact is not None and dual_exact is not None:
            dual_exact = min(dual_exact, exact)
    objective = float(exact)
    dual = float(dual_exact)
    gap = 0.0 if objective <= 0 else max(0.0, 100.0 * (objective - dual) / objective)
    if status == "optimal":
        gap = 0.0
    rc = ri = None
    if d_star is not None and witnesses:
        rc, ri = compute_rc_ri(chain, d_star, witnesses)
    return SolveReport(
        objective=objective,
        dual_bound=dual,
        gap_percent=gap,
        nodes=search.nodes,
        time_s=time.perf_counter() - t0,
        chain=chain,
        rc=rc,
        ri=ri,
        status=status,
        objective_exact=exact if isinstance(exact, Fraction) else None,
        dual_exact=dual_exact if isinstance(dual_exact, Fraction) else None,
        d_star=tuple(d_star) if d_star is not None else None,
        expanded=search.expanded,
        first_incumbent=float(search.first_incumbent)
        if search.first_incumbent is not None
        else None,
    )


def solve_absolute(
    inst: Instance, schedule: Schedule, opts: Optional[SolveOptions] = None
) -> SolveReport:
    """Minimize the summed coverage radii over all feasible nested chains.

    The reported objective is the radius sum; subtract the p-center optima
    (``d_star``) for the regret view.
    """
    opts = opts or SolveOptions()
    schedule.validate_for(inst)
    t0 = time.perf_counter()

    d_star = witnesses = None
    LB = [0] * schedule.H
    incumbent = None
    if opts.setting in ("P", "PH") and not opts.exhaustive:
        d_star, witnesses = _preprocess(inst, schedule)
        LB = list(d_star)
    if opts.setting == "PH" and not opts.exhaustive:
        start = best_start(inst, schedule, d_star, witnesses, objective="absolute")
        incumbent = start.chain

    search = _ChainSearch(inst, schedule, opts, "absolute", LB, d_star, incumbent)
    search.deadline = t0 + opts.time_limit_s
    status = search.run()
    return _report(search, status, t0, d_star, witnesses)


def solve_relative(
    inst: Instance, schedule: Schedule, opts: Optional[SolveOptions] = None
) -> SolveReport:
    """Minimize the maximum relative regret; comparisons are exact rationals.

    Preprocessing always runs: the per-period p-center optima define the
    objective itself and must all be positive.
    """
    opts = opts or SolveOptions()
    schedule.validate_for(inst)
    t0 = time.perf_counter()

    d_star, witnesses = _preprocess(inst, schedule)
    if any(d == 0 for d in d_star):
        raise ValueError("relative regret undefined: a period's p-center optimum is zero")
    LB = list(d_star)

    incumbent = None
    if opts.setting == "PH" and not opts.exhaustive:
        start = best_start(inst, schedule, d_star, witnesses, objective="relative")
        incumbent = start.chain

    search = _ChainSearch(inst, schedule, opts, "relative", LB, d_star, incumbent)
    search.deadline = t0 + opts.time_limit_s
    status = search.run()
    return _report(search, status, t0, d_star, witnesses)


def node_bound_absolute(
    inst: Instance,
    schedule: Schedule,
    node: SearchNode,
    bound_set,
    opts: Optional[SolveOptions] = None,
) -> int:
    """Lower bound on the best completion of a partial chain: exact radii of
    fixed periods, a (optionally cover-constrained) bound for the period under
    construction, and the p-center lower bounds for the rest."""
    opts = opts or SolveOptions()
    h = node.h_current
    LB = list(bound_set.LB)
    fixed_cost = sum(eval_radius(inst, s) for s in node.fixed_sets)
    future = sum(LB[h + 1:])
    current = LB[h]
    p_h = schedule.p[h]
    slots = p_h - len(node.partial)
    if (
        opts.constrained_bound
        and node.partial
        and slots <= opts.constrained_depth
    ):
        pool = tuple(
            j
            for j in range(inst.n)
            if j > node.last_added and j not in node.partial
        )
        for d in inst.distinct:
            if d < current:
                continue
            res = cover_feasible(
                inst,
                CoverProblem(
                    radius=d,
                    universe=inst.customers,
                    allowed=tuple(sorted(set(pool) | set(node.partial))),
                    forced=tuple(node.partial),
                    budget=p_h,
                ),
                max_nodes=opts.cover_node_cap,
            )
            if res is not None:  # feasible or unknown: d is not excluded
                current = d
                break
        else:
            current = inst.distinct[-1]
    return fixed_cost + current + future
