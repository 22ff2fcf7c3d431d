"""Bound constructions used for preprocessing, model strengthening and search.

Per-period lower bounds are the standalone p-center optima. Two incomparable
per-period upper-bound constructions are derived from any global upper bound;
their elementwise minimum is used in practice. For the relative-regret
objective, fractional lower bounds can be snapped up to the next value on the
attainable step lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .instances import Instance, Schedule
from .pcenter import solve_pcenter_sequence

_EPS = 1e-9


@dataclass(frozen=True)
class BoundSet:
    """Per-period bounds: d_star are the p-center optima (also the LBs)."""

    d_star: Tuple[int, ...]
    LB: Tuple[int, ...]
    UB_global: int
    UB: Tuple[int, ...]
    witnesses: Tuple[Tuple[int, ...], ...] = ()


def ub_global_trivial(z1_star: int, H: int) -> int:
    """Global bound from repeating a first-period solution over the horizon."""
    return H * z1_star


def _check(UB_global: Union[int, float], LB: Sequence[int]) -> None:
    if UB_global < sum(LB):
        raise ValueError("global upper bound below the sum of lower bounds")


def ub_periods_residual(UB_global: int, LB: Sequence[int]) -> List[int]:
    """Per-period bound: the global bound minus every other period's LB."""
    _check(UB_global, LB)
    total = sum(LB)
    return [UB_global - (total - lb) for lb in LB]


def ub_periods_averaged(UB_global: int, LB: Sequence[int]) -> List[int]:
    """Per-period bound from radius monotonicity, floored to integrality."""
    _check(UB_global, LB)
    H = len(LB)
    out = []
    for h in range(1, H + 1):
        rest = sum(LB[h:])
        out.append((UB_global - rest) // h)
    return out


def ub_periods_combined(UB_global: int, LB: Sequence[int]) -> List[int]:
    """Elementwise minimum of the two constructions (both are valid)."""
    res = ub_periods_residual(UB_global, LB)
    avg = ub_periods_averaged(UB_global, LB)
    return [min(a, b) for a, b in zip(res, avg)]


def tighten_relative_lb(
    lb: Union[float, Fraction], d_star: Sequence[int]
) -> Union[float, Fraction]:
    """Smallest value >= lb of the form k/d_star[h] for integer k and some h.

    Relative-regret objectives can only take such values when distances are
    integral, so any fractional bound can be raised to the next lattice point.
    Fractions are handled exactly; floats carry a small guard against noise.
    """
    if lb < 0:
        raise ValueError("lower bound must be non-negative")
    if any(d <= 0 for d in d_star):
        raise ValueError("step sizes require positive p-center optima")
    if isinstance(lb, Fraction):
        best = min(Fraction(math.ceil(lb * d), d) for d in d_star)
        return max(best, lb)
    best = min(math.ceil(lb * d - _EPS) / d for d in d_star)
    return max(best, lb)


def build_bounds(
    inst: Instance,
    schedule: Schedule,
    ub_global: Optional[int] = None,
) -> BoundSet:
    """Solve the per-period p-center problems and assemble a BoundSet.

    ``ub_global`` defaults to the trivial horizon-times-first-period bound;
    pass a heuristic objective to tighten the per-period windows.
    """
    schedule.validate_for(inst)
    seq = solve_pcenter_sequence(inst, schedule)
    d_star = tuple(d for d, _ in seq)
    witnesses = tuple(w for _, w in seq)
    if ub_global is None:
        ub_global = ub_global_trivial(d_star[0], schedule.H)
    UB = tuple(ub_periods_combined(ub_global, d_star))
    return BoundSet(
        d_star=d_star,
        LB=d_star,
        UB_global=ub_global,
        UB=UB,
        witnesses=witnesses,
    )
