from fractions import Fraction

import pytest

from nestedpcenter import (
    Schedule,
    build_bounds,
    enumerate_nested,
    random_grid_instance,
    tighten_relative_lb,
    ub_global_trivial,
    ub_periods_averaged,
    ub_periods_combined,
    ub_periods_residual,
)


class TestGlobalUpperBound:
    def test_horizon_times_first_period(self):
        assert ub_global_trivial(22, 3) == 66

    def test_single_period(self):
        assert ub_global_trivial(17, 1) == 17

    def test_zero(self):
        assert ub_global_trivial(0, 4) == 0


class TestResidualUpperBounds:
    def test_zero_lbs_give_global_everywhere(self):
        assert ub_periods_residual(42, [0, 0, 0]) == [42, 42, 42]

    def test_eil51_arithmetic(self):
        assert ub_periods_residual(61, [22, 19, 17]) == [25, 22, 20]

    def test_single_period(self):
        assert ub_periods_residual(61, [40]) == [61]

    def test_inconsistent_bounds_rejected(self):
        with pytest.raises(ValueError):
            ub_periods_residual(10, [6, 6])


class TestAveragedUpperBounds:
    def test_zero_lbs_divide_by_period(self):
        assert ub_periods_averaged(42, [0, 0, 0]) == [42, 21, 14]

    def test_eil51_arithmetic_with_floor(self):
        # raw values 25, 22, 20.33; integrality floors the last
        assert ub_periods_averaged(61, [22, 19, 17]) == [25, 22, 20]

    def test_single_period(self):
        assert ub_periods_averaged(61, [40]) == [61]


class TestCombinedUpperBounds:
    def test_eil51(self):
        assert ub_periods_combined(61, [22, 19, 17]) == [25, 22, 20]

    def test_never_exceeds_either_construction(self):
        for UB, LB in [(42, [0, 0, 0]), (61, [22, 19, 17]), (30, [15, 0])]:
            combined = ub_periods_combined(UB, LB)
            assert all(c <= r for c, r in zip(combined, ub_periods_residual(UB, LB)))
            assert all(c <= a for c, a in zip(combined, ub_periods_averaged(UB, LB)))

    def test_incomparability_both_directions(self):
        # zero lower bounds: the averaged construction wins for h >= 2
        res = ub_periods_residual(40, [0, 0])
        avg = ub_periods_averaged(40, [0, 0])
        assert avg[1] < res[1]
        # strictly decreasing optimal radii: the residual construction wins
        res = ub_periods_residual(20, [20, 0])
        avg = ub_periods_averaged(20, [20, 0])
        assert res[1] < avg[1]


class TestStepSizeTightening:
    def test_paper_example(self):
        assert tighten_relative_lb(0.07, (25, 20, 10)) == 0.08

    def test_zero_is_fixed_point(self):
        assert tighten_relative_lb(0.0, (25, 20, 10)) == 0.0

    def test_single_step_size(self):
        assert tighten_relative_lb(0.11, (10,)) == 0.2

    def test_idempotent(self):
        once = tighten_relative_lb(0.07, (25, 20, 10))
        assert tighten_relative_lb(once, (25, 20, 10)) == once

    def test_never_decreases(self):
        for lb in (0.0, 0.01, 0.07, 0.3, 0.99):
            assert tighten_relative_lb(lb, (7, 11, 13)) >= lb

    def test_output_on_lattice(self):
        d_star = (7, 11, 13)
        out = tighten_relative_lb(Fraction(3, 100), d_star)
        assert any((out * d).denominator == 1 for d in d_star)

    def test_exact_fractions(self):
        assert tighten_relative_lb(Fraction(7, 100), (25, 20, 10)) == Fraction(2, 25)

    def test_requires_positive_optima(self):
        with pytest.raises(ValueError):
            tighten_relative_lb(0.1, (10, 0))


class TestBuildBounds:
    def test_toy_defaults(self, toy):
        bounds = build_bounds(toy, Schedule((1, 2)))
        assert bounds.d_star == (15, 0)
        assert bounds.LB == (15, 0)
        assert bounds.UB_global == 30
        assert bounds.UB == (30, 15)
        assert len(bounds.witnesses) == 2

    def test_validity_on_tiny_corpus(self):
        for seed in range(8):
            inst = random_grid_instance(8, seed=seed)
            sched = Schedule((2, 3))
            oracle = enumerate_nested(inst, sched)
            bounds = build_bounds(inst, sched)
            assert sum(bounds.LB) <= oracle.optimum_abs <= bounds.UB_global
            # with the optimum as global bound, some optimal chain fits the windows
            ubs = ub_periods_combined(oracle.optimum_abs, list(bounds.LB))
            assert any(
                all(r <= u for r, u in zip(_radii(inst, chain), ubs))
                for chain in oracle.all_optimal_chains_abs
            )


def _radii(inst, chain_sets):
    from nestedpcenter import eval_radius

    return [eval_radius(inst, s) for s in chain_sets]
