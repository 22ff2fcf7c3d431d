from fractions import Fraction

import pytest

from nestedpcenter import (
    Schedule,
    best_start,
    build_bounds,
    enumerate_nested,
    heuristic_count,
    heuristic_grow,
    heuristic_shrink,
    primal_from_scores,
    random_grid_instance,
)


class TestShrink:
    def test_toy_from_outer_pair(self, toy):
        res = heuristic_shrink(toy, Schedule((1, 2)), jH=(0, 1))
        assert res.objective_abs == 20
        assert res.chain.sets[1] == (0, 1)
        assert res.chain.sets[0] in ((0,), (1,))
        assert res.source == "shrink"

    def test_zero_delta_copies_set(self, toy):
        res = heuristic_shrink(toy, Schedule((2, 2)), jH=(0, 1))
        assert res.chain.sets == ((0, 1), (0, 1))

    def test_not_worse_than_oracle(self):
        for seed in range(5):
            inst = random_grid_instance(10, seed=seed)
            sched = Schedule((2, 3))
            bounds = build_bounds(inst, sched)
            res = heuristic_shrink(inst, sched, bounds.witnesses[-1])
            assert res.objective_abs >= enumerate_nested(inst, sched).optimum_abs
            res.chain.check(inst, sched)


class TestGrow:
    def test_toy_from_middle_stays_at_15(self, toy):
        res = heuristic_grow(toy, Schedule((1, 2)), j1=(2,))
        assert res.objective_abs == 30
        assert res.chain.sets == ((2,), (0, 2))  # index tie-break adds site a

    def test_zero_delta(self, toy):
        res = heuristic_grow(toy, Schedule((1, 1)), j1=(2,))
        assert res.chain.sets == ((2,), (2,))

    def test_not_worse_than_oracle(self):
        for seed in range(5):
            inst = random_grid_instance(10, seed=seed)
            sched = Schedule((2, 3))
            bounds = build_bounds(inst, sched)
            res = heuristic_grow(inst, sched, bounds.witnesses[0])
            assert res.objective_abs >= enumerate_nested(inst, sched).optimum_abs
            res.chain.check(inst, sched)


class TestCount:
    def test_toy_hand_trace(self, toy):
        # counts a:1, b:1, c:1 -> J1={a} by index; adding b drops the radius to 0
        res = heuristic_count(toy, Schedule((1, 2)), pc_solutions=[(2,), (0, 1)])
        assert res.chain.sets == ((0,), (0, 1))
        assert res.objective_abs == 20

    def test_single_period_reproduces_solution(self, toy):
        res = heuristic_count(toy, Schedule((1,)), pc_solutions=[(2,)])
        assert res.chain.sets == ((2,),)

    def test_union_exhausted_falls_back_to_all_sites(self):
        inst = random_grid_instance(6, seed=1)
        sched = Schedule((1, 3))
        res = heuristic_count(inst, sched, pc_solutions=[(0,), (0,)])
        res.chain.check(inst, sched)

    def test_not_worse_than_oracle(self):
        for seed in range(5):
            inst = random_grid_instance(10, seed=seed)
            sched = Schedule((2, 3))
            bounds = build_bounds(inst, sched)
            res = heuristic_count(inst, sched, bounds.witnesses)
            assert res.objective_abs >= enumerate_nested(inst, sched).optimum_abs


class TestPrimalFromScores:
    def test_integral_scores_reproduce_chain(self, toy):
        scores = [[0, 0, 1], [1, 0, 1]]  # y-values of chain ({c},{a,c})
        chain = primal_from_scores(toy, Schedule((1, 2)), scores)
        assert chain.sets == ((2,), (0, 2))

    def test_equal_scores_take_lowest_indices(self, toy):
        chain = primal_from_scores(toy, Schedule((1, 2)), [[1, 1, 1]])
        assert chain.sets == ((0,), (0, 1))

    def test_fractional_scores(self, toy):
        chain = primal_from_scores(toy, Schedule((1, 2)), [1.7, 1.2, 0.1])
        assert chain.sets == ((0,), (0, 1))


class TestBestStart:
    def test_toy_absolute(self, toy):
        bounds = build_bounds(toy, Schedule((1, 2)))
        res = best_start(toy, Schedule((1, 2)), bounds.d_star, bounds.witnesses)
        assert res.objective_abs == 20
        assert res.source == "shrink"  # ties resolved by source order

    def test_single_period_equals_pcenter(self):
        inst = random_grid_instance(9, seed=3)
        sched = Schedule((3,))
        bounds = build_bounds(inst, sched)
        res = best_start(inst, sched, bounds.d_star, bounds.witnesses)
        assert res.objective_abs == bounds.d_star[0]

    def test_relative_requires_positive_optima(self, toy):
        bounds = build_bounds(toy, Schedule((1, 2)))
        with pytest.raises(ValueError, match="undefined"):
            best_start(toy, Schedule((1, 2)), bounds.d_star, bounds.witnesses, "relative")

    def test_relative_objective_recorded(self):
        inst = random_grid_instance(10, seed=2)
        sched = Schedule((2, 3))
        bounds = build_bounds(inst, sched)
        res = best_start(inst, sched, bounds.d_star, bounds.witnesses, "relative")
        assert isinstance(res.objective_rel, Fraction)
        assert res.objective_rel >= 0

    def test_deterministic(self):
        inst = random_grid_instance(11, seed=6)
        sched = Schedule((2, 4))
        bounds = build_bounds(inst, sched)
        first = best_start(inst, sched, bounds.d_star, bounds.witnesses)
        second = best_start(inst, sched, bounds.d_star, bounds.witnesses)
        assert first.chain.sets == second.chain.sets
