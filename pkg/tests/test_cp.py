import numpy as np
import pytest

from thetahyb.cp import (
    CpModel,
    CpStatus,
    SharedIncumbent,
    branch_and_bound,
    cp_only_solve,
    propagate,
    solve_subproblem,
)
from thetahyb.graph import WeightedGraph, gen_random_graph
from thetahyb.lds import make_subproblem
from thetahyb.rounding import DomainPartition

from oracles import brute_force_alpha, brute_force_restricted, cycle

TRIANGLE = WeightedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], [3, 2, 1])


def test_propagation_clears_neighbours():
    g = WeightedGraph.from_edges(3, [(0, 1), (1, 2)])
    red = propagate(CpModel.with_assignment(g, {0: 1}))
    assert red.domains == (frozenset({1}), frozenset({0}), frozenset({0, 1}))


def test_propagation_detects_conflict():
    assert propagate(CpModel.with_assignment(TRIANGLE, {0: 1, 1: 1})) is None


def test_propagation_is_idempotent():
    g = gen_random_graph(15, 0.3, 4)
    once = propagate(CpModel.with_assignment(g, {0: 1, 5: 1, 7: 0}))
    assert propagate(once) == once


def test_rejects_non_binary_values():
    with pytest.raises(ValueError):
        CpModel.with_assignment(TRIANGLE, {0: 2})


def test_triangle():
    r = cp_only_solve(TRIANGLE)
    assert (r.best_value, r.best_set, r.status) == (3, frozenset({0}), CpStatus.OPTIMAL)


def test_c5():
    assert cp_only_solve(cycle(5)).best_value == 2


def test_edgeless_needs_no_backtracking():
    g = WeightedGraph.from_edges(6, [], [1, 2, 3, 4, 5, 6])
    r = cp_only_solve(g)
    assert r.best_value == 21
    assert r.backtracks == 0


def test_c5_level_one_subproblem():
    part = DomainPartition((0, 2), (1, 3, 4), (1.0,) * 5)
    r = solve_subproblem(cycle(5), make_subproblem(part, (0,)))
    assert r.best_value == 2
    assert 0 not in r.best_set and 2 in r.best_set


def test_cutoff_without_improvement():
    r = branch_and_bound(CpModel.unrestricted(cycle(5)), lower_cutoff=2)
    assert r.status is CpStatus.CUTOFF_REACHED
    assert r.best_value is None


def test_upper_cutoff_stops_early():
    g = gen_random_graph(18, 0.2, 1)
    alpha, _ = brute_force_alpha(g)
    full = cp_only_solve(g)
    early = branch_and_bound(CpModel.unrestricted(g), upper_cutoff=alpha)
    assert early.best_value == alpha
    assert early.nodes <= full.nodes


def test_infeasible_assignment():
    model = CpModel.with_assignment(TRIANGLE, {0: 1, 2: 1})
    assert branch_and_bound(model).status is CpStatus.INFEASIBLE


def test_time_limit():
    g = gen_random_graph(120, 0.1, 0)
    r = cp_only_solve(g, time_limit=0.05)
    assert r.status is CpStatus.TIME_LIMIT
    assert r.elapsed < 2.0


def test_shared_incumbent_is_monotone():
    s = SharedIncumbent()
    assert s.offer(3)
    assert not s.offer(2)
    assert s.offer(5)
    assert s.value == 5


def test_float_weights():
    g = WeightedGraph.from_edges(4, [(0, 1), (2, 3)], [0.1, 0.2, 0.3, 0.30000000000000004])
    r = cp_only_solve(g)
    assert r.best_value == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(12))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    g = gen_random_graph(int(rng.integers(1, 17)), float(rng.uniform(0, 1)), seed)
    alpha, _ = brute_force_alpha(g)
    r = cp_only_solve(g)
    assert r.best_value == alpha
    assert g.weight_of(r.best_set) == alpha


@pytest.mark.parametrize("seed", range(6))
def test_restricted_matches_brute_force(seed):
    rng = np.random.default_rng(50 + seed)
    g = gen_random_graph(14, 0.3, seed)
    assignment = {int(v): int(rng.integers(2)) for v in rng.choice(14, size=3, replace=False)}
    expected = brute_force_restricted(g, assignment)
    r = branch_and_bound(CpModel.with_assignment(g, assignment))
    assert r.best_value == expected
