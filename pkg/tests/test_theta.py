import math
from dataclasses import replace

import numpy as np
import pytest

from thetahyb.graph import WeightedGraph, gen_random_graph
from thetahyb.rounding import greedy_round
from thetahyb.sdp import SdpStatus, solve_sdp
from thetahyb.theta import (
    ThetaError,
    ThetaForm,
    add_discrepancy_cut,
    build_theta_x,
    build_theta_y,
    extract_scores,
    solve_theta,
    usable_upper_bound,
)

from oracles import brute_force_alpha, cycle, odd_cycle_theta, random_bipartite

K2 = WeightedGraph.from_edges(2, [(0, 1)])
STAR = WeightedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


def test_x_form_k2_construction():
    model = build_theta_x(K2)
    assert model.variant is ThetaForm.X
    assert np.array_equal(model.problem.cost, np.ones((2, 2)))
    assert model.problem.m == 2
    assert model.vertex_to_diag == (0, 1)


def test_x_form_weighted_cost():
    g = WeightedGraph.from_edges(2, [], [4, 9])
    assert np.array_equal(build_theta_x(g).problem.cost, [[4, 6], [6, 9]])


def test_x_form_c5():
    model = build_theta_x(cycle(5))
    assert (model.problem.dim, model.problem.m) == (5, 6)
    assert solve_theta(cycle(5)).theta == pytest.approx(math.sqrt(5), abs=1e-4)


@pytest.mark.parametrize("variant", ["x", "y"])
def test_single_vertex(variant):
    g = WeightedGraph.from_edges(1, [], [3])
    assert solve_theta(g, variant).theta == pytest.approx(3.0, abs=1e-6)


def test_y_form_k2_and_c5():
    assert solve_theta(K2, "y").theta == pytest.approx(1.0, abs=1e-6)
    assert solve_theta(cycle(5), "y").theta == pytest.approx(solve_theta(cycle(5), "x").theta, abs=1e-4)


def test_y_form_structure():
    g = gen_random_graph(12, 0.3, 5)
    model = build_theta_y(g)
    assert model.problem.dim == g.n + 1
    # n linking constraints, m edge constraints, plus the pinned corner Y_00 = 1
    assert model.problem.m == g.m + g.n + 1
    assert model.vertex_to_diag == tuple(range(1, g.n + 1))
    assert np.all(model.problem.cost[0] == 0)


@pytest.mark.parametrize("seed", range(5))
def test_constraint_counts(seed):
    g = gen_random_graph(10 + seed, 0.1 * (seed + 1), seed)
    assert build_theta_x(g).problem.m == g.m + 1
    assert build_theta_y(g).problem.m == g.m + g.n + 1


def test_rejects_non_positive_weight():
    g = WeightedGraph.from_edges(2, [])
    object.__setattr__(g, "weights", (1, 0))
    with pytest.raises(ValueError):
        build_theta_x(g)


def test_scores_k2_symmetric():
    res = solve_theta(K2)
    assert res.scores == pytest.approx([1.0, 1.0], abs=1e-6)


def test_star_leaves_outrank_center():
    res = solve_theta(STAR)
    assert res.theta == pytest.approx(3.0, abs=1e-6)
    assert min(res.scores[1:]) > res.scores[0] + 0.5
    assert greedy_round(STAR, res.scores).value == 3


def test_star_diagonal_matches_independent_solver():
    cp = pytest.importorskip("cvxpy")
    n = STAR.n
    X = cp.Variable((n, n), PSD=True)
    cons = [cp.trace(X) == 1] + [X[i, j] == 0 for i, j in STAR.sorted_edges()]
    cp.Problem(cp.Maximize(cp.sum(X)), cons).solve(solver=cp.CLARABEL)
    ref = np.clip(np.diag(X.value), 0, None)
    ours = solve_theta(STAR).sdp.primal_X.diagonal()
    assert ours == pytest.approx(ref, abs=1e-4)


@pytest.mark.parametrize("seed", range(4))
def test_formulation_agreement(seed):
    rng = np.random.default_rng(seed)
    g = gen_random_graph(int(rng.integers(5, 31)), float(rng.uniform(0.1, 0.5)), seed)
    assert abs(solve_theta(g, "x").theta - solve_theta(g, "y").theta) <= 1e-4


@pytest.mark.parametrize("seed", range(8))
def test_sandwich(seed):
    rng = np.random.default_rng(100 + seed)
    g = gen_random_graph(int(rng.integers(4, 15)), float(rng.uniform(0.05, 0.6)), seed)
    alpha, _ = brute_force_alpha(g)
    assert alpha <= solve_theta(g).theta + 1e-6


@pytest.mark.parametrize("seed", range(6))
def test_perfect_graph_tightness(seed):
    g = random_bipartite(12, 0.4, seed)
    alpha, _ = brute_force_alpha(g)
    assert math.floor(solve_theta(g).theta + 1e-6) == alpha


def test_odd_cycles_closed_form():
    for n in (5, 7, 9):
        assert solve_theta(cycle(n)).theta == pytest.approx(odd_cycle_theta(n), abs=1e-4)


def test_score_ranking_agrees_across_forms():
    # Bipartite graphs with a unique maximum stable set have a unique optimal
    # diagonal, and unweighted the Y diagonal is theta times the X diagonal.
    checked = 0
    for seed in range(40):
        g = random_bipartite(10, 0.35, seed)
        alpha, best = brute_force_alpha(g)
        masks = [s for s in range(1 << g.n) if bin(s).count("1") == alpha]
        optima = [s for s in masks if g.is_stable(i for i in range(g.n) if (s >> i) & 1)]
        if len(optima) != 1:
            continue
        sx, sy = solve_theta(g, "x").scores, solve_theta(g, "y").scores
        assert sx == pytest.approx(sy, abs=1e-3)
        top = int(alpha)
        assert set(np.argsort(-sx)[:top]) == set(np.argsort(-sy)[:top]) == set(best)
        checked += 1
    assert checked >= 3


def test_g50d005_class_rounding_is_exact():
    for seed in range(3):
        g = gen_random_graph(50, 0.05, seed)
        res = solve_theta(g)
        assert greedy_round(g, res.scores).value == usable_upper_bound(res.theta, g)


def test_usable_upper_bound():
    integral = WeightedGraph.from_edges(2, [], [1, 2])
    assert usable_upper_bound(20.0000001, integral) == 20
    assert usable_upper_bound(18.85, integral) == 18
    assert usable_upper_bound(19.9999995, integral) == 20
    fractional = WeightedGraph.from_edges(2, [], [1.5, 2])
    assert usable_upper_bound(3.2, fractional) == 3.2


def test_extract_scores_propagates_failure():
    model = build_theta_x(K2)
    sol = solve_sdp(model.problem)
    with pytest.raises(ThetaError):
        extract_scores(model, replace(sol, status=SdpStatus.NUMERICAL_FAILURE), K2)


class TestDiscrepancyCut:
    model = build_theta_x(cycle(7))

    @pytest.mark.parametrize("k, rhs", [(0, 5), (2, 3), (5, 0)])
    def test_rhs(self, k, rhs):
        cut = add_discrepancy_cut(self.model, [0, 1, 2, 3, 4], k)
        assert cut.problem.constraints[-1][1] == rhs

    def test_copy_on_write(self):
        before = self.model.problem.m
        cut = add_discrepancy_cut(self.model, [0, 2], 1)
        assert self.model.problem.m == before
        assert cut.problem.m == before + 1
        assert cut.cuts == 1

    def test_matrix_pattern(self):
        A = add_discrepancy_cut(self.model, [0, 2], 1).problem.constraints[-1][0].toarray()
        expected = np.zeros((7, 7))
        expected[[0, 2], :] = 1
        expected[:, [0, 2]] = 1
        assert np.array_equal(A, expected)

    def test_rejects_y_form(self):
        with pytest.raises(ValueError):
            add_discrepancy_cut(build_theta_y(cycle(5)), [0, 2], 1)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            add_discrepancy_cut(self.model, [], 0)
        with pytest.raises(ValueError):
            add_discrepancy_cut(self.model, [0, 2], 3)

    def test_cut_is_not_implied_by_integral_solutions(self):
        # Documented finding: under tr(X) = 1 a stable set S of size s with
        # t members in V0 gives tr(A X) = (s^2 - (s - t)^2) / s, not t.
        # Here V0 = {0}, S = {0, 2} (t = 1, level 0): tr(A X) = 1.5, not 1.
        g = cycle(5)
        x = np.zeros(5)
        x[[0, 2]] = 1
        X = np.outer(x, x) / x.sum()
        A = add_discrepancy_cut(build_theta_x(g), [0], 0).problem.constraints[-1][0]
        assert A.inner(X) == pytest.approx(1.5)
