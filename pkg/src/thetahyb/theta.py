"""Lovasz theta relaxations of the weighted stable set problem.

Two equivalent formulations are built:

* ``X`` form (default): n x n matrix X with tr(X) = 1, X_ij = 0 on edges,
  maximizing tr(W X) where W_ii = w_i and W_ij = sqrt(w_i w_j).
* ``Y`` form: (n+1) x (n+1) matrix Y with Y_00 = 1, Y_ii = Y_0i and
  Y_ij = 0 on edges, maximizing sum_i w_i Y_ii.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import WeightedGraph
from .sdp import SdpProblem, SdpSolution, SdpStatus, SparseSymMatrix, certified_upper_bound, solve_sdp

ROUND_EPS = 1e-6


class ThetaForm(str, enum.Enum):
    X = "x"
    Y = "y"


class ThetaError(RuntimeError):
    """The relaxation could not be solved reliably."""


@dataclass(frozen=True)
class ThetaModel:
    variant: ThetaForm
    problem: SdpProblem
    vertex_to_diag: tuple[int, ...]
    # Any feasible matrix has trace at most this; used to certify dual bounds.
    trace_bound: float
    cuts: int = 0


@dataclass(frozen=True)
class ThetaResult:
    theta: float
    primal_value: float
    scores: np.ndarray
    sdp: SdpSolution


def _check_weights(g: WeightedGraph):
    for i, w in enumerate(g.weights):
        if not w > 0:
            raise ValueError(f"vertex {i} has non-positive weight {w}")


def build_theta_x(g: WeightedGraph) -> ThetaModel:
    _check_weights(g)
    root = np.sqrt(np.asarray(g.weights, dtype=float))
    W = np.outer(root, root)
    np.fill_diagonal(W, np.asarray(g.weights, dtype=float))
    cons = [(SparseSymMatrix.from_entries(g.n, ((i, i, 1.0) for i in range(g.n))), 1.0)]
    for i, j in g.sorted_edges():
        cons.append((SparseSymMatrix.from_entries(g.n, [(i, j, 0.5)]), 0.0))
    return ThetaModel(ThetaForm.X, SdpProblem(g.n, W, tuple(cons)), tuple(range(g.n)), 1.0)


def build_theta_y(g: WeightedGraph) -> ThetaModel:
    _check_weights(g)
    dim = g.n + 1
    W = np.zeros((dim, dim))
    W[np.arange(1, dim), np.arange(1, dim)] = np.asarray(g.weights, dtype=float)
    cons = [(SparseSymMatrix.from_entries(dim, [(0, 0, 1.0)]), 1.0)]
    for i in range(1, dim):
        cons.append((SparseSymMatrix.from_entries(dim, [(i, i, 1.0), (0, i, -0.5)]), 0.0))
    for i, j in g.sorted_edges():
        cons.append((SparseSymMatrix.from_entries(dim, [(i + 1, j + 1, 0.5)]), 0.0))
    # Y_ii = Y_0i and Y_00 = 1 give Y_ii <= 1 under PSD, so tr(Y) <= n + 1.
    return ThetaModel(ThetaForm.Y, SdpProblem(dim, W, tuple(cons)), tuple(range(1, dim)), float(dim))


def build_theta(g: WeightedGraph, variant: ThetaForm | str = ThetaForm.X) -> ThetaModel:
    variant = ThetaForm(variant)
    return build_theta_x(g) if variant is ThetaForm.X else build_theta_y(g)


def extract_scores(model: ThetaModel, sol: SdpSolution, g: WeightedGraph) -> ThetaResult:
    """Read per-vertex scores off the diagonal and certify the bound.

    Scores are clipped at zero and divided by their maximum. The reported
    theta is a certified dual bound: the dual objective corrected by the
    most negative eigenvalue of the dual slack.
    """
    if sol.status is SdpStatus.NUMERICAL_FAILURE:
        raise ThetaError(f"SDP solve failed after {sol.iterations} iterations")
    diag = np.array([sol.primal_X[d, d] for d in model.vertex_to_diag])
    if diag.size != g.n or not np.all(np.isfinite(diag)):
        raise ThetaError("relaxation diagonal is not usable")
    diag = np.clip(diag, 0.0, None)
    top = diag.max()
    scores = diag / top if top > 0 else np.ones(g.n)
    bound = certified_upper_bound(model.problem, sol.dual_y, model.trace_bound)
    if not math.isfinite(bound):
        raise ThetaError("dual bound is not finite")
    return ThetaResult(theta=bound, primal_value=sol.primal_obj, scores=scores, sdp=sol)


def solve_theta(
    g: WeightedGraph,
    variant: ThetaForm | str = ThetaForm.X,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> ThetaResult:
    model = build_theta(g, variant)
    return extract_scores(model, solve_sdp(model.problem, tol=tol, max_iter=max_iter), g)


def usable_upper_bound(theta: float, g: WeightedGraph) -> float:
    """Bound usable for optimality tests: floor(theta + eps) for integral weights."""
    if g.integral_weights:
        return float(math.floor(theta + ROUND_EPS))
    return theta


def add_discrepancy_cut(model: ThetaModel, v0: Sequence[int], k: int) -> ThetaModel:
    """Append tr(A X) = |V0| - k with A_ij = 1 iff i or j lies in V0.

    This is the matrix form of "exactly |V0| - k of the V0 variables are 1",
    taken verbatim. Under the trace-one scaling of the X form it is not
    implied by the integral solutions (for a stable set S of size s with t
    members in V0, tr(A X) = (s^2 - (s - t)^2) / s), so it may cut off
    optimal solutions. Kept for experiments only.
    """
    if model.variant is not ThetaForm.X:
        raise ValueError("discrepancy cuts are only defined for the X formulation")
    v0 = list(v0)
    if not v0:
        raise ValueError("V0 must be non-empty")
    if not 0 <= k <= len(v0):
        raise ValueError(f"discrepancy {k} outside 0..{len(v0)}")
    n = model.problem.dim
    in_v0 = set(v0)
    entries = [(i, j, 1.0) for i in range(n) for j in range(i, n) if i in in_v0 or j in in_v0]
    A = SparseSymMatrix.from_entries(n, entries)
    return ThetaModel(
        model.variant,
        model.problem.with_constraint(A, float(len(v0) - k)),
        model.vertex_to_diag,
        model.trace_bound,
        model.cuts + 1,
    )
