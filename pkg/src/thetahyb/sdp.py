"""Primal-dual interior-point solver for standard-form SDPs.

    maximize    tr(C X)
    subject to  tr(A_j X) = b_j,  j = 1..m
                X positive semidefinite

with dual

    minimize    b'y
    subject to  sum_j y_j A_j - C = Z,  Z positive semidefinite.

The search direction is the HKM (H..K..M) direction with a Mehrotra
predictor-corrector step; the Schur complement is assembled densely.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

log = logging.getLogger(__name__)

STEP_FRACTION = 0.98


class SdpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class SparseSymMatrix:
    """Symmetric matrix given by its upper-triangle entries (row <= col)."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_entries(cls, dim: int, entries) -> "SparseSymMatrix":
        """Accumulate ``(i, j, value)`` triples; ``(i, j)`` and ``(j, i)`` name the same pair."""
        acc: dict[tuple[int, int], float] = {}
        for i, j, v in entries:
            if not (0 <= i < dim and 0 <= j < dim):
                raise ValueError(f"entry ({i}, {j}) outside {dim}x{dim}")
            key = (i, j) if i <= j else (j, i)
            acc[key] = acc.get(key, 0.0) + float(v)
        keys = sorted(k for k, v in acc.items() if v != 0.0)
        rows = np.array([k[0] for k in keys], dtype=np.intp)
        cols = np.array([k[1] for k in keys], dtype=np.intp)
        vals = np.array([acc[k] for k in keys], dtype=float)
        return cls(dim, rows, cols, vals)

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[self.rows, self.cols] = self.vals
        out[self.cols, self.rows] = self.vals
        return out

    def inner(self, X: np.ndarray) -> float:
        """tr(A X) for symmetric X."""
        off = np.where(self.rows == self.cols, 1.0, 2.0)
        return float(np.sum(off * self.vals * X[self.rows, self.cols]))


@dataclass(frozen=True)
class SdpProblem:
    dim: int
    cost: np.ndarray
    constraints: tuple[tuple[SparseSymMatrix, float], ...]

    def __post_init__(self):
        C = np.asarray(self.cost, dtype=float)
        if C.shape != (self.dim, self.dim):
            raise ValueError(f"cost is {C.shape}, expected {(self.dim, self.dim)}")
        if not np.allclose(C, C.T, atol=1e-12):
            raise ValueError("cost matrix is not symmetric")
        for j, (A, _) in enumerate(self.constraints):
            if A.dim != self.dim:
                raise ValueError(f"constraint {j} has dimension {A.dim}, expected {self.dim}")
        object.__setattr__(self, "cost", C)
        object.__setattr__(self, "constraints", tuple((A, float(b)) for A, b in self.constraints))

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def rhs(self) -> np.ndarray:
        return np.array([b for _, b in self.constraints], dtype=float)

    def with_constraint(self, A: SparseSymMatrix, b: float) -> "SdpProblem":
        return SdpProblem(self.dim, self.cost, self.constraints + ((A, b),))


@dataclass(frozen=True)
class SdpSolution:
    primal_X: np.ndarray
    dual_y: np.ndarray
    dual_Z: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: SdpStatus
    history: list = field(default_factory=list, repr=False, compare=False)


class _Operator:
    """The map X -> (tr(A_j X))_j, its adjoint, and Schur complement assembly.

    Constraints are split: ones with few nonzeros are handled through a
    gathered Kronecker block over the union of their positions, the rest
    (e.g. dense cuts) through explicit products X A_j Z^{-1}.
    """

    def __init__(self, problem: SdpProblem, dense_nnz: int | None = None):
        n, m = problem.dim, problem.m
        self.n, self.m = n, m
        if dense_nnz is None:
            dense_nnz = max(n, 4)
        pos_index: dict[tuple[int, int], int] = {}
        rows, cols, vals = [], [], []
        self.sparse_idx, self.dense_idx = [], []
        for k, (A, _) in enumerate(problem.constraints):
            if A.nnz > dense_nnz:
                self.dense_idx.append(k)
            else:
                self.sparse_idx.append(k)
            for r, c, v in zip(A.rows.tolist(), A.cols.tolist(), A.vals.tolist()):
                e = pos_index.setdefault((r, c), len(pos_index))
                rows.append(k)
                cols.append(e)
                # A = sum_e c_e (E_pq + E_qp) / 2
                vals.append(v if r == c else 2.0 * v)
        P = len(pos_index)
        self.p = np.array([k[0] for k in pos_index], dtype=np.intp)
        self.q = np.array([k[1] for k in pos_index], dtype=np.intp)
        self.coef = sp.csr_matrix((vals, (rows, cols)), shape=(m, P))
        self.coef_sparse = self.coef[self.sparse_idx] if self.sparse_idx else None
        sp_pos = np.unique(self.coef_sparse.indices) if self.coef_sparse is not None else np.array([], dtype=np.intp)
        self.sp_pos = sp_pos
        if self.coef_sparse is not None:
            self.coef_sparse = self.coef_sparse[:, sp_pos]
        self.dense_mats = [problem.constraints[k][0].toarray() for k in self.dense_idx]

    def apply(self, X: np.ndarray) -> np.ndarray:
        return self.coef @ X[self.p, self.q]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        v = 0.5 * (self.coef.T @ y)
        out = np.zeros((self.n, self.n))
        np.add.at(out, (self.p, self.q), v)
        np.add.at(out, (self.q, self.p), v)
        return out

    def schur(self, X: np.ndarray, G: np.ndarray) -> np.ndarray:
        """M_kl = tr(A_k X A_l G) with G = Z^{-1}."""
        M = np.zeros((self.m, self.m))
        if self.sparse_idx:
            p, q = self.p[self.sp_pos], self.q[self.sp_pos]
            K = G[np.ix_(q, p)] * X[np.ix_(p, q)]
            K += G[np.ix_(q, q)] * X[np.ix_(p, p)]
            K += G[np.ix_(p, p)] * X[np.ix_(q, q)]
            K += G[np.ix_(p, q)] * X[np.ix_(q, p)]
            K *= 0.25
            Cs = self.coef_sparse
            block = Cs @ (Cs @ K).T
            idx = np.asarray(self.sparse_idx)
            M[np.ix_(idx, idx)] = block
        for k, A in zip(self.dense_idx, self.dense_mats):
            S = X @ A @ G
            row = self.apply(0.5 * (S + S.T))
            M[k, :] = row
            M[:, k] = row
        return 0.5 * (M + M.T)


class _Breakdown(Exception):
    pass


def _sym(S: np.ndarray) -> np.ndarray:
    return 0.5 * (S + S.T)


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest a with L L' + a D still PSD (inf if D is PSD)."""
    W = la.solve_triangular(L, D, lower=True)
    W = la.solve_triangular(L, W.T, lower=True)
    lam = la.eigvalsh(_sym(W)).min()
    return math.inf if lam >= 0 else -1.0 / lam


def _chol(S: np.ndarray) -> np.ndarray | None:
    try:
        return la.cholesky(S, lower=True)
    except la.LinAlgError:
        return None


def solve_sdp(problem: SdpProblem, tol: float = 1e-7, max_iter: int = 200) -> SdpSolution:
    """Solve ``problem`` to relative accuracy ``tol``.

    Convergence requires relative duality gap, primal infeasibility and dual
    infeasibility all below ``tol``. Hitting ``max_iter`` returns the last
    iterate with status MaxIterations; a breakdown of the Cholesky factors
    returns NumericalFailure. Neither raises.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    n, m = problem.dim, problem.m
    C, b = problem.cost, problem.rhs
    op = _Operator(problem)

    norm_b = float(np.linalg.norm(b))
    norm_C = float(np.linalg.norm(C))
    a_norms = np.array([np.linalg.norm(A.toarray()) for A, _ in problem.constraints]) if m else np.zeros(0)
    if m:
        xi = max(10.0, math.sqrt(n), n * float(np.max((1.0 + np.abs(b)) / (1.0 + a_norms))))
        eta = max(10.0, math.sqrt(n), norm_C, float(a_norms.max()))
    else:
        xi = eta = max(10.0, math.sqrt(n), norm_C)
    X = xi * np.eye(n)
    Z = eta * np.eye(n)
    y = np.zeros(m)

    status = SdpStatus.MAX_ITERATIONS
    history = []
    it = 0
    pobj = dobj = pinf = dinf = math.nan

    def measures(X, y, Z):
        rp = b - op.apply(X)
        Rd = op.adjoint(y) - Z - C
        pobj = float(np.sum(C * X))
        dobj = float(b @ y)
        pinf = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dinf = float(np.linalg.norm(Rd)) / (1.0 + norm_C)
        return rp, Rd, pobj, dobj, pinf, dinf

    for it in range(max_iter + 1):
        rp, Rd, pobj, dobj, pinf, dinf = measures(X, y, Z)
        mu = float(np.sum(X * Z)) / n
        relgap = abs(dobj - pobj) / (1.0 + abs(pobj) + abs(dobj))
        compl = n * mu / (1.0 + abs(pobj) + abs(dobj))
        history.append((it, pobj, dobj, pinf, dinf, mu))
        log.debug("it %3d pobj %.9g dobj %.9g pinf %.2e dinf %.2e mu %.2e", it, pobj, dobj, pinf, dinf, mu)
        if max(relgap, compl) < tol and pinf < tol and dinf < tol:
            status = SdpStatus.OPTIMAL
            break
        if it == max_iter:
            break
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
            status = SdpStatus.NUMERICAL_FAILURE
            break

        try:
            with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
                Lz = _chol(Z)
                Lx = _chol(X)
                if Lz is None or Lx is None:
                    raise _Breakdown
                Lz_inv = la.solve_triangular(Lz, np.eye(n), lower=True)
                G = Lz_inv.T @ Lz_inv

                M = op.schur(X, G)
                factor = None
                reg = 0.0
                scale = max(1.0, float(np.max(np.abs(np.diag(M))))) if m else 1.0
                for _ in range(8):
                    try:
                        factor = la.cho_factor(M + reg * np.eye(m), lower=True)
                        break
                    except la.LinAlgError:
                        reg = 1e-14 * scale if reg == 0.0 else reg * 100.0
                if factor is None and m:
                    raise _Breakdown

                XRdG = _sym(X @ Rd @ G)

                def direction(sigma_mu, corr):
                    # R is the symmetrized target for dX before the dZ coupling term.
                    R = sigma_mu * G - X
                    if corr is not None:
                        R -= _sym(corr @ G)
                    rhs = op.apply(R - XRdG) - rp
                    dy = la.cho_solve(factor, rhs) if m else np.zeros(0)
                    dZ = op.adjoint(dy) + Rd
                    dX = R - _sym(X @ dZ @ G)
                    return dX, dy, dZ

                dXa, dya, dZa = direction(0.0, None)
                ap = min(1.0, STEP_FRACTION * _max_step(Lx, dXa))
                ad = min(1.0, STEP_FRACTION * _max_step(Lz, dZa))
                mu_aff = float(np.sum((X + ap * dXa) * (Z + ad * dZa))) / n
                sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

                dX, dy, dZ = direction(sigma * mu, dXa @ dZa)
                ap = min(1.0, STEP_FRACTION * _max_step(Lx, dX))
                ad = min(1.0, STEP_FRACTION * _max_step(Lz, dZ))

                Xn, Zn = X + ap * dX, Z + ad * dZ
                # Guard against round-off pushing an iterate off the cone.
                while _chol(Xn) is None and ap > 1e-12:
                    ap *= 0.8
                    Xn = X + ap * dX
                while _chol(Zn) is None and ad > 1e-12:
                    ad *= 0.8
                    Zn = Z + ad * dZ
                X, Z, y = _sym(Xn), _sym(Zn), y + ad * dy
        except (_Breakdown, la.LinAlgError, ValueError, FloatingPointError):
            status = SdpStatus.NUMERICAL_FAILURE
            break

    rp, Rd, pobj, dobj, pinf, dinf = measures(X, y, Z)
    return SdpSolution(
        primal_X=X,
        dual_y=y,
        dual_Z=Z,
        primal_obj=pobj,
        dual_obj=dobj,
        gap=dobj - pobj,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        iterations=it,
        status=status,
        history=history,
    )


def certified_upper_bound(problem: SdpProblem, y: np.ndarray, trace_bound: float) -> float:
    """Upper bound on the primal optimum valid for any dual vector ``y``.

    For every feasible X with tr(X) <= trace_bound,
    tr(CX) = b'y - tr((A*y - C) X) <= b'y + trace_bound * max(0, -lambda_min(A*y - C)).
    """
    op = _Operator(problem)
    S = op.adjoint(np.asarray(y, dtype=float)) - problem.cost
    lam = float(la.eigvalsh(_sym(S)).min())
    return float(problem.rhs @ y) + trace_bound * max(0.0, -lam)


def constraint_residuals(problem: SdpProblem, X: np.ndarray) -> np.ndarray:
    return np.array([A.inner(X) - bj for A, bj in problem.constraints])


def format_sparse_dump(problem: SdpProblem) -> str:
    """Text dump, one nonzero per line: ``j row col value`` (1-based, upper triangle).

    ``j = 0`` is the cost matrix, ``j >= 1`` the constraints; the first lines
    give the dimension, constraint count and right-hand sides.
    """
    lines = [f"{problem.dim}", f"{problem.m}", " ".join(repr(float(v)) for v in problem.rhs)]
    iu, ju = np.triu_indices(problem.dim)
    C = problem.cost
    for i, j in zip(iu.tolist(), ju.tolist()):
        if C[i, j] != 0.0:
            lines.append(f"0 {i + 1} {j + 1} {float(C[i, j])!r}")
    for k, (A, _) in enumerate(problem.constraints, start=1):
        for r, c, v in zip(A.rows.tolist(), A.cols.tolist(), A.vals.tolist()):
            lines.append(f"{k} {r + 1} {c + 1} {v!r}")
    return "\n".join(lines) + "\n"


def parse_sparse_dump(text: str) -> SdpProblem:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim, m = int(lines[0]), int(lines[1])
    rhs = [float(t) for t in lines[2].split()] if m else []
    cost = np.zeros((dim, dim))
    entries: list[list] = [[] for _ in range(m)]
    for ln in lines[3 if m else 2:]:
        k, r, c, v = ln.split()
        k, r, c, v = int(k), int(r) - 1, int(c) - 1, float(v)
        if k == 0:
            cost[r, c] = cost[c, r] = v
        else:
            entries[k - 1].append((r, c, v))
    cons = tuple((SparseSymMatrix.from_entries(dim, e), bj) for e, bj in zip(entries, rhs))
    return SdpProblem(dim, cost, cons)


def dense_problem(cost: np.ndarray, constraints: Sequence[tuple[np.ndarray, float]]) -> SdpProblem:
    """Convenience constructor from dense symmetric matrices."""
    C = np.asarray(cost, dtype=float)
    n = C.shape[0]
    cons = []
    for A, bj in constraints:
        A = np.asarray(A, dtype=float)
        iu, ju = np.triu_indices(n)
        mask = A[iu, ju] != 0
        cons.append((SparseSymMatrix.from_entries(n, zip(iu[mask], ju[mask], A[iu, ju][mask])), bj))
    return SdpProblem(n, C, tuple(cons))
