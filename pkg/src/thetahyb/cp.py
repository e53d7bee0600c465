"""Branch and bound over the binary stable set model.

    maximize    sum_i w_i x_i
    subject to  x_i + x_j <= 1   for every edge (i, j)
                x_i in D_i, D_i subset of {0, 1}

Domains are kept as two bitmasks (vertices that may take 1, vertices that
may take 0). Propagation: a vertex fixed to 1 removes 1 from every
neighbour's domain.
"""

from __future__ import annotations

import enum
import sys
import threading
import time
from dataclasses import dataclass
from typing import Mapping

from .graph import Number, WeightedGraph
from .lds import Subproblem

TIME_CHECK_INTERVAL = 1024


class CpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    CUTOFF_REACHED = "CutoffReached"
    TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class CpModel:
    graph: WeightedGraph
    can_be_one: int
    can_be_zero: int

    @classmethod
    def unrestricted(cls, g: WeightedGraph) -> "CpModel":
        full = (1 << g.n) - 1
        return cls(g, full, full)

    @classmethod
    def with_assignment(cls, g: WeightedGraph, assignment: Mapping[int, int]) -> "CpModel":
        full = (1 << g.n) - 1
        one, zero = full, full
        for v, x in assignment.items():
            if x == 1:
                zero &= ~(1 << v)
            elif x == 0:
                one &= ~(1 << v)
            else:
                raise ValueError(f"vertex {v}: value {x} is not binary")
        return cls(g, one, zero)

    def domain(self, v: int) -> frozenset[int]:
        d = set()
        if (self.can_be_zero >> v) & 1:
            d.add(0)
        if (self.can_be_one >> v) & 1:
            d.add(1)
        return frozenset(d)

    @property
    def domains(self) -> tuple[frozenset[int], ...]:
        return tuple(self.domain(v) for v in range(self.graph.n))

    @property
    def fixed_ones(self) -> int:
        return self.can_be_one & ~self.can_be_zero

    @property
    def free(self) -> int:
        return self.can_be_one & self.can_be_zero


@dataclass(frozen=True)
class CpResult:
    best_value: Number | None
    best_set: frozenset[int] | None
    backtracks: int
    nodes: int
    status: CpStatus
    elapsed: float


class SharedIncumbent:
    """Monotone best-value register shared by concurrent searches."""

    def __init__(self, value: Number | None = None):
        self._value = value
        self._lock = threading.Lock()

    @property
    def value(self) -> Number | None:
        return self._value

    def offer(self, value: Number) -> bool:
        with self._lock:
            if self._value is None or value > self._value:
                self._value = value
                return True
            return False


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def propagate(model: CpModel) -> CpModel | None:
    """Fixed point of edge propagation; ``None`` if some domain becomes empty."""
    g = model.graph
    one, zero = model.can_be_one, model.can_be_zero
    done = 0
    while True:
        if (one | zero) != (1 << g.n) - 1:
            return None
        fixed = (one & ~zero) & ~done
        if not fixed:
            break
        for v in _bits(fixed):
            one &= ~g.neighbor_masks[v]
        done |= fixed
    return CpModel(g, one, zero)


def _mask_weight(g: WeightedGraph, mask: int) -> Number:
    return sum(g.weights[v] for v in _bits(mask))


def _set_of(mask: int) -> frozenset[int]:
    return frozenset(_bits(mask))


def branch_and_bound(
    model: CpModel,
    lower_cutoff: Number | None = None,
    upper_cutoff: Number | None = None,
    time_limit: float | None = None,
    shared: SharedIncumbent | None = None,
) -> CpResult:
    """Depth-first branch and bound looking for solutions strictly better than
    ``lower_cutoff``; stops as soon as one reaches ``upper_cutoff``.

    Branches on the heaviest free vertex (lowest index on ties), value 1 first.
    A node is pruned when its value plus the weight of all free vertices does
    not exceed the best known value. Every retracted branching decision counts
    as a backtrack.
    """
    start = time.perf_counter()
    g = model.graph
    red = propagate(model)
    if red is None:
        return CpResult(None, None, 0, 0, CpStatus.INFEASIBLE, time.perf_counter() - start)

    w = g.weights
    # Float weights accumulate round-off in the residual sums; prune conservatively.
    slack = 0 if g.integral_weights and all(isinstance(x, int) for x in w) else 1e-9 * float(g.total_weight)
    order = sorted(range(g.n), key=lambda i: (-w[i], i))
    adj = [sorted(a) for a in g.adjacency]
    nbmask = g.neighbor_masks
    deadline = None if time_limit is None else start + time_limit

    ones0, free0 = red.fixed_ones, red.free
    value0 = _mask_weight(g, ones0)
    fw0 = _mask_weight(g, free0)

    best_value: Number | None = None
    best_ones = 0
    nodes = 0
    backtracks = 0
    stop: CpStatus | None = None

    def threshold():
        t = lower_cutoff
        for c in (best_value, shared.value if shared is not None else None):
            if c is not None and (t is None or c > t):
                t = c
        return t

    def elapsed():
        return time.perf_counter() - start

    t0 = threshold()
    if (upper_cutoff is not None and t0 is not None and upper_cutoff <= t0) or (
        t0 is not None and value0 + fw0 <= t0 - slack
    ):
        return CpResult(None, None, 0, 0, CpStatus.CUTOFF_REACHED, elapsed())

    def dfs(ones: int, free: int, value, fw, pos: int):
        nonlocal nodes, backtracks, best_value, best_ones, stop
        nodes += 1
        if deadline is not None and nodes % TIME_CHECK_INTERVAL == 0 and time.perf_counter() > deadline:
            stop = CpStatus.TIME_LIMIT
            return
        thr = threshold()
        if thr is not None and value + fw <= thr - slack:
            return
        if not free:
            if thr is None or value > thr:
                best_value, best_ones = value, ones
                if shared is not None:
                    shared.offer(value)
                if upper_cutoff is not None and value >= upper_cutoff:
                    stop = CpStatus.OPTIMAL
            return
        while not (free >> order[pos]) & 1:
            pos += 1
        v = order[pos]
        bit = 1 << v
        wv = w[v]
        nb = nbmask[v] & free
        removed = wv
        for j in adj[v]:
            if (nb >> j) & 1:
                removed += w[j]
        dfs(ones | bit, free & ~(nb | bit), value + wv, fw - removed, pos + 1)
        if stop is not None:
            return
        backtracks += 1
        dfs(ones, free & ~bit, value, fw - wv, pos + 1)
        if stop is not None:
            return
        backtracks += 1

    limit = sys.getrecursionlimit()
    if limit < g.n + 200:
        sys.setrecursionlimit(g.n + 200)
    dfs(ones0, free0, value0, fw0, 0)

    if stop is CpStatus.TIME_LIMIT:
        status = CpStatus.TIME_LIMIT
    elif best_value is not None:
        status = CpStatus.OPTIMAL
    else:
        status = CpStatus.CUTOFF_REACHED
    best_set = _set_of(best_ones) if best_value is not None else None
    if best_set is not None:
        assert g.is_stable(best_set), "branch and bound produced an infeasible set"
    return CpResult(best_value, best_set, backtracks, nodes, status, elapsed())


def solve_subproblem(
    g: WeightedGraph,
    sub: Subproblem,
    incumbent: Number | None = None,
    upper: Number | None = None,
    time_limit: float | None = None,
    shared: SharedIncumbent | None = None,
) -> CpResult:
    model = CpModel.with_assignment(g, sub.fixed_assignment)
    return branch_and_bound(model, lower_cutoff=incumbent, upper_cutoff=upper, time_limit=time_limit, shared=shared)


def cp_only_solve(g: WeightedGraph, time_limit: float | None = None) -> CpResult:
    """Plain CP baseline: no relaxation, only the residual-weight bound."""
    return branch_and_bound(CpModel.unrestricted(g), upper_cutoff=g.total_weight, time_limit=time_limit)
