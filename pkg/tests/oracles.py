"""Independent reference computations used by the tests.

Nothing here imports the solver modules except the graph type.
"""

from __future__ import annotations

import math

import numpy as np

from thetahyb.graph import WeightedGraph


def _stable_masks(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """All 2^n subsets as bitmasks, with a boolean stability flag each."""
    masks = np.arange(1 << g.n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for i, j in g.edges:
        ok &= ~(((masks >> i) & 1).astype(bool) & ((masks >> j) & 1).astype(bool))
    return masks, ok


def _mask_weights(g: WeightedGraph, masks: np.ndarray) -> np.ndarray:
    total = np.zeros(masks.size, dtype=float)
    for i, w in enumerate(g.weights):
        total += ((masks >> i) & 1) * float(w)
    return total


def brute_force_alpha(g: WeightedGraph) -> tuple[float, frozenset[int]]:
    """Exhaustive 2^n enumeration of the maximum-weight stable set."""
    masks, ok = _stable_masks(g)
    weights = np.where(ok, _mask_weights(g, masks), -1.0)
    best = int(np.argmax(weights))
    return float(weights[best]), frozenset(i for i in range(g.n) if (best >> i) & 1)


def brute_force_restricted(g: WeightedGraph, assignment: dict[int, int]) -> float | None:
    """Best stable set weight among sets agreeing with a partial 0/1 assignment."""
    masks, ok = _stable_masks(g)
    for v, x in assignment.items():
        ok &= ((masks >> v) & 1) == x
    if not ok.any():
        return None
    return float(_mask_weights(g, masks)[ok].max())


def brute_force_levels(g: WeightedGraph, v0) -> dict[int, float]:
    """Best stable set weight per discrepancy level: level k holds the sets
    containing exactly |v0| - k vertices of v0."""
    masks, ok = _stable_masks(g)
    weights = _mask_weights(g, masks)
    inside = np.zeros(masks.size, dtype=np.int64)
    for v in v0:
        inside += (masks >> v) & 1
    levels = len(v0) - inside
    out = {}
    for k in np.unique(levels[ok]).tolist():
        out[int(k)] = float(weights[ok & (levels == k)].max())
    return out


def odd_cycle_theta(n: int) -> float:
    c = math.cos(math.pi / n)
    return n * c / (1 + c)


def cycle(n: int, weights=None) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], weights)


def random_bipartite(n: int, density: float, seed: int, unit: bool = True) -> WeightedGraph:
    rng = np.random.default_rng(seed)
    left = int(rng.integers(1, n))
    edges = [(i, j) for i in range(left) for j in range(left, n) if rng.random() < density]
    weights = None if unit else [int(w) for w in rng.integers(1, n + 1, size=n)]
    return WeightedGraph.from_edges(n, edges, weights)
