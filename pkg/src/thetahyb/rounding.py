"""Greedy rounding of relaxation scores into a stable set and a V0/V1 split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .graph import Number, WeightedGraph

GOOD_VALUE = 1
BAD_VALUE = 0


@dataclass(frozen=True)
class DomainPartition:
    """``v0`` in selection order; every v0 vertex has good value 1 and bad value 0.
    ``v1`` vertices keep the domain {0, 1}."""

    v0: tuple[int, ...]
    v1: tuple[int, ...]
    scores: tuple[float, ...]


@dataclass(frozen=True)
class RoundedSolution:
    selected: frozenset[int]
    value: Number
    is_stable: bool = True


def greedy_partition(g: WeightedGraph, scores: Sequence[float]) -> DomainPartition:
    """Repeatedly select the unhandled vertex with the highest score (ties to the
    lowest index) and mark it together with its unhandled neighbours as handled."""
    scores = tuple(float(s) for s in scores)
    if len(scores) != g.n:
        raise ValueError(f"expected {g.n} scores, got {len(scores)}")
    if not all(math.isfinite(s) for s in scores):
        raise ValueError("scores must be finite")
    order = sorted(range(g.n), key=lambda i: (-scores[i], i))
    handled = [False] * g.n
    v0 = []
    for i in order:
        if handled[i]:
            continue
        v0.append(i)
        handled[i] = True
        for j in g.adjacency[i]:
            handled[j] = True
    chosen = set(v0)
    v1 = tuple(i for i in range(g.n) if i not in chosen)
    return DomainPartition(tuple(v0), v1, scores)


def greedy_round(g: WeightedGraph, scores: Sequence[float]) -> RoundedSolution:
    part = greedy_partition(g, scores)
    selected = frozenset(part.v0)
    return RoundedSolution(selected, g.weight_of(part.v0), g.is_stable(selected))
