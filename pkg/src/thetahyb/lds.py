"""Limited discrepancy enumeration of subproblems over the V0 good/bad split.

A subproblem at discrepancy k assigns the bad value to exactly k of the V0
vertices and the good value to the rest; V1 stays free. Levels 0..|V0|
together cover every assignment of V0 exactly once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

from .rounding import BAD_VALUE, GOOD_VALUE, DomainPartition


@dataclass(frozen=True)
class Subproblem:
    discrepancy: int
    flipped: tuple[int, ...]  # positions in v0
    fixed_assignment: Mapping[int, int]

    @property
    def flipped_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, x in self.fixed_assignment.items() if x == BAD_VALUE)


def make_subproblem(partition: DomainPartition, flipped: tuple[int, ...]) -> Subproblem:
    bad = set(flipped)
    assignment = {v: (BAD_VALUE if pos in bad else GOOD_VALUE) for pos, v in enumerate(partition.v0)}
    return Subproblem(len(flipped), tuple(flipped), assignment)


def subproblems_at(partition: DomainPartition, k: int) -> Iterator[Subproblem]:
    """Lazily yield all C(|v0|, k) subproblems, flip sets in lexicographic order."""
    if k < 0:
        raise ValueError("discrepancy must be non-negative")
    size = len(partition.v0)
    if k > size:
        return
    for flipped in itertools.combinations(range(size), k):
        yield make_subproblem(partition, flipped)


def total_subproblems(partition: DomainPartition, max_k: int) -> int:
    size = len(partition.v0)
    return sum(math.comb(size, k) for k in range(min(max_k, size) + 1))
