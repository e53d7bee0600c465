"""Weighted graphs, DIMACS I/O and instance generators.

Vertices are 0-based internally and 1-based in DIMACS files.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

Number = int | float


class DimacsFormatError(ValueError):
    """Malformed DIMACS input. ``lineno`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno else ""
        super().__init__(prefix + message)


class VertexRangeError(DimacsFormatError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive vertex weights.

    ``edges`` holds normalized pairs ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    weights: tuple[Number, ...]
    adjacency: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    neighbor_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if len(self.weights) != self.n:
            raise ValueError(f"expected {self.n} weights, got {len(self.weights)}")
        for i, w in enumerate(self.weights):
            if not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
                raise ValueError(f"vertex {i} has non-positive or invalid weight {w!r}")
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge {(i, j)}")
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "adjacency", tuple(frozenset(a) for a in adj))
        masks = []
        for a in adj:
            mask = 0
            for j in a:
                mask |= 1 << j
            masks.append(mask)
        object.__setattr__(self, "neighbor_masks", tuple(masks))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], weights: Sequence[Number] | None = None):
        """Build a graph, normalizing edge orientation. Self-loops and duplicates raise."""
        seen: set[tuple[int, int]] = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            e = (i, j) if i < j else (j, i)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        if weights is None:
            weights = [1] * n
        return cls(n, frozenset(seen), tuple(weights))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> Number:
        return sum(self.weights)

    @property
    def integral_weights(self) -> bool:
        return all(float(w).is_integer() for w in self.weights)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_stable(self, vertices: Iterable[int]) -> bool:
        chosen = set(vertices)
        return all(not (self.adjacency[v] & chosen) for v in chosen)

    def weight_of(self, vertices: Iterable[int]) -> Number:
        return sum(self.weights[v] for v in vertices)


def _parse_weight(token: str, lineno: int) -> Number:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise DimacsFormatError(f"bad weight {token!r}", lineno) from None


def parse_dimacs(text: str | TextIO) -> WeightedGraph:
    """Parse DIMACS ASCII (``c``, ``p edge``, ``e`` and weight ``n`` lines)."""
    stream = io.StringIO(text) if isinstance(text, str) else text
    n = m_declared = None
    edges: set[tuple[int, int]] = set()
    weights: dict[int, Number] = {}

    def vertex(tok: str, lineno: int) -> int:
        try:
            v = int(tok)
        except ValueError:
            raise DimacsFormatError(f"bad vertex index {tok!r}", lineno) from None
        if not 1 <= v <= n:
            raise VertexRangeError(f"vertex {v} outside 1..{n}", lineno)
        return v - 1

    for lineno, raw in enumerate(stream, start=1):
        parts = raw.split()
        if not parts:
            continue
        kind = parts[0]
        if kind == "c":
            continue
        if kind == "p":
            if n is not None:
                raise DimacsFormatError("second p-line", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise DimacsFormatError("expected 'p edge <n> <m>'", lineno)
            try:
                n, m_declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsFormatError("non-integer counts in p-line", lineno) from None
            if n < 1 or m_declared < 0:
                raise DimacsFormatError("invalid counts in p-line", lineno)
            continue
        if n is None:
            raise DimacsFormatError(f"{kind!r} line before p-line", lineno)
        if kind == "e":
            if len(parts) != 3:
                raise DimacsFormatError("expected 'e <i> <j>'", lineno)
            i, j = vertex(parts[1], lineno), vertex(parts[2], lineno)
            if i == j:
                raise DimacsFormatError(f"self-loop at vertex {i + 1}", lineno)
            e = (min(i, j), max(i, j))
            if e in edges:
                raise DimacsFormatError(f"duplicate edge {e[0] + 1} {e[1] + 1}", lineno)
            edges.add(e)
        elif kind == "n":
            if len(parts) != 3:
                raise DimacsFormatError("expected 'n <i> <w>'", lineno)
            v = vertex(parts[1], lineno)
            w = _parse_weight(parts[2], lineno)
            if not w > 0:
                raise DimacsFormatError(f"non-positive weight {parts[2]}", lineno)
            weights[v] = w
        else:
            raise DimacsFormatError(f"unknown line type {kind!r}", lineno)

    if n is None:
        raise DimacsFormatError("missing p-line")
    if len(edges) != m_declared:
        raise DimacsFormatError(f"p-line declares {m_declared} edges, found {len(edges)}")
    return WeightedGraph(n, frozenset(edges), tuple(weights.get(i, 1) for i in range(n)))


def read_dimacs(path) -> WeightedGraph:
    with open(path, encoding="ascii") as f:
        return parse_dimacs(f)


def _format_weight(w: Number) -> str:
    if isinstance(w, int):
        return str(w)
    return repr(float(w))


def write_dimacs(g: WeightedGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"c {c}" for c in comment.splitlines())
    lines.append(f"p edge {g.n} {g.m}")
    lines.extend(f"n {i + 1} {_format_weight(w)}" for i, w in enumerate(g.weights))
    lines.extend(f"e {i + 1} {j + 1}" for i, j in g.sorted_edges())
    return "\n".join(lines) + "\n"


def gen_random_graph(n: int, density: float, seed: int | None = None) -> WeightedGraph:
    """Random weighted graph: each pair is an edge with probability ``density``,
    weights uniform on {1, ..., n}."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density {density} outside [0, 1]")
    rng = np.random.default_rng(seed)
    weights = tuple(int(w) for w in rng.integers(1, n + 1, size=n))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
    return WeightedGraph(n, edges, weights)


def instance_name(n: int, density: float) -> str:
    """Name like ``g50d005`` for 50 vertices at density 0.05."""
    return f"g{n}d{round(Fraction(density).limit_denominator(1000) * 100):03d}"


def _word_bits(w: int, k: int) -> list[int]:
    return [(w >> (k - 1 - i)) & 1 for i in range(k)]


def _bits_word(bits: Sequence[int]) -> int:
    w = 0
    for b in bits:
        w = (w << 1) | b
    return w


def _transposition_ball(w: int, k: int, end_around: bool) -> frozenset:
    bits = _word_bits(w, k)
    pairs = [(i, i + 1) for i in range(k - 1)]
    if end_around:
        pairs.append((k - 1, 0))
    out = {w}
    for i, j in pairs:
        if bits[i] != bits[j]:
            c = list(bits)
            c[i], c[j] = c[j], c[i]
            out.add(_bits_word(c))
    return frozenset(out)


def _deletion_ball(w: int, k: int) -> frozenset:
    bits = _word_bits(w, k)
    return frozenset(tuple(bits[:i] + bits[i + 1:]) for i in range(k))


CODING_FAMILIES = ("1tc", "1et", "1dc")


def coding_graph(family: str, word_length: int) -> WeightedGraph:
    """Conflict graph of single-error-correcting binary codes, unit weights.

    Vertices are the ``2**word_length`` binary words; two words are adjacent
    when their single-error balls intersect, so stable sets are codes.
    ``1tc``: adjacent transpositions, ``1et``: transpositions including the
    end-around pair, ``1dc``: single deletions.
    """
    if family not in CODING_FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {CODING_FAMILIES}")
    k = word_length
    n = 1 << k
    if family == "1dc":
        balls = [_deletion_ball(w, k) for w in range(n)]
    else:
        balls = [_transposition_ball(w, k, family == "1et") for w in range(n)]
    edges = frozenset((a, b) for a in range(n) for b in range(a + 1, n) if balls[a] & balls[b])
    return WeightedGraph(n, edges, (1,) * n)
