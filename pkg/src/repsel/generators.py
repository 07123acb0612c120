"""Families of representation matrices and structural statistics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from repsel.errors import InvalidSpec
from repsel.matrix import ONE, ZERO, RepresentationMatrix, to_fraction, validate_matrix

# Five agents: A and B in one party, C, D, E in the other. A and E seek
# power, B and D are partisan, C is a moderate.
RUNNING_EXAMPLE_ROWS = (
    ("1", "0", "0", "0", "0"),
    ("2/3", "1/3", "0", "0", "0"),
    ("0", "1/3", "2/3", "0", "0"),
    ("0", "0", "2/5", "1/5", "2/5"),
    ("0", "0", "0", "0", "1"),
)
RUNNING_EXAMPLE_LABELS = ("A", "B", "C", "D", "E")

FAMILIES = ("identity", "uniform", "example", "block", "power", "random")
DEFAULT_DENOMINATOR_CAP = 10**6


def running_example() -> RepresentationMatrix:
    return validate_matrix(RUNNING_EXAMPLE_ROWS, RUNNING_EXAMPLE_LABELS)


@dataclass(frozen=True)
class FamilySpec:
    """Parameters of a matrix family.

    ``blocks`` and ``intra_mass`` apply to ``block``; ``trace_mass`` to
    ``power``; ``concentration``, ``seed``, ``support`` and
    ``denominator_cap`` to ``random``. ``support`` caps the number of
    nonzero entries per row (all ``n`` when unset).
    """

    family: str
    n: int
    blocks: Optional[tuple[int, ...]] = None
    intra_mass: Fraction = ONE
    trace_mass: Fraction = Fraction(1, 2)
    concentration: Fraction = ONE
    seed: int = 0
    support: Optional[int] = None
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP

    def __post_init__(self):
        for name in ("intra_mass", "trace_mass", "concentration"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise InvalidSpec("n must be positive")
        if not ZERO <= self.intra_mass <= ONE:
            raise InvalidSpec("intra_mass must lie in [0, 1]")
        if not ZERO <= self.trace_mass <= ONE:
            raise InvalidSpec("trace_mass must lie in [0, 1]")
        if self.concentration <= 0:
            raise InvalidSpec("concentration must be positive")
        if self.family == "block":
            if not self.blocks or sum(self.blocks) != self.n or min(self.blocks) < 1:
                raise InvalidSpec(f"block sizes {self.blocks} must be positive and sum to n={self.n}")
        if self.family == "example" and self.n != 5:
            raise InvalidSpec("the running example has exactly 5 agents")
        if self.support is not None and not 1 <= self.support <= self.n:
            raise InvalidSpec(f"support must lie in 1..{self.n}")
        if self.denominator_cap < 1:
            raise InvalidSpec("denominator_cap must be positive")


def _spread(total: Fraction, cols: Sequence[int], n: int) -> list[Fraction]:
    row = [ZERO] * n
    if cols:
        share = total / len(cols)
        for j in cols:
            row[j] = share
    return row


def _block_rows(spec: FamilySpec):
    n = spec.n
    bounds, start = [], 0
    for size in spec.blocks:
        bounds.append(range(start, start + size))
        start += size
    rows = []
    for block in bounds:
        inside = list(block)
        outside = [j for j in range(n) if j not in block]
        intra = spec.intra_mass if outside else ONE
        for _ in block:
            row = _spread(intra, inside, n)
            for j, x in enumerate(_spread(ONE - intra, outside, n)):
                row[j] += x
            rows.append(row)
    return rows


def _power_rows(spec: FamilySpec):
    n = spec.n
    if n == 1:
        return [[ONE]]
    rows = []
    for i in range(n):
        row = _spread(ONE - spec.trace_mass, [j for j in range(n) if j != i], n)
        row[i] = spec.trace_mass
        rows.append(row)
    return rows


def round_to_simplex(x: Sequence[float], cap: int) -> list[Fraction]:
    """Round a probability vector to exact fractions with denominator ``cap``.

    Largest-remainder rounding: floors first, then hands the leftover units
    to the largest fractional parts (lowest index on ties).
    """
    x = np.asarray(x, dtype=float)
    x = x / x.sum()
    scaled = x * cap
    base = np.floor(scaled).astype(np.int64)
    leftover = int(cap - base.sum())
    order = sorted(range(len(x)), key=lambda j: (-(scaled[j] - base[j]), j))
    for j in order[:leftover]:
        base[j] += 1
    return [Fraction(int(b), cap) for b in base]


def _random_rows(spec: FamilySpec):
    n = spec.n
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed & (2**64 - 1)))
    width = spec.support or n
    alpha = float(spec.concentration)
    rows = []
    for _ in range(n):
        cols = np.sort(rng.choice(n, size=width, replace=False))
        point = rng.dirichlet([alpha] * width)
        row = [ZERO] * n
        for j, p in zip(cols, round_to_simplex(point, spec.denominator_cap)):
            row[int(j)] = p
        rows.append(row)
    return rows


def generate(spec: FamilySpec) -> RepresentationMatrix:
    n = spec.n
    if spec.family == "identity":
        rows = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    elif spec.family == "uniform":
        rows = [[Fraction(1, n)] * n for _ in range(n)]
    elif spec.family == "example":
        return running_example()
    elif spec.family == "block":
        rows = _block_rows(spec)
    elif spec.family == "power":
        rows = _power_rows(spec)
    else:
        rows = _random_rows(spec)
    return validate_matrix(rows)


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                factor = m[r][c] / m[rank][c]
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class MatrixStats:
    trace: Fraction
    rank: int
    components: tuple[tuple[int, ...], ...]


def matrix_stats(gamma: RepresentationMatrix) -> MatrixStats:
    """Trace, exact rank and connected components of the support graph."""
    trace = sum((gamma[i, i] for i in range(gamma.n)), ZERO)
    graph = nx.Graph()
    graph.add_nodes_from(range(gamma.n))
    graph.add_edges_from(
        (i, j) for i in range(gamma.n) for j in gamma.support(i) if i != j
    )
    components = sorted(tuple(sorted(c)) for c in nx.connected_components(graph))
    return MatrixStats(trace, exact_rank(gamma.rows), tuple(components))
