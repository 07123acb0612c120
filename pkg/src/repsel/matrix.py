"""Representation matrices, candidate sets and candidate projection.

A representation matrix is an exact row-stochastic ``n x n`` matrix whose
entry ``(i, j)`` is the probability that agent ``i`` votes for agent ``j``.
All arithmetic in this module uses :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from repsel.errors import (
    InvalidCandidates,
    MatrixError,
    NegativeEntry,
    NonSquare,
    RowSumNotOne,
    ZeroVector,
)

RationalLike = Union[Fraction, int, str, float, Decimal]

ZERO = Fraction(0)
ONE = Fraction(1)


class Fallback(str, Enum):
    """What a non-candidate with no mass on the candidate set does."""

    ABSTAIN = "abstain"
    UNIFORM = "uniform"


def to_fraction(value: RationalLike) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Strings may be ``"p/q"`` or a decimal literal. Floats are converted from
    their shortest decimal representation, so ``0.1`` becomes ``1/10`` rather
    than the binary approximation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(repr(value)))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            p, q = text.split("/", 1)
            den = int(q)
            if den <= 0:
                raise ValueError(f"denominator must be positive in {value!r}")
            return Fraction(int(p), den)
        return Fraction(Decimal(text))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def default_labels(n: int) -> tuple[str, ...]:
    if n <= 26:
        return tuple(string.ascii_uppercase[:n])
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class RepresentationMatrix:
    """Validated row-stochastic matrix. Build it with :func:`validate_matrix`."""

    rows: tuple[tuple[Fraction, ...], ...]
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def support(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, p in enumerate(self.rows[i]) if p)

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    def label_of(self, i: int) -> str:
        return self.labels[i]

    def index_of(self, name: Union[str, int]) -> int:
        """Resolve an agent label (or a decimal index) to an index."""
        if isinstance(name, int):
            if 0 <= name < self.n:
                return name
            raise InvalidCandidates(f"agent index {name} outside 0..{self.n - 1}")
        name = name.strip()
        if name in self.labels:
            return self.labels.index(name)
        if name.isdigit() and int(name) < self.n:
            return int(name)
        raise InvalidCandidates(f"unknown agent {name!r}")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "labels": list(self.labels),
            "rows": [[format_fraction(x) for x in row] for row in self.rows],
        }


def validate_matrix(
    raw: Sequence[Sequence[RationalLike]],
    labels: Optional[Sequence[str]] = None,
) -> RepresentationMatrix:
    """Check stochasticity exactly and return an immutable matrix.

    Raises :class:`NonSquare`, :class:`NegativeEntry` or
    :class:`RowSumNotOne` naming the offending location.
    """
    n = len(raw)
    lengths = tuple(len(r) for r in raw)
    if n == 0 or any(length != n for length in lengths):
        raise NonSquare(lengths)
    rows = []
    for i, raw_row in enumerate(raw):
        row = tuple(to_fraction(x) for x in raw_row)
        for j, x in enumerate(row):
            if x < 0:
                raise NegativeEntry(i, j, x)
        total = sum(row, ZERO)
        if total != 1:
            raise RowSumNotOne(i, total)
        rows.append(row)
    if labels is None:
        labels = default_labels(n)
    labels = tuple(str(x) for x in labels)
    if len(labels) != n or len(set(labels)) != n:
        raise MatrixError(f"need {n} distinct labels, got {list(labels)}")
    return RepresentationMatrix(tuple(rows), labels)


def identity(n: int) -> RepresentationMatrix:
    return validate_matrix([[int(i == j) for j in range(n)] for i in range(n)])


@dataclass(frozen=True)
class CandidateSet:
    """Nonempty, canonically sorted set of agent indices."""

    members: tuple[int, ...]

    def __post_init__(self):
        if not self.members:
            raise InvalidCandidates("candidate set must be nonempty")
        if len(set(self.members)) != len(self.members):
            raise InvalidCandidates(f"duplicate candidates in {self.members}")
        object.__setattr__(self, "members", tuple(sorted(self.members)))

    @property
    def m(self) -> int:
        return len(self.members)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @classmethod
    def everyone(cls, n: int) -> "CandidateSet":
        return cls(tuple(range(n)))

    @classmethod
    def parse(cls, gamma: RepresentationMatrix, spec: Union[str, Iterable]) -> "CandidateSet":
        """Build from ``"A,B,C"`` or an iterable of labels/indices."""
        if isinstance(spec, str):
            items = [s for s in spec.split(",") if s.strip()]
        else:
            items = list(spec)
        members = tuple(gamma.index_of(x) for x in items)
        return cls(members)

    def check(self, n: int) -> None:
        bad = [i for i in self.members if not 0 <= i < n]
        if bad:
            raise InvalidCandidates(f"candidates {bad} outside 0..{n - 1}")


@dataclass(frozen=True)
class ProjectedMatrix:
    """``base`` restricted to ``candidates``; candidates vote for themselves."""

    base: RepresentationMatrix
    candidates: CandidateSet
    rows: tuple[tuple[Fraction, ...], ...]
    abstainers: frozenset[int] = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return len(self.rows)

    def support(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, p in enumerate(self.rows[i]) if p)

    @property
    def voters(self) -> int:
        return self.n - len(self.abstainers)


def project_matrix(
    gamma: RepresentationMatrix,
    candidates: CandidateSet,
    fallback: Fallback = Fallback.ABSTAIN,
) -> ProjectedMatrix:
    n = gamma.n
    candidates.check(n)
    fallback = Fallback(fallback)
    cset = set(candidates.members)
    rows = []
    abstainers = set()
    for i, row in enumerate(gamma.rows):
        if i in cset:
            rows.append(tuple(ONE if j == i else ZERO for j in range(n)))
            continue
        mass = sum((row[j] for j in cset), ZERO)
        if mass:
            rows.append(tuple(row[j] / mass if j in cset else ZERO for j in range(n)))
        elif fallback is Fallback.UNIFORM:
            share = Fraction(1, len(cset))
            rows.append(tuple(share if j in cset else ZERO for j in range(n)))
        else:
            rows.append((ZERO,) * n)
            abstainers.add(i)
    return ProjectedMatrix(gamma, candidates, tuple(rows), frozenset(abstainers))


def column_sums(rows: Sequence[Sequence[Fraction]]) -> tuple[Fraction, ...]:
    n = len(rows[0]) if rows else 0
    return tuple(sum((row[j] for row in rows), ZERO) for j in range(n))


def expected_vote_share(gamma: Union[RepresentationMatrix, ProjectedMatrix]) -> tuple[Fraction, ...]:
    """Column sums of the matrix: the expected number of votes per agent."""
    return column_sums(gamma.rows)


def normalize_l1(v: Sequence[RationalLike]) -> tuple[Fraction, ...]:
    values = tuple(to_fraction(x) for x in v)
    total = sum((abs(x) for x in values), ZERO)
    if total == 0:
        raise ZeroVector("cannot normalize a zero vector")
    return tuple(x / total for x in values)


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def truncate2(x: Union[Fraction, float]) -> str:
    """Two-decimal rendering truncated toward zero (13/15 -> '0.86')."""
    if isinstance(x, float):
        x = Fraction(x)
    hundredths = int(Fraction(x) * 100)  # int() truncates toward zero
    sign = "-" if hundredths < 0 or (hundredths == 0 and x < 0) else ""
    hundredths = abs(hundredths)
    return f"{sign}{hundredths // 100}.{hundredths % 100:02d}"


def load_matrix(path: Union[str, Path]) -> RepresentationMatrix:
    with open(path) as fh:
        data = json.load(fh, parse_float=Decimal)
    return matrix_from_json(data)


def matrix_from_json(data: dict) -> RepresentationMatrix:
    try:
        rows = data["rows"]
    except (KeyError, TypeError):
        raise MatrixError("matrix JSON needs a 'rows' field") from None
    gamma = validate_matrix(rows, data.get("labels"))
    if "n" in data and data["n"] != gamma.n:
        raise MatrixError(f"declared n={data['n']} but found {gamma.n} rows")
    return gamma


def save_matrix(gamma: RepresentationMatrix, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(gamma.to_json(), fh, indent=2)
        fh.write("\n")
