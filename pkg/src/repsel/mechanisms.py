"""Expected voting weights of representative-body selection mechanisms.

Five mechanisms are supported: direct democracy, first-past-the-post (a
single winner), proxy voting, liquid democracy and sortition. Stochastic
mechanisms are evaluated either exactly, by enumerating every vote profile
drawn from the (projected) representation matrix, or by seeded Monte Carlo.

Exact results are tuples of :class:`~fractions.Fraction`; Monte Carlo
results are floats with per-coordinate standard errors.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from repsel.errors import InvalidBodySize, InvalidSpec, StateSpaceTooLarge
from repsel.matrix import (
    ONE,
    ZERO,
    CandidateSet,
    Fallback,
    ProjectedMatrix,
    RepresentationMatrix,
    column_sums,
    project_matrix,
)

DEFAULT_GUARD = 10**7
MC_BLOCK = 8192

ABSTAIN = None


def current_guard() -> int:
    """Enumeration guard, overridable through ``REPSEL_GUARD``."""
    value = os.environ.get("REPSEL_GUARD")
    return int(value) if value else DEFAULT_GUARD


class Kind(str, Enum):
    DIRECT = "direct"
    FPTP = "fptp"
    PROXY = "proxy"
    LIQUID = "liquid"
    SORTITION = "sortition"

    @property
    def closed(self) -> bool:
        return self in (Kind.FPTP, Kind.PROXY)


class TieRule(str, Enum):
    LEX = "lex"
    SPLIT = "split"


@dataclass(frozen=True)
class Exact:
    def __str__(self):
        return "exact"


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int = 0
    # scheduling only; never changes the result
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidSpec("Monte Carlo needs at least one sample")

    def __str__(self):
        return "mc"


EXACT = Exact()


@dataclass(frozen=True)
class MechanismSpec:
    kind: Kind
    k: Optional[int] = None
    candidates: Optional[CandidateSet] = None
    tie_rule: TieRule = TieRule.LEX
    fallback: Fallback = Fallback.ABSTAIN
    method: Union[Exact, MonteCarlo] = EXACT

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "tie_rule", TieRule(self.tie_rule))
        object.__setattr__(self, "fallback", Fallback(self.fallback))
        if self.kind is Kind.SORTITION and self.k is None:
            raise InvalidSpec("sortition requires a body size k")
        if self.kind is Kind.FPTP and self.k not in (None, 1):
            raise InvalidSpec("only single-winner first-past-the-post (k=1) is supported")
        if self.kind.closed and self.candidates is None:
            raise InvalidSpec(f"{self.kind.value} requires a candidate set")

    def check(self, n: int) -> None:
        if self.k is not None and not 1 <= self.k <= n:
            raise InvalidBodySize(f"body size k={self.k} outside 1..{n}")
        if self.candidates is not None:
            self.candidates.check(n)

    def with_candidates(self, candidates: CandidateSet) -> "MechanismSpec":
        return MechanismSpec(
            self.kind, self.k, candidates, self.tie_rule, self.fallback, self.method
        )


@dataclass(frozen=True)
class ExpectedWeightVector:
    weights: tuple
    spec: MechanismSpec
    stderr: Optional[tuple[float, ...]] = None
    abstainers: frozenset = frozenset()

    @property
    def exact(self) -> bool:
        return self.stderr is None

    @property
    def l1(self):
        return sum(self.weights, ZERO if self.exact else 0.0)

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


@dataclass(frozen=True)
class VoteProfile:
    """One joint realization of every agent's vote; ``None`` means abstain."""

    choices: tuple[Optional[int], ...]
    probability: Fraction


# -- enumeration -----------------------------------------------------------

Rows = Sequence[Sequence[Fraction]]


def _integer_options(rows: Rows):
    """Per row: list of (target, numerator) over a per-row common denominator.

    Returns the options and the product of the row denominators, so the
    probability of a profile is ``prod(numerators) / denominator``.
    """
    options = []
    denominator = 1
    for row in rows:
        support = [(j, p) for j, p in enumerate(row) if p]
        if not support:
            options.append([(ABSTAIN, 1)])
            continue
        lcm = reduce(math.lcm, (p.denominator for _, p in support), 1)
        options.append([(j, p.numerator * (lcm // p.denominator)) for j, p in support])
        denominator *= lcm
    return options, denominator


def profile_count(rows: Rows) -> int:
    """Number of profiles in the product of row supports."""
    return math.prod(max(1, sum(1 for p in row if p)) for row in rows)


def _check_guard(size: int, guard: Optional[int]) -> None:
    guard = current_guard() if guard is None else guard
    if size > guard:
        raise StateSpaceTooLarge(size, guard)


def _rows_of(matrix) -> Rows:
    return matrix.rows


def enumerate_profiles(
    matrix: Union[RepresentationMatrix, ProjectedMatrix],
    guard: Optional[int] = None,
) -> Iterator[VoteProfile]:
    """Yield every vote profile with its exact probability.

    Profiles are produced in lexicographic order of the row choices. All-zero
    rows (abstainers of a projected matrix) always produce ``None``.
    """
    rows = _rows_of(matrix)
    _check_guard(profile_count(rows), guard)
    for choices, numerator, denominator in _enumerate_numerators(rows):
        yield VoteProfile(choices, Fraction(numerator, denominator))


def _enumerate_numerators(rows: Rows, prefix=()):
    """Yield (choices, numerator, denominator) for every profile."""
    options, denominator = _integer_options(rows)
    n = len(options)
    choices: list = [None] * n
    # seed the fixed prefix
    start_num = 1
    for i, target in enumerate(prefix):
        num = dict(options[i])[target]
        choices[i] = target
        start_num *= num

    def walk(i, num):
        if i == n:
            yield tuple(choices), num, denominator
            return
        for target, a in options[i]:
            choices[i] = target
            yield from walk(i + 1, num * a)

    yield from walk(len(prefix), start_num)


# -- closed-form mechanisms ------------------------------------------------


def direct_democracy(n: int) -> ExpectedWeightVector:
    if n < 1:
        raise InvalidSpec("need at least one agent")
    return ExpectedWeightVector((ONE,) * n, MechanismSpec(Kind.DIRECT))


def sortition_expected_weights(n: int, k: int) -> ExpectedWeightVector:
    if not 1 <= k <= n:
        raise InvalidBodySize(f"body size k={k} outside 1..{n}")
    return ExpectedWeightVector((Fraction(k, n),) * n, MechanismSpec(Kind.SORTITION, k=k))


def sample_sortition_body(n: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Realized sortition outcome: a uniform k-subset, each member weight 1."""
    if not 1 <= k <= n:
        raise InvalidBodySize(f"body size k={k} outside 1..{n}")
    chosen = set(rng.choice(n, size=k, replace=False).tolist())
    return tuple(int(i in chosen) for i in range(n))


def proxy_expected_weights(
    gamma: RepresentationMatrix,
    candidates: CandidateSet,
    fallback: Fallback = Fallback.ABSTAIN,
) -> ExpectedWeightVector:
    projected = project_matrix(gamma, candidates, fallback)
    spec = MechanismSpec(Kind.PROXY, candidates=candidates, fallback=fallback)
    return ExpectedWeightVector(column_sums(projected.rows), spec, abstainers=projected.abstainers)


# -- first-past-the-post ---------------------------------------------------


def vote_count_distribution(projected: ProjectedMatrix, guard: Optional[int] = None):
    """Distribution of candidate vote counts.

    Returns ``(dist, denominator)`` where ``dist`` maps a tuple of counts
    (aligned with ``projected.candidates.members``) to an integer numerator.
    Built by convolving voters one at a time, so the state count is bounded
    by the number of distinct count vectors rather than profiles.
    """
    guard = current_guard() if guard is None else guard
    members = projected.candidates.members
    position = {c: p for p, c in enumerate(members)}
    options, denominator = _integer_options(projected.rows)
    dist = {(0,) * len(members): 1}
    for row_options in options:
        if row_options[0][0] is ABSTAIN:
            continue
        nxt: dict = defaultdict(int)
        for counts, num in dist.items():
            for target, a in row_options:
                p = position[target]
                key = counts[:p] + (counts[p] + 1,) + counts[p + 1 :]
                nxt[key] += num * a
        if len(nxt) > guard:
            raise StateSpaceTooLarge(len(nxt), guard)
        dist = nxt
    return dist, denominator


def plurality_winners(counts: Sequence[int]) -> tuple[int, ...]:
    """Positions of the tied top candidates; empty if no vote was cast."""
    top = max(counts, default=0)
    if top == 0:
        return ()
    return tuple(p for p, c in enumerate(counts) if c == top)


def fptp_award(counts: Sequence[int], tie_rule: TieRule) -> tuple[Fraction, ...]:
    """Weight per candidate position for one realized tally."""
    winners = plurality_winners(counts)
    award = [ZERO] * len(counts)
    if not winners:
        return tuple(award)
    if TieRule(tie_rule) is TieRule.LEX:
        award[winners[0]] = ONE
    else:
        share = Fraction(1, len(winners))
        for p in winners:
            award[p] = share
    return tuple(award)


def fptp_expected_weights(
    gamma: RepresentationMatrix,
    candidates: CandidateSet,
    tie_rule: TieRule = TieRule.LEX,
    fallback: Fallback = Fallback.ABSTAIN,
    guard: Optional[int] = None,
) -> ExpectedWeightVector:
    projected = project_matrix(gamma, candidates, fallback)
    dist, denominator = vote_count_distribution(projected, guard)
    members = candidates.members
    totals = [ZERO] * len(members)
    for counts, num in dist.items():
        for p, w in enumerate(fptp_award(counts, tie_rule)):
            if w:
                totals[p] += w * num
    weights = [ZERO] * gamma.n
    for p, c in enumerate(members):
        weights[c] = totals[p] / denominator
    spec = MechanismSpec(Kind.FPTP, k=1, candidates=candidates, tie_rule=tie_rule, fallback=fallback)
    return ExpectedWeightVector(tuple(weights), spec, abstainers=projected.abstainers)


# -- liquid democracy ------------------------------------------------------


def resolve_delegations(choices: Sequence[int]) -> tuple[int, ...]:
    """Realized weights of a delegation profile.

    ``choices[i] == i`` makes ``i`` a sink (a body member). Every agent whose
    delegation walk reaches a sink adds one to that sink; walks that fall into
    a cycle without a sink are lost.
    """
    n = len(choices)
    LOST = -1
    end = [None] * n
    weights = [0] * n
    for start in range(n):
        path = []
        on_path = set()
        v = start
        while end[v] is None:
            if choices[v] == v:
                end[v] = v
                break
            if v in on_path:
                end[v] = LOST
                break
            on_path.add(v)
            path.append(v)
            v = choices[v]
        result = end[v]
        for u in path:
            end[u] = result
    for i in range(n):
        if end[i] != LOST:
            weights[end[i]] += 1
    return tuple(weights)


def _liquid_partial(rows: Rows, prefix: tuple) -> list[int]:
    n = len(rows)
    totals = [0] * n
    for choices, num, _ in _enumerate_numerators(rows, prefix):
        for j, w in enumerate(resolve_delegations(choices)):
            if w:
                totals[j] += w * num
    return totals


def _split_prefixes(rows: Rows, parts: int) -> list[tuple]:
    options, _ = _integer_options(rows)
    prefixes = [()]
    i = 0
    while len(prefixes) < parts and i < len(options):
        prefixes = [p + (t,) for p in prefixes for t, _ in options[i]]
        i += 1
    return prefixes


def liquid_expected_weights(
    gamma: RepresentationMatrix,
    guard: Optional[int] = None,
    workers: int = 1,
) -> ExpectedWeightVector:
    """Exact expectation of :func:`resolve_delegations` over all profiles.

    With ``workers > 1`` the profile space is split on the leading rows'
    choices and summed in integer arithmetic, so the result does not depend
    on the worker count.
    """
    rows = gamma.rows
    _check_guard(profile_count(rows), guard)
    _, denominator = _integer_options(rows)
    if workers <= 1:
        totals = _liquid_partial(rows, ())
    else:
        prefixes = _split_prefixes(rows, 4 * workers)
        totals = [0] * gamma.n
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(_liquid_partial, [rows] * len(prefixes), prefixes):
                totals = [a + b for a, b in zip(totals, part)]
    weights = tuple(Fraction(t, denominator) for t in totals)
    return ExpectedWeightVector(weights, MechanismSpec(Kind.LIQUID))


# -- Monte Carlo -----------------------------------------------------------


def _cumulative_table(rows: Rows) -> np.ndarray:
    """Row-wise cumulative probabilities; past the last support entry is +inf."""
    table = np.cumsum(np.array([[float(p) for p in row] for row in rows]), axis=1)
    for i, row in enumerate(rows):
        support = [j for j, p in enumerate(row) if p]
        if support:
            table[i, support[-1] :] = np.inf
        else:
            table[i, :] = np.nan
    return table


def _draw_choices(table: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    n = table.shape[0]
    u = rng.random((size, n))
    choices = (u[:, :, None] >= table[None, :, :]).sum(axis=2)
    abstain = np.isnan(table[:, 0])
    if abstain.any():
        choices[:, abstain] = -1
    return choices


def _liquid_block_weights(choices: np.ndarray) -> np.ndarray:
    size, n = choices.shape
    dest = choices.copy()
    for _ in range(max(1, math.ceil(math.log2(n))) + 1):
        dest = np.take_along_axis(dest, dest, axis=1)
    idx = np.arange(n)
    sink = choices == idx[None, :]
    reached = np.take_along_axis(sink, dest, axis=1)
    weights = np.zeros((size, n))
    rows = np.repeat(np.arange(size), n)
    np.add.at(weights, (rows[reached.ravel()], dest.ravel()[reached.ravel()]), 1.0)
    return weights


def _fptp_block_weights(choices: np.ndarray, tie_rule: TieRule) -> np.ndarray:
    size, n = choices.shape
    counts = (choices[:, :, None] == np.arange(n)[None, None, :]).sum(axis=1)
    top = counts.max(axis=1, keepdims=True)
    tied = (counts == top) & (top > 0)
    if tie_rule is TieRule.LEX:
        weights = np.zeros((size, n))
        has_vote = top[:, 0] > 0
        first = tied.argmax(axis=1)
        weights[np.nonzero(has_vote)[0], first[has_vote]] = 1.0
        return weights
    t = tied.sum(axis=1, keepdims=True)
    return np.where(tied, 1.0 / np.maximum(t, 1), 0.0)


def _mc_block(args):
    kind, table, tie_rule, seed, block, size = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    choices = _draw_choices(table, size, rng)
    if kind is Kind.LIQUID:
        w = _liquid_block_weights(choices)
    else:
        w = _fptp_block_weights(choices, tie_rule)
    return w.sum(axis=0), (w * w).sum(axis=0)


def mc_expected_weights(gamma: RepresentationMatrix, spec: MechanismSpec) -> ExpectedWeightVector:
    """Seeded Monte Carlo estimate for FPTP or liquid democracy.

    Samples are drawn in fixed blocks of ``MC_BLOCK``; block ``b`` uses a
    generator seeded from ``(seed, b)`` and block sums are reduced in block
    order, so the estimate is identical for any worker count.
    """
    method = spec.method
    if not isinstance(method, MonteCarlo):
        raise InvalidSpec("mc_expected_weights needs a MonteCarlo method")
    if spec.kind not in (Kind.FPTP, Kind.LIQUID):
        raise InvalidSpec(f"{spec.kind.value} has a closed form; Monte Carlo not needed")
    abstainers: frozenset = frozenset()
    if spec.kind is Kind.FPTP:
        projected = project_matrix(gamma, spec.candidates, spec.fallback)
        rows, abstainers = projected.rows, projected.abstainers
    else:
        rows = gamma.rows
    table = _cumulative_table(rows)
    seed = method.seed & (2**64 - 1)
    sizes = [MC_BLOCK] * (method.samples // MC_BLOCK)
    if method.samples % MC_BLOCK:
        sizes.append(method.samples % MC_BLOCK)
    jobs = [(spec.kind, table, spec.tie_rule, seed, b, s) for b, s in enumerate(sizes)]
    if method.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(method.workers) as pool:
            parts = list(pool.map(_mc_block, jobs))
    else:
        parts = [_mc_block(job) for job in jobs]
    n = gamma.n
    total, total_sq = np.zeros(n), np.zeros(n)
    for s, sq in parts:
        total += s
        total_sq += sq
    N = method.samples
    mean = total / N
    if N > 1:
        var = np.maximum(total_sq - N * mean * mean, 0.0) / (N - 1)
    else:
        var = np.zeros(n)
    se = np.sqrt(var / N)
    return ExpectedWeightVector(
        tuple(float(x) for x in mean),
        spec,
        stderr=tuple(float(x) for x in se),
        abstainers=abstainers,
    )


# -- dispatch and realized outcomes ---------------------------------------


def evaluate(gamma: RepresentationMatrix, spec: MechanismSpec, guard: Optional[int] = None) -> ExpectedWeightVector:
    """Expected weight vector of ``spec`` on ``gamma``.

    Closed-form mechanisms (direct, proxy, sortition) are always exact; the
    method only matters for FPTP and liquid democracy.
    """
    n = gamma.n
    spec.check(n)
    kind = spec.kind
    if isinstance(spec.method, MonteCarlo) and kind in (Kind.FPTP, Kind.LIQUID):
        return mc_expected_weights(gamma, spec)
    if kind is Kind.DIRECT:
        result = direct_democracy(n)
    elif kind is Kind.SORTITION:
        result = sortition_expected_weights(n, spec.k)
    elif kind is Kind.PROXY:
        result = proxy_expected_weights(gamma, spec.candidates, spec.fallback)
    elif kind is Kind.FPTP:
        result = fptp_expected_weights(gamma, spec.candidates, spec.tie_rule, spec.fallback, guard)
    else:
        result = liquid_expected_weights(gamma, guard)
    return ExpectedWeightVector(result.weights, spec, abstainers=result.abstainers)


def realized_outcomes(gamma: RepresentationMatrix, spec: MechanismSpec, guard: Optional[int] = None):
    """Distribution of realized weight vectors as ``{weights: probability}``.

    FPTP ties under the split rule are resolved by a uniform random draw
    among the tied candidates, so every realization has a single winner.
    """
    n = gamma.n
    spec.check(n)
    kind = spec.kind
    out: dict = defaultdict(Fraction)
    if kind is Kind.DIRECT:
        out[(1,) * n] = ONE
    elif kind is Kind.SORTITION:
        bodies = math.comb(n, spec.k)
        _check_guard(bodies, guard)
        p = Fraction(1, bodies)
        for body in combinations(range(n), spec.k):
            out[tuple(int(i in body) for i in range(n))] += p
    elif kind is Kind.LIQUID:
        for profile in enumerate_profiles(gamma, guard):
            out[resolve_delegations(profile.choices)] += profile.probability
    else:
        projected = project_matrix(gamma, spec.candidates, spec.fallback)
        members = spec.candidates.members
        dist, denominator = vote_count_distribution(projected, guard)
        for counts, num in dist.items():
            p = Fraction(num, denominator)
            if kind is Kind.PROXY:
                w = [0] * n
                for pos, c in enumerate(members):
                    w[c] = counts[pos]
                out[tuple(w)] += p
                continue
            winners = plurality_winners(counts)
            if not winners:
                out[(0,) * n] += p
                continue
            if spec.tie_rule is TieRule.LEX:
                winners = winners[:1]
            for pos in winners:
                w = [0] * n
                w[members[pos]] = 1
                out[tuple(w)] += p / len(winners)
    return dict(out)


def classify_mechanism(spec: MechanismSpec, result: ExpectedWeightVector, n: Optional[int] = None) -> tuple[str, str, str]:
    """Position on the open-closed, flexible-rigid and direct-virtual axes."""
    n = len(result.weights) if n is None else n
    openness = "closed" if spec.kind.closed else "open"
    rigidity = "rigid" if spec.kind in (Kind.FPTP, Kind.SORTITION) else "flexible"
    voters = n - len(result.abstainers)
    if result.exact:
        direct = result.l1 == voters
    else:
        direct = abs(result.l1 - voters) <= 1e-9
    return openness, rigidity, "direct" if direct else "virtual"
