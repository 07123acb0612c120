"""Representation axioms evaluated on mechanism outputs.

Every check compares a mechanism's expected weights against the expected
vote shares of the original (unprojected) representation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Optional, Sequence, Union

import numpy as np

from repsel.errors import DimensionMismatch, EmptyDomain, InvalidSpec, ZeroTotalWeight, ZeroWeightVector
from repsel.generators import round_to_simplex
from repsel.matrix import (
    ONE,
    ZERO,
    CandidateSet,
    RepresentationMatrix,
    expected_vote_share,
    project_matrix,
    validate_matrix,
)
from repsel.mechanisms import Kind, MechanismSpec, evaluate, realized_outcomes

UNDEFINED = "undefined"


@dataclass(frozen=True)
class ProportionalityReport:
    per_agent_deviation: tuple[Fraction, ...]
    diff: Fraction
    witness: int


@dataclass(frozen=True)
class SweepResult:
    min_diff: Fraction
    max_diff: Fraction
    min_witness: CandidateSet
    max_witness: CandidateSet
    domain: str
    evaluated: int
    skipped: int = 0
    values: tuple = ()

    @property
    def min_witnesses(self) -> tuple[CandidateSet, ...]:
        return tuple(c for c, d in self.values if d == self.min_diff)

    @property
    def max_witnesses(self) -> tuple[CandidateSet, ...]:
        return tuple(c for c, d in self.values if d == self.max_diff)


@dataclass(frozen=True)
class CoalitionReport:
    expected_gamma: Optional[Fraction]
    distribution: dict
    undefined_mass: Fraction


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    holds: Union[bool, str]
    violations: tuple = ()
    details: dict = field(default_factory=dict)


def _candidates_for(gamma: RepresentationMatrix, spec: MechanismSpec) -> CandidateSet:
    return spec.candidates if spec.candidates is not None else CandidateSet.everyone(gamma.n)


def _weights(gamma, spec, weights):
    return evaluate(gamma, spec).weights if weights is None else tuple(weights)


def proportionality_diff(
    gamma: RepresentationMatrix,
    spec: MechanismSpec,
    weights: Optional[Sequence] = None,
) -> ProportionalityReport:
    """Largest gap between normalized vote share and normalized weight."""
    f = _weights(gamma, spec, weights)
    total = sum(f, ZERO)
    if total == 0:
        raise ZeroWeightVector("mechanism awards no weight; proportionality undefined")
    shares = expected_vote_share(gamma)
    n = Fraction(gamma.n)
    deviation = tuple(abs(v / n - w / total) for v, w in zip(shares, f))
    diff = max(deviation)
    return ProportionalityReport(deviation, diff, deviation.index(diff))


def candidate_domain(n: int, size: Union[int, str, None] = None):
    """Candidate sets to sweep: all ``size``-subsets, or every nonempty
    strict subset when ``size == 'all'``. Default size is ``n - 1``."""
    if size == "all":
        sizes = range(1, n)
    else:
        size = n - 1 if size is None else int(size)
        if not 1 <= size <= n:
            raise EmptyDomain(f"subset size {size} outside 1..{n}")
        sizes = [size]
    for m in sizes:
        for members in combinations(range(n), m):
            yield CandidateSet(members)


def sweep_epsilon_bounds(
    gamma: RepresentationMatrix,
    spec: MechanismSpec,
    size: Union[int, str, None] = None,
    skip_invalid: bool = True,
    domain=None,
) -> SweepResult:
    """Min and max of :func:`proportionality_diff` over candidate sets.

    ``spec`` supplies the mechanism and its conventions; its candidate set is
    replaced by each member of the domain. Sets on which the mechanism awards
    no weight are skipped when ``skip_invalid`` is set. The reported witness
    is the first extremal set in canonical (size, lexicographic) order; all
    tied sets are available as ``min_witnesses`` / ``max_witnesses``.
    """
    if not spec.kind.closed:
        raise InvalidSpec(f"{spec.kind.value} does not depend on a candidate set")
    if domain is None:
        domain = candidate_domain(gamma.n, size)
        label = f"all subsets of size {'1..n-1' if size == 'all' else (size or gamma.n - 1)}"
    else:
        label = "custom"
    best = worst = None
    evaluated = skipped = 0
    values = []
    for cset in domain:
        try:
            report = proportionality_diff(gamma, spec.with_candidates(cset))
        except ZeroWeightVector:
            if not skip_invalid:
                raise
            skipped += 1
            continue
        evaluated += 1
        values.append((cset, report.diff))
        if best is None or report.diff < best[0]:
            best = (report.diff, cset)
        if worst is None or report.diff > worst[0]:
            worst = (report.diff, cset)
    if best is None:
        raise EmptyDomain("no candidate set in the swept domain")
    return SweepResult(best[0], worst[0], best[1], worst[1], label, evaluated, skipped, tuple(values))


def _shares_for(gamma, spec, share_mode):
    if share_mode == "original":
        return expected_vote_share(gamma)
    if share_mode == "projected":
        return expected_vote_share(project_matrix(gamma, _candidates_for(gamma, spec), spec.fallback))
    raise InvalidSpec(f"unknown share mode {share_mode!r}")


def check_diversity(
    gamma: RepresentationMatrix,
    spec: MechanismSpec,
    weights: Optional[Sequence] = None,
    share_mode: str = "original",
) -> AxiomReport:
    """Every candidate with positive expected vote share gets positive weight."""
    f = _weights(gamma, spec, weights)
    shares = _shares_for(gamma, spec, share_mode)
    bad = tuple(j for j in _candidates_for(gamma, spec) if shares[j] > 0 and not f[j] > 0)
    return AxiomReport("diversity", not bad, bad)


def check_faithfulness(
    gamma: RepresentationMatrix,
    spec: MechanismSpec,
    weights: Optional[Sequence] = None,
) -> AxiomReport:
    """A higher expected vote share never comes with a lower expected weight.

    Violations are ``(i, j, share_i, share_j, weight_i, weight_j)``.
    """
    f = _weights(gamma, spec, weights)
    shares = expected_vote_share(gamma)
    members = _candidates_for(gamma, spec).members
    bad = tuple(
        (i, j, shares[i], shares[j], f[i], f[j])
        for i in members
        for j in members
        if i != j and shares[i] >= shares[j] and f[i] < f[j]
    )
    return AxiomReport("faithfulness", not bad, bad)


def check_monotonicity_pair(
    gamma: RepresentationMatrix,
    gamma2: RepresentationMatrix,
    j: int,
    spec: MechanismSpec,
) -> AxiomReport:
    """Raising only ``j``'s vote share must not lower ``j``'s weight.

    The result is ``UNDEFINED`` when the pair does not satisfy the premise.
    """
    if gamma.n != gamma2.n:
        raise DimensionMismatch(f"matrices have sizes {gamma.n} and {gamma2.n}")
    before, after = expected_vote_share(gamma), expected_vote_share(gamma2)
    premise = after[j] > before[j] and all(
        after[i] <= before[i] for i in range(gamma.n) if i != j
    )
    if not premise:
        return AxiomReport("monotonicity", UNDEFINED, details={"premise": False})
    w_before = evaluate(gamma, spec).weights[j]
    w_after = evaluate(gamma2, spec).weights[j]
    details = {"premise": True, "weight_before": w_before, "weight_after": w_after}
    if w_after >= w_before:
        return AxiomReport("monotonicity", True, details=details)
    return AxiomReport("monotonicity", False, ((j, w_before, w_after),), details)


@dataclass(frozen=True)
class MonotonicityCounterexample:
    gamma: RepresentationMatrix
    gamma2: RepresentationMatrix
    agent: int
    spec: MechanismSpec
    trial: int
    weight_before: Any
    weight_after: Any


def _trial_instance(kind, n, seed, trial, support, cap, options):
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), trial]))
    rows = []
    width = min(support, n)
    for _ in range(n):
        cols = np.sort(rng.choice(n, size=width, replace=False))
        row = [ZERO] * n
        for c, p in zip(cols, round_to_simplex(rng.dirichlet([1.0] * width), cap)):
            row[int(c)] = p
        rows.append(row)
    candidates = options.get("candidates")
    if kind.closed and candidates is None:
        m = int(rng.integers(1, n + 1))
        candidates = CandidateSet(tuple(int(c) for c in rng.choice(n, size=m, replace=False)))
    k = options.get("k")
    if kind is Kind.SORTITION and k is None:
        k = int(rng.integers(1, n + 1))
    spec = MechanismSpec(
        kind,
        k=k,
        candidates=candidates if kind.closed else None,
        tie_rule=options.get("tie_rule", "lex"),
        fallback=options.get("fallback", "abstain"),
    )
    pool = candidates.members if kind.closed else tuple(range(n))
    j = int(pool[rng.integers(len(pool))])
    # move a random share of every row's mass onto column j
    t = [Fraction(int(rng.integers(0, cap + 1)), cap) for _ in range(n)]
    if all(row[j] == 1 or ti == 0 for row, ti in zip(rows, t)):
        return None
    rows2 = [
        [(ONE - ti) * x + (ti if c == j else ZERO) for c, x in enumerate(row)]
        for row, ti in zip(rows, t)
    ]
    return validate_matrix(rows), validate_matrix(rows2), j, spec


def search_monotonicity_counterexample(
    kind: Union[Kind, str],
    n: int,
    trials: int,
    seed: int,
    support: int = 3,
    cap: int = 20,
    **options,
) -> Optional[MonotonicityCounterexample]:
    """Random falsification search for monotonicity.

    Trial ``t`` draws its own generator from ``(seed, t)``: a random matrix
    with at most ``support`` nonzero entries per row (denominator ``cap``),
    a target agent ``j``, and a perturbed matrix that shifts a random share
    of each row onto column ``j`` so the premise holds by construction.
    ``options`` may fix ``candidates``, ``k``, ``tie_rule`` and ``fallback``;
    an unset candidate set (closed mechanisms) or body size (sortition) is
    drawn per trial. Returns the lowest-index counterexample, or ``None``.
    """
    kind = Kind(kind)
    for trial in range(trials):
        instance = _trial_instance(kind, n, seed, trial, support, cap, options)
        if instance is None:
            continue
        gamma, gamma2, j, spec = instance
        report = check_monotonicity_pair(gamma, gamma2, j, spec)
        if report.holds is False:
            d = report.details
            return MonotonicityCounterexample(
                gamma, gamma2, j, spec, trial, d["weight_before"], d["weight_after"]
            )
    return None


def min_majority_coalition(weights: Sequence) -> int:
    """Fewest agents whose weights sum to strictly more than half the total.

    Greedy by descending weight is optimal: any k agents weigh at most the
    k heaviest.
    """
    total = sum(weights)
    if not total > 0:
        raise ZeroTotalWeight("no voting weight to form a majority")
    acc = 0
    for count, w in enumerate(sorted(weights, reverse=True), start=1):
        acc += w
        if 2 * acc > total:
            return count
    raise AssertionError("unreachable: full body always holds a majority")


def gamma_effectiveness(
    gamma: RepresentationMatrix,
    spec: MechanismSpec,
    guard: Optional[int] = None,
) -> CoalitionReport:
    """Expected smallest majority coalition over the realized bodies."""
    if spec.kind is Kind.SORTITION:
        spec.check(gamma.n)
        size = spec.k // 2 + 1
        return CoalitionReport(Fraction(size), {size: ONE}, ZERO)
    distribution: dict = {}
    undefined = ZERO
    for weights, p in realized_outcomes(gamma, spec, guard).items():
        if not any(weights):
            undefined += p
            continue
        size = min_majority_coalition(weights)
        distribution[size] = distribution.get(size, ZERO) + p
    defined = ONE - undefined
    expected = None
    if defined:
        expected = sum((size * p for size, p in distribution.items()), ZERO) / defined
    return CoalitionReport(expected, dict(sorted(distribution.items())), undefined)


def expected_vector_gamma(weights: Sequence) -> int:
    """Coalition size computed on the expected weight vector itself.

    A comparison statistic only; :func:`gamma_effectiveness` is the axiom.
    """
    return min_majority_coalition(weights)
