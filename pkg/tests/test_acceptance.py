"""Exit criteria, one test per criterion, each printing a PASS/FAIL line."""

import time
from fractions import Fraction as F
from itertools import combinations

import numpy as np
import pytest

from conftest import oracle_min_coalition, sparse_random
from repsel.axioms import (
    check_diversity,
    check_faithfulness,
    gamma_effectiveness,
    min_majority_coalition,
    proportionality_diff,
    sweep_epsilon_bounds,
)
from repsel.cli import run
from repsel.errors import MatrixError, StateSpaceTooLarge
from repsel.generators import running_example
from repsel.matrix import CandidateSet, expected_vote_share, project_matrix, truncate2, validate_matrix
from repsel.mechanisms import (
    Kind,
    MechanismSpec,
    MonteCarlo,
    direct_democracy,
    enumerate_profiles,
    evaluate,
    fptp_award,
    liquid_expected_weights,
    realized_outcomes,
    resolve_delegations,
    sortition_expected_weights,
)


@pytest.fixture
def report(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


def fr(*xs):
    return tuple(F(x) for x in xs)


def test_criterion_1_running_example_values(report):
    start = time.perf_counter()
    gamma = running_example()
    abce = CandidateSet.parse(gamma, "A,B,C,E")
    checks = {
        "E[V]": expected_vote_share(gamma) == fr("5/3", "2/3", "16/15", "1/5", "7/5"),
        "fptp": evaluate(gamma, MechanismSpec(Kind.FPTP, candidates=abce)).weights == fr(0, 0, "1/2", 0, "1/2"),
        "proxy": evaluate(gamma, MechanismSpec(Kind.PROXY, candidates=abce)).weights == fr(1, 1, "3/2", 0, "3/2"),
        "liquid": evaluate(gamma, MechanismSpec(Kind.LIQUID)).weights == fr("89/45", "22/45", "14/15", "1/5", "7/5"),
        "all-self": {p.choices: p.probability for p in enumerate_profiles(gamma)}[(0, 1, 2, 3, 4)] == F(2, 45),
        "sortition": all(
            evaluate(gamma, MechanismSpec(Kind.SORTITION, k=k)).weights == (F(k, 5),) * 5 for k in range(1, 6)
        ),
    }
    elapsed = time.perf_counter() - start
    failed = [k for k, ok in checks.items() if not ok]
    report(1, not failed and elapsed < 5, f"exact running-example values {'all match' if not failed else failed}, {elapsed:.2f}s < 5s")


def test_criterion_2_table(report, capsys):
    start = time.perf_counter()
    gamma = running_example()
    placeholder = CandidateSet((0,))
    eps_d = proportionality_diff(gamma, MechanismSpec(Kind.DIRECT)).diff
    eps_l = proportionality_diff(gamma, MechanismSpec(Kind.LIQUID)).diff
    eps_s = {proportionality_diff(gamma, MechanismSpec(Kind.SORTITION, k=k)).diff for k in range(1, 6)}
    fptp = sweep_epsilon_bounds(gamma, MechanismSpec(Kind.FPTP, candidates=placeholder), size=4)
    proxy = sweep_epsilon_bounds(gamma, MechanismSpec(Kind.PROXY, candidates=placeholder), size=4)
    code = run(["reproduce-paper"])
    capsys.readouterr()
    elapsed = time.perf_counter() - start
    checks = [
        (eps_d, truncate2(eps_d)) == (F(4, 25), "0.16"),
        (eps_l, truncate2(eps_l)) == (F(14, 225), "0.06"),
        eps_s == {F(4, 25)},
        (fptp.min_diff, fptp.max_diff) == (F(1, 3), F(13, 15)),
        (truncate2(fptp.min_diff), truncate2(fptp.max_diff)) == ("0.33", "0.86"),
        (proxy.min_diff, proxy.max_diff) == (F(2, 15), F(1, 3)),
        (truncate2(proxy.min_diff), truncate2(proxy.max_diff)) == ("0.13", "0.33"),
        code == 0,
    ]
    detail = (
        f"D {truncate2(eps_d)}, F [{truncate2(fptp.min_diff)}, {truncate2(fptp.max_diff)}], "
        f"P [{truncate2(proxy.min_diff)}, {truncate2(proxy.max_diff)}], L {truncate2(eps_l)}, "
        f"S {truncate2(max(eps_s))}; reproduce-paper exit {code}; {elapsed:.2f}s < 10s"
    )
    report(2, all(checks) and elapsed < 10, detail)


def _random_candidates(n, seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, n + 1))
    return CandidateSet(tuple(int(c) for c in rng.choice(n, size=m, replace=False)))


def test_criterion_3_monte_carlo_oracle(report):
    inside = total = 0
    for i in range(200):
        n = 2 + i % 5
        gamma = sparse_random(n, 5000 + i, 3)
        specs = [
            MechanismSpec(Kind.FPTP, candidates=_random_candidates(n, i)),
            MechanismSpec(Kind.LIQUID),
        ]
        for spec in specs:
            exact = evaluate(gamma, spec).weights
            mc_spec = MechanismSpec(spec.kind, candidates=spec.candidates, method=MonteCarlo(100_000, i))
            est = evaluate(gamma, mc_spec)
            for e, m, se in zip(exact, est.weights, est.stderr):
                total += 1
                # 1e-12 absorbs float rounding on zero-variance coordinates
                inside += abs(float(e) - m) <= 4 * se + 1e-12
    rate = inside / total
    report(3, rate >= 0.99, f"{inside}/{total} = {rate:.4f} of (matrix, coordinate) pairs within 4 SE (need >= 0.99)")


def test_criterion_4_properties(report):
    results = {}

    malformed = [
        [[1, 0], [0, 1], [1, 0]],
        [[F(3, 2), F(-1, 2)], [0, 1]],
        [["1/2", "1/3", 0], [0, 1, 0], [0, 0, 1]],
    ]
    rejected = 0
    for raw in malformed:
        try:
            validate_matrix(raw)
        except MatrixError:
            rejected += 1
    results["malformed rejected"] = rejected == 3

    results["sum E[V] = n"] = all(
        sum(expected_vote_share(sparse_random(1 + s % 9, s, 1 + s % 4))) == 1 + s % 9 for s in range(100)
    )

    conserved = True
    for n in range(1, 6):
        for seed in range(6):
            gamma = sparse_random(n, 900 + seed, 3)
            for profile in enumerate_profiles(gamma):
                w = resolve_delegations(profile.choices)
                lost = 0
                for i in range(n):
                    seen, v = set(), i
                    while profile.choices[v] != v and v not in seen:
                        seen.add(v)
                        v = profile.choices[v]
                    lost += profile.choices[v] != v
                conserved &= sum(w) == n - lost
    results["liquid conservation"] = conserved

    fptp_ok = proxy_ok = True
    for seed in range(40):
        n = 1 + seed % 6
        gamma = sparse_random(n, 700 + seed, 3)
        cset = _random_candidates(n, seed)
        projected = project_matrix(gamma, cset)
        for profile in enumerate_profiles(projected):
            counts = tuple(sum(1 for c in profile.choices if c == j) for j in cset)
            cast = any(c is not None for c in profile.choices)
            for tie in ("lex", "split"):
                fptp_ok &= sum(fptp_award(counts, tie)) == (1 if cast else 0)
        proxy = evaluate(gamma, MechanismSpec(Kind.PROXY, candidates=cset))
        proxy_ok &= proxy.l1 == n - len(proxy.abstainers)
    results["fptp profile weight"] = fptp_ok
    results["proxy l1"] = proxy_ok

    results["sortition k=n is direct"] = all(
        sortition_expected_weights(n, n).weights == direct_democracy(n).weights for n in range(1, 13)
    )

    coalition_ok = True
    vectors = 0
    for seed in range(50):
        n = 1 + seed % 10
        gamma = sparse_random(n, 300 + seed, 2)
        cset = _random_candidates(n, seed)
        outcomes = list(realized_outcomes(gamma, MechanismSpec(Kind.PROXY, candidates=cset)))
        if n <= 6:
            outcomes += list(realized_outcomes(gamma, MechanismSpec(Kind.LIQUID)))
        rng = np.random.default_rng(seed)
        outcomes.append(tuple(F(int(x), int(d)) for x, d in zip(rng.integers(0, 20, n), rng.integers(1, 7, n))))
        for w in outcomes:
            if sum(w) == 0:
                continue
            vectors += 1
            coalition_ok &= min_majority_coalition(w) == oracle_min_coalition(w)
    results[f"min coalition ({vectors} vectors)"] = coalition_ok

    witnesses_ok = True
    for seed in range(20):
        n = 2 + seed % 4
        gamma = sparse_random(n, 400 + seed, 3)
        for kind in (Kind.FPTP, Kind.PROXY):
            spec = MechanismSpec(kind, candidates=CandidateSet((0,)))
            sweep = sweep_epsilon_bounds(gamma, spec, size="all" if seed % 2 else None)
            witnesses_ok &= proportionality_diff(gamma, spec.with_candidates(sweep.min_witness)).diff == sweep.min_diff
            witnesses_ok &= proportionality_diff(gamma, spec.with_candidates(sweep.max_witness)).diff == sweep.max_diff
    results["sweep witnesses"] = witnesses_ok

    failed = [k for k, ok in results.items() if not ok]
    report(4, not failed, f"{len(results) - len(failed)}/{len(results)} property suites pass" + (f"; failed {failed}" if failed else ""))


def test_criterion_5_axiom_spot_checks(report):
    gamma = running_example()
    abce = CandidateSet.parse(gamma, "A,B,C,E")
    fptp = MechanismSpec(Kind.FPTP, candidates=abce)
    div = check_diversity(gamma, fptp)
    faith = check_faithfulness(gamma, fptp)
    checks = {
        "fptp diversity violated by A, B": div.holds is False and div.violations == (0, 1),
        "fptp faithfulness violated by (A,C)": faith.holds is False and (0, 2) in {v[:2] for v in faith.violations},
        "direct diversity/faithfulness": check_diversity(gamma, MechanismSpec(Kind.DIRECT)).holds is True
        and check_faithfulness(gamma, MechanismSpec(Kind.DIRECT)).holds is True,
        "sortition diversity/faithfulness": all(
            check_diversity(gamma, MechanismSpec(Kind.SORTITION, k=k)).holds is True
            and check_faithfulness(gamma, MechanismSpec(Kind.SORTITION, k=k)).holds is True
            for k in range(1, 6)
        ),
        "gamma direct = 3": gamma_effectiveness(gamma, MechanismSpec(Kind.DIRECT)).expected_gamma == 3,
        "gamma fptp = 1": gamma_effectiveness(gamma, fptp).expected_gamma == 1,
        "gamma proxy = 2": gamma_effectiveness(gamma, MechanismSpec(Kind.PROXY, candidates=abce)).expected_gamma == 2,
    }
    failed = [k for k, ok in checks.items() if not ok]
    report(5, not failed, f"{len(checks) - len(failed)}/{len(checks)} spot checks" + (f"; failed {failed}" if failed else ""))


def test_criterion_6_scale_guard(report):
    gamma = sparse_random(12, 12, 3)
    start = time.perf_counter()
    result = liquid_expected_weights(gamma)
    elapsed = time.perf_counter() - start
    big = sparse_random(20, 20, 3)
    start = time.perf_counter()
    try:
        liquid_expected_weights(big)
        raised = False
    except StateSpaceTooLarge:
        raised = True
    refusal = time.perf_counter() - start
    ok = elapsed < 60 and raised and refusal < 1 and result.l1 <= 12
    report(6, ok, f"n=12 exact liquid (3^12 profiles) in {elapsed:.1f}s < 60s; n=20 raised StateSpaceTooLarge={raised} in {refusal:.3f}s")
