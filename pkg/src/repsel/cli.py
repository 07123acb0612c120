"""Command-line interface.

Exit codes: 0 computed, 1 input error, 2 axiom violated, 3 running-example
reproduction mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from repsel.axioms import (
    UNDEFINED,
    check_diversity,
    check_faithfulness,
    check_monotonicity_pair,
    expected_vector_gamma,
    gamma_effectiveness,
    proportionality_diff,
    search_monotonicity_counterexample,
    sweep_epsilon_bounds,
)
from repsel.errors import RepselError, StateSpaceTooLarge, ZeroTotalWeight
from repsel.generators import FamilySpec, generate, matrix_stats
from repsel.matrix import (
    CandidateSet,
    expected_vote_share,
    format_fraction,
    load_matrix,
    save_matrix,
    to_fraction,
)
from repsel.mechanisms import EXACT, Kind, MechanismSpec, MonteCarlo, evaluate
from repsel.report import (
    labels_of,
    number,
    render_csv,
    render_reproduction,
    render_table,
    reproduce_paper,
    sweep_report,
    sweep_rows,
    to_json,
    weights_report,
    weights_rows,
)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED, EXIT_MISMATCH = 0, 1, 2, 3

ALL_CHECKS = ("eps", "div", "faith", "gamma")


class UsageError(RepselError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _mechanism_flags(p, kinds=tuple(k.value for k in Kind)):
    p.add_argument("--mechanism", required=True, choices=kinds)
    p.add_argument("--candidates", help="comma-separated labels or indices, e.g. A,B,C")
    p.add_argument("--k", type=int, help="body size (sortition)")
    p.add_argument("--tie", choices=("lex", "split"), default="lex")
    p.add_argument("--fallback", choices=("abstain", "uniform"), default="abstain")
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--guard", type=int, help="exact enumeration guard (default $REPSEL_GUARD or 1e7)")


def _format_flag(p, choices=("table", "json", "csv")):
    p.add_argument("--format", choices=choices, default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repsel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="expected weight vector of one mechanism")
    p.add_argument("--matrix", required=True)
    _mechanism_flags(p)
    _format_flag(p)

    p = sub.add_parser("axioms", help="evaluate representation axioms")
    p.add_argument("--matrix", required=True)
    _mechanism_flags(p)
    p.add_argument("--checks", default=",".join(ALL_CHECKS))
    p.add_argument("--epsilon", help="flag a violation when diff exceeds this rational")
    p.add_argument("--share-mode", choices=("original", "projected"), default="original")
    _format_flag(p, ("table", "json"))

    p = sub.add_parser("sweep", help="epsilon extrema over candidate sets")
    p.add_argument("--matrix", required=True)
    p.add_argument("--mechanism", required=True, choices=("fptp", "proxy"))
    p.add_argument("--size", default=None, help="subset size or 'all' (default n-1)")
    p.add_argument("--tie", choices=("lex", "split"), default="lex")
    p.add_argument("--fallback", choices=("abstain", "uniform"), default="abstain")
    _format_flag(p)

    p = sub.add_parser("generate", help="write a matrix family to a JSON file")
    p.add_argument("--family", required=True, choices=("identity", "uniform", "example", "block", "power", "random"))
    p.add_argument("--n", type=int)
    p.add_argument("--blocks", help="block sizes, e.g. 2,3")
    p.add_argument("--intra", default="1")
    p.add_argument("--trace-mass", default="1/2")
    p.add_argument("--concentration", default="1")
    p.add_argument("--support", type=int)
    p.add_argument("--denominator-cap", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", action="store_true", help="print trace, rank and components")

    p = sub.add_parser("check-monotonicity", help="test monotonicity on a matrix pair")
    p.add_argument("--matrix", required=True)
    p.add_argument("--matrix2", required=True)
    p.add_argument("--agent", required=True)
    _mechanism_flags(p)
    _format_flag(p, ("table", "json"))

    p = sub.add_parser("search-mono", help="random search for monotonicity counterexamples")
    p.add_argument("--mechanism", required=True, choices=tuple(k.value for k in Kind))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--tie", choices=("lex", "split"), default="lex")
    p.add_argument("--fallback", choices=("abstain", "uniform"), default="abstain")
    p.add_argument("--support", type=int, default=3)
    _format_flag(p, ("table", "json"))

    p = sub.add_parser("reproduce-paper", help="recompute the five-agent running example")
    _format_flag(p, ("table", "json"))
    return parser


def _spec_from_args(args, gamma) -> MechanismSpec:
    kind = Kind(args.mechanism)
    candidates = None
    if args.candidates:
        candidates = CandidateSet.parse(gamma, args.candidates)
    elif kind.closed:
        raise UsageError(f"--mechanism {kind.value} requires --candidates")
    if kind is Kind.SORTITION and args.k is None:
        raise UsageError("--mechanism sortition requires --k")
    method = EXACT
    if args.method == "mc":
        method = MonteCarlo(args.samples, args.seed, args.workers)
    spec = MechanismSpec(
        kind,
        k=args.k if kind in (Kind.SORTITION, Kind.FPTP) else None,
        candidates=candidates if kind.closed else None,
        tie_rule=args.tie,
        fallback=args.fallback,
        method=method,
    )
    spec.check(gamma.n)
    return spec


def _emit(text: str, out) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def cmd_evaluate(args, out) -> int:
    gamma = load_matrix(args.matrix)
    spec = _spec_from_args(args, gamma)
    start = time.perf_counter()
    result = evaluate(gamma, spec, args.guard)
    report = weights_report(gamma, result)
    if args.format == "json":
        _emit(to_json({"command": "evaluate", **report}, time.perf_counter() - start), out)
    elif args.format == "csv":
        header, rows = weights_rows(report)
        _emit(render_csv(rows, header), out)
    else:
        header, rows = weights_rows(report)
        l1 = report["l1"]
        lines = [render_table(rows, header), f"l1 = {l1 if isinstance(l1, str) else _str(l1)}"]
        if report["abstainers"]:
            lines.append("abstainers: " + " ".join(report["abstainers"]))
        lines.append("classification: " + ", ".join(report["classification"]))
        _emit("\n".join(lines), out)
    return EXIT_OK


def cmd_axioms(args, out) -> int:
    gamma = load_matrix(args.matrix)
    spec = _spec_from_args(args, gamma)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(ALL_CHECKS)
    if unknown:
        raise UsageError(f"--checks: unknown checks {sorted(unknown)}; choose from {ALL_CHECKS}")
    result = evaluate(gamma, spec, args.guard)
    weights = result.weights
    tree = {"command": "axioms", **weights_report(gamma, result), "axioms": {}}
    violated = False
    if "eps" in checks:
        rep = proportionality_diff(gamma, spec, weights)
        entry = {
            "diff": number(rep.diff),
            "witness": gamma.labels[rep.witness],
            "per_agent": [number(d) for d in rep.per_agent_deviation],
        }
        if args.epsilon is not None:
            eps = to_fraction(args.epsilon)
            entry["epsilon"] = format_fraction(eps)
            entry["holds"] = rep.diff <= eps
            violated |= not entry["holds"]
        tree["axioms"]["proportionality"] = entry
    if "div" in checks:
        rep = check_diversity(gamma, spec, weights, args.share_mode)
        tree["axioms"]["diversity"] = {"holds": rep.holds, "violations": labels_of(gamma, rep.violations)}
        violated |= rep.holds is False
    if "faith" in checks:
        rep = check_faithfulness(gamma, spec, weights)
        tree["axioms"]["faithfulness"] = {
            "holds": rep.holds,
            "violations": [
                {"pair": [gamma.labels[i], gamma.labels[j]], "shares": [format_fraction(si), format_fraction(sj)],
                 "weights": [_str(wi), _str(wj)]}
                for i, j, si, sj, wi, wj in rep.violations
            ],
        }
        violated |= rep.holds is False
    if "gamma" in checks:
        if not result.exact:
            spec = MechanismSpec(spec.kind, spec.k, spec.candidates, spec.tie_rule, spec.fallback)
        rep = gamma_effectiveness(gamma, spec, args.guard)
        entry = {
            "expected": format_fraction(rep.expected_gamma) if rep.expected_gamma is not None else None,
            "distribution": {str(s): format_fraction(p) for s, p in rep.distribution.items()},
            "undefined_mass": format_fraction(rep.undefined_mass),
        }
        try:
            entry["on_expected_vector"] = expected_vector_gamma(weights)
        except ZeroTotalWeight:
            entry["on_expected_vector"] = None
        tree["axioms"]["gamma_effectiveness"] = entry
    tree["violated"] = violated
    if args.format == "json":
        _emit(to_json(tree), out)
    else:
        _emit(_axioms_table(tree), out)
    return EXIT_VIOLATED if violated else EXIT_OK


def _str(x):
    return format_fraction(x) if isinstance(x, (Fraction, int)) else f"{x:.6f}"


def _axioms_table(tree) -> str:
    lines = [f"mechanism: {tree['mechanism']}  weights: (" + ", ".join(tree["weights"]) + ")"]
    ax = tree["axioms"]
    if "proportionality" in ax:
        e = ax["proportionality"]
        line = f"proportionality: diff = {e['diff']['exact']} ({e['diff']['2dp']}), witness {e['witness']}"
        if "holds" in e:
            line += f", eps = {e['epsilon']}: {'holds' if e['holds'] else 'VIOLATED'}"
        lines.append(line)
    if "diversity" in ax:
        d = ax["diversity"]
        lines.append("diversity: " + ("holds" if d["holds"] else "VIOLATED by " + " ".join(d["violations"])))
    if "faithfulness" in ax:
        f = ax["faithfulness"]
        pairs = " ".join(f"({v['pair'][0]},{v['pair'][1]})" for v in f["violations"])
        lines.append("faithfulness: " + ("holds" if f["holds"] else "VIOLATED by " + pairs))
    if "gamma_effectiveness" in ax:
        g = ax["gamma_effectiveness"]
        lines.append(f"gamma-effectiveness: expected {g['expected']}, distribution {g['distribution']}")
    return "\n".join(lines)


def cmd_sweep(args, out) -> int:
    gamma = load_matrix(args.matrix)
    size = args.size
    if size is not None and size != "all":
        try:
            size = int(size)
        except ValueError:
            raise UsageError("--size must be an integer or 'all'") from None
    placeholder = CandidateSet.everyone(gamma.n)
    spec = MechanismSpec(args.mechanism, candidates=placeholder, tie_rule=args.tie, fallback=args.fallback)
    sweep = sweep_epsilon_bounds(gamma, spec, size)
    report = sweep_report(gamma, sweep)
    if args.format == "json":
        _emit(to_json({"command": "sweep", "mechanism": args.mechanism, **report}), out)
    elif args.format == "csv":
        header, rows = sweep_rows(report)
        _emit(render_csv(rows, header), out)
    else:
        header, rows = sweep_rows(report)
        _emit(
            "\n".join([
                render_table(rows, header),
                f"min {report['min']['exact']} ({report['min']['2dp']}) at {{{','.join(report['min_witness'])}}}",
                f"max {report['max']['exact']} ({report['max']['2dp']}) at {{{','.join(report['max_witness'])}}}",
                f"interval {report['interval_2dp']}",
            ]),
            out,
        )
    return EXIT_OK


def cmd_generate(args, out) -> int:
    n = args.n
    if args.family == "example":
        n = 5 if n is None else n
    elif n is None:
        raise UsageError("--n is required for this family")
    blocks = tuple(int(b) for b in args.blocks.split(",")) if args.blocks else None
    spec = FamilySpec(
        args.family,
        n,
        blocks=blocks,
        intra_mass=args.intra,
        trace_mass=args.trace_mass,
        concentration=args.concentration,
        seed=args.seed,
        support=args.support,
        denominator_cap=args.denominator_cap,
    )
    gamma = generate(spec)
    save_matrix(gamma, args.out)
    if args.stats:
        stats = matrix_stats(gamma)
        comps = " ".join("{" + ",".join(gamma.labels[i] for i in c) + "}" for c in stats.components)
        _emit(f"trace {format_fraction(stats.trace)}  rank {stats.rank}  components {comps}", out)
    return EXIT_OK


def cmd_check_monotonicity(args, out) -> int:
    gamma = load_matrix(args.matrix)
    gamma2 = load_matrix(args.matrix2)
    spec = _spec_from_args(args, gamma)
    j = gamma.index_of(args.agent)
    rep = check_monotonicity_pair(gamma, gamma2, j, spec)
    tree = {
        "command": "check-monotonicity",
        "agent": gamma.labels[j],
        "holds": rep.holds,
        "premise": rep.details["premise"],
        "shares_before": [format_fraction(x) for x in expected_vote_share(gamma)],
        "shares_after": [format_fraction(x) for x in expected_vote_share(gamma2)],
    }
    if rep.details["premise"]:
        tree["weight_before"] = _str(rep.details["weight_before"])
        tree["weight_after"] = _str(rep.details["weight_after"])
    if args.format == "json":
        _emit(to_json(tree), out)
    else:
        status = {True: "holds", False: "VIOLATED", UNDEFINED: "undefined (premise fails)"}[rep.holds]
        line = f"monotonicity for {tree['agent']}: {status}"
        if rep.details["premise"]:
            line += f"  weight {tree['weight_before']} -> {tree['weight_after']}"
        _emit(line, out)
    return EXIT_VIOLATED if rep.holds is False else EXIT_OK


def cmd_search_mono(args, out) -> int:
    kind = Kind(args.mechanism)
    if kind is Kind.SORTITION and args.k is not None and not 1 <= args.k <= args.n:
        raise UsageError(f"--k must lie in 1..{args.n}")
    options = {"tie_rule": args.tie, "fallback": args.fallback}
    if args.k is not None:
        options["k"] = args.k
    found = search_monotonicity_counterexample(kind, args.n, args.trials, args.seed, support=args.support, **options)
    tree = {"command": "search-mono", "mechanism": kind.value, "n": args.n, "trials": args.trials,
            "seed": args.seed, "counterexample": None}
    if found is not None:
        tree["counterexample"] = {
            "trial": found.trial,
            "agent": found.gamma.labels[found.agent],
            "candidates": labels_of(found.gamma, found.spec.candidates) if found.spec.candidates else None,
            "matrix": found.gamma.to_json(),
            "matrix2": found.gamma2.to_json(),
            "weight_before": _str(found.weight_before),
            "weight_after": _str(found.weight_after),
        }
    if args.format == "json":
        _emit(to_json(tree), out)
    elif found is None:
        _emit(f"no counterexample in {args.trials} trials (seed {args.seed})", out)
    else:
        c = tree["counterexample"]
        _emit(
            f"counterexample at trial {c['trial']}: agent {c['agent']} weight "
            f"{c['weight_before']} -> {c['weight_after']}\n" + json.dumps(c, indent=2),
            out,
        )
    return EXIT_VIOLATED if found is not None else EXIT_OK


def cmd_reproduce(args, out) -> int:
    start = time.perf_counter()
    tree, ok = reproduce_paper()
    if args.format == "json":
        _emit(to_json(tree, time.perf_counter() - start), out)
    else:
        _emit(render_reproduction(tree), out)
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "evaluate": cmd_evaluate,
    "axioms": cmd_axioms,
    "sweep": cmd_sweep,
    "generate": cmd_generate,
    "check-monotonicity": cmd_check_monotonicity,
    "search-mono": cmd_search_mono,
    "reproduce-paper": cmd_reproduce,
}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except StateSpaceTooLarge as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (RepselError, ValueError, OSError, json.JSONDecodeError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
