"""Report trees, renderers and the running-example reproduction."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from repsel import __version__
from repsel.axioms import (
    gamma_effectiveness,
    proportionality_diff,
    sweep_epsilon_bounds,
)
from repsel.generators import running_example
from repsel.matrix import CandidateSet, RepresentationMatrix, expected_vote_share, format_fraction, truncate2
from repsel.mechanisms import (
    ExpectedWeightVector,
    Kind,
    MechanismSpec,
    classify_mechanism,
    enumerate_profiles,
    evaluate,
)


def number(x) -> dict:
    """Exact fraction plus its truncated two-decimal rendering."""
    if isinstance(x, float):
        return {"decimal": x, "2dp": truncate2(x)}
    x = Fraction(x)
    return {"exact": format_fraction(x), "2dp": truncate2(x)}


def plain(x) -> str:
    return format_fraction(x) if isinstance(x, (Fraction, int)) else f"{x:.6f}"


def labels_of(gamma: RepresentationMatrix, indices: Iterable[int]) -> list[str]:
    return [gamma.labels[i] for i in sorted(indices)]


def weights_report(gamma: RepresentationMatrix, result: ExpectedWeightVector) -> dict:
    spec = result.spec
    out = {
        "mechanism": spec.kind.value,
        "candidates": labels_of(gamma, spec.candidates) if spec.candidates else None,
        "k": spec.k,
        "tie_rule": spec.tie_rule.value if spec.kind is Kind.FPTP else None,
        "fallback": spec.fallback.value if spec.kind.closed else None,
        "method": str(spec.method),
        "labels": list(gamma.labels),
        "weights": [plain(w) for w in result.weights] if result.exact else list(result.weights),
        "weights_2dp": [truncate2(w) for w in result.weights],
        "l1": plain(result.l1) if result.exact else result.l1,
        "abstainers": labels_of(gamma, result.abstainers),
        "classification": list(classify_mechanism(spec, result, gamma.n)),
    }
    if not result.exact:
        out["samples"] = spec.method.samples
        out["seed"] = spec.method.seed
        out["stderr"] = list(result.stderr)
    return out


def sweep_report(gamma: RepresentationMatrix, sweep) -> dict:
    return {
        "domain": sweep.domain,
        "evaluated": sweep.evaluated,
        "skipped": sweep.skipped,
        "min": number(sweep.min_diff),
        "max": number(sweep.max_diff),
        "min_witness": labels_of(gamma, sweep.min_witness),
        "max_witness": labels_of(gamma, sweep.max_witness),
        "min_witnesses": [labels_of(gamma, c) for c in sweep.min_witnesses],
        "max_witnesses": [labels_of(gamma, c) for c in sweep.max_witnesses],
        "interval_2dp": f"[{truncate2(sweep.min_diff)}, {truncate2(sweep.max_diff)}]",
        "rows": [
            {"candidates": labels_of(gamma, c), "diff": number(d)} for c, d in sweep.values
        ],
    }


def to_json(tree: dict, timing: Optional[float] = None) -> str:
    doc = {"version": __version__, **tree}
    if timing is not None:
        doc["timing_s"] = round(timing, 6)
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_table(rows: Sequence[Sequence], header: Optional[Sequence[str]] = None) -> str:
    rows = [[str(c) for c in r] for r in rows]
    if header:
        rows = [list(header)] + rows
    if not rows:
        return ""
    widths = [max(len(r[c]) for r in rows if c < len(r)) for c in range(max(map(len, rows)))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(r)).rstrip() for r in rows]
    if header:
        lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def weights_rows(report: dict) -> tuple[list[str], list[list]]:
    header = ["agent", "weight", "weight_2dp"]
    stderr = report.get("stderr")
    if stderr:
        header.append("stderr")
    rows = []
    for i, label in enumerate(report["labels"]):
        w = report["weights"][i]
        row = [label, w if isinstance(w, str) else f"{w:.6f}", report["weights_2dp"][i]]
        if stderr:
            row.append(f"{stderr[i]:.6f}")
        rows.append(row)
    return header, rows


def sweep_rows(report: dict) -> tuple[list[str], list[list]]:
    header = ["candidates", "diff", "diff_2dp"]
    rows = [[" ".join(r["candidates"]), r["diff"]["exact"], r["diff"]["2dp"]] for r in report["rows"]]
    return header, rows


# -- running example reproduction -----------------------------------------

REFERENCE_SHARES = ("5/3", "2/3", "16/15", "1/5", "7/5")
REFERENCE_FPTP = ("0", "0", "1/2", "0", "1/2")
REFERENCE_PROXY = ("1", "1", "3/2", "0", "3/2")
REFERENCE_LIQUID = ("89/45", "22/45", "14/15", "1/5", "7/5")
REFERENCE_ALL_SELF = "2/45"
REFERENCE_EPSILON = {
    "direct": "0.16",
    "fptp": "[0.33, 0.86]",
    "proxy": "[0.13, 0.33]",
    "liquid": "0.06",
    "sortition": "0.16",
}


def _fracs(values) -> tuple[str, ...]:
    return tuple(format_fraction(v) for v in values)


def reproduce_paper() -> tuple[dict, bool]:
    """Recompute every value of the five-agent running example.

    Returns the report tree and whether every check matched.
    """
    gamma = running_example()
    n = gamma.n
    abce = CandidateSet.parse(gamma, "A,B,C,E")
    checks = []

    def check(name, got, expected):
        checks.append({"name": name, "got": got, "expected": expected, "ok": got == expected})

    check("expected vote share", _fracs(expected_vote_share(gamma)), REFERENCE_SHARES)
    fptp = evaluate(gamma, MechanismSpec(Kind.FPTP, candidates=abce))
    proxy = evaluate(gamma, MechanismSpec(Kind.PROXY, candidates=abce))
    liquid = evaluate(gamma, MechanismSpec(Kind.LIQUID))
    check("fptp weights at {A,B,C,E}", _fracs(fptp.weights), REFERENCE_FPTP)
    check("proxy weights at {A,B,C,E}", _fracs(proxy.weights), REFERENCE_PROXY)
    check("liquid weights", _fracs(liquid.weights), REFERENCE_LIQUID)
    all_self = tuple(range(n))
    p_self = next(p.probability for p in enumerate_profiles(gamma) if p.choices == all_self)
    check("all-self liquid profile probability", format_fraction(p_self), REFERENCE_ALL_SELF)
    check("direct weights", _fracs(evaluate(gamma, MechanismSpec(Kind.DIRECT)).weights), ("1",) * n)
    for k in range(1, n + 1):
        got = _fracs(evaluate(gamma, MechanismSpec(Kind.SORTITION, k=k)).weights)
        check(f"sortition weights k={k}", got, (format_fraction(Fraction(k, n)),) * n)

    epsilon = {}
    for kind in ("direct", "liquid"):
        diff = proportionality_diff(gamma, MechanismSpec(kind)).diff
        epsilon[kind] = {"exact": format_fraction(diff), "2dp": truncate2(diff)}
    sortition = {proportionality_diff(gamma, MechanismSpec(Kind.SORTITION, k=k)).diff for k in range(1, n + 1)}
    s_diff = max(sortition)
    epsilon["sortition"] = {
        "exact": format_fraction(s_diff),
        "2dp": truncate2(s_diff) if len(sortition) == 1 else "varies with k",
    }
    for kind in ("fptp", "proxy"):
        sweep = sweep_epsilon_bounds(gamma, MechanismSpec(kind, candidates=abce), size=4)
        epsilon[kind] = {
            "exact": f"[{format_fraction(sweep.min_diff)}, {format_fraction(sweep.max_diff)}]",
            "2dp": f"[{truncate2(sweep.min_diff)}, {truncate2(sweep.max_diff)}]",
            "min_witness": labels_of(gamma, sweep.min_witness),
            "max_witness": labels_of(gamma, sweep.max_witness),
            "max_witnesses": [labels_of(gamma, c) for c in sweep.max_witnesses],
        }
    for kind, expected in REFERENCE_EPSILON.items():
        check(f"epsilon {kind}", epsilon[kind]["2dp"], expected)

    gammas = {
        "direct": gamma_effectiveness(gamma, MechanismSpec(Kind.DIRECT)),
        "fptp": gamma_effectiveness(gamma, MechanismSpec(Kind.FPTP, candidates=abce)),
        "proxy": gamma_effectiveness(gamma, MechanismSpec(Kind.PROXY, candidates=abce)),
        "liquid": gamma_effectiveness(gamma, MechanismSpec(Kind.LIQUID)),
    }
    ok = all(c["ok"] for c in checks)
    tree = {
        "command": "reproduce-paper",
        "labels": list(gamma.labels),
        "expected_vote_share": list(_fracs(expected_vote_share(gamma))),
        "weights": {
            "direct": ["1"] * n,
            "fptp": list(_fracs(fptp.weights)),
            "proxy": list(_fracs(proxy.weights)),
            "liquid": list(_fracs(liquid.weights)),
            "sortition": "k/n for every agent",
        },
        "all_self_probability": format_fraction(p_self),
        "epsilon": epsilon,
        "gamma_effectiveness": {k: format_fraction(r.expected_gamma) for k, r in gammas.items()},
        "checks": checks,
        "ok": ok,
    }
    return tree, ok


def render_reproduction(tree: dict) -> str:
    lines = [
        "E[V]      = (" + ", ".join(tree["expected_vote_share"]) + ")",
        "all-self  = " + tree["all_self_probability"],
    ]
    for kind in ("direct", "fptp", "proxy", "liquid"):
        lines.append(f"f^{kind:<9}= (" + ", ".join(tree["weights"][kind]) + ")")
    lines.append("")
    rows = [[k, v["exact"], v["2dp"]] for k, v in tree["epsilon"].items()]
    lines.append(render_table(rows, ["epsilon", "exact", "2dp"]))
    lines.append("")
    for c in tree["checks"]:
        got = c["got"] if isinstance(c["got"], str) else "(" + ", ".join(c["got"]) + ")"
        lines.append(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']}: {got}")
    return "\n".join(lines)
