"""Command-line verification and computation interface.

Subcommands:
  verify   run every registry entry and table verification for a family
  compute  print one exact invariant as "p/q"
  report   machine- or human-readable report with deterministic ordering

Exit codes: 0 all checks pass and the flagged set equals the registered
known-discrepancy set; 1 any mismatch beyond the registered set; 2 usage
errors.  All values print as exact fractions; --decimal appends a 6-digit
approximation clearly marked as approximate.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import flagdelta, toric3
from .exactmath import parse_poly, q
from .scenarios import builders, load_fan, load_scenario_data

FAMILIES = ("218", "34-surfaces", "34-d4", "34-a3")


@dataclass
class Report:
    families: tuple[str, ...]
    entries: list[builders.CheckResult] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(e.status == builders.FAIL for e in self.entries):
            return 1
        expected = builders.expected_flag_identities(self.families)
        return 0 if builders.flagged_identities(self.entries) == expected else 1

    def sorted_entries(self) -> list[builders.CheckResult]:
        return sorted(self.entries, key=lambda e: (e.scenario, e.label))

    def to_json(self) -> dict:
        return {
            "families": list(self.families),
            "entries": [
                {
                    "scenario": e.scenario,
                    "label": e.label,
                    "computed": e.computed,
                    "expected": e.expected,
                    "status": e.status,
                }
                for e in self.sorted_entries()
            ],
            "flagged": sorted(str(i) for i in builders.flagged_identities(self.entries)),
            "exit_code": self.exit_code,
        }


def build_report(family: str, c_values) -> Report:
    families = FAMILIES if family == "all" else (family,)
    report = Report(families=families)
    for fam in families:
        report.entries.extend(builders.run_family(fam, c_values))
    return report


def _print_table(report: Report, decimal: bool) -> None:
    counts = {"pass": 0, "fail": 0, "flagged": 0}
    for entry in report.sorted_entries():
        counts[entry.status] += 1
        if entry.status == builders.PASS:
            continue
        print(f"[{entry.status.upper():7s}] {entry.scenario}: {entry.label}")
        print(f"          computed: {_fmt_value(entry.computed, decimal)}")
        if entry.expected is not None:
            print(f"          expected: {_fmt_value(entry.expected, decimal)}")
    print(
        f"{counts['pass']} passed, {counts['flagged']} flagged (known discrepancies), "
        f"{counts['fail']} failed"
    )


def _fmt_value(text: str, decimal: bool) -> str:
    if not decimal:
        return text
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        return text
    return f"{text} (~{float(value):.6f}, approximate)"


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


class UsageError(Exception):
    pass


def _compute(scenario: str, op: str, target: str, c_arg: str | None) -> Fraction:
    if scenario in ("34-d4", "34-a3"):
        return _compute_toric(scenario, op, target)
    if scenario == "34-surfaces":
        return _compute_surfaces(op, target)
    if scenario.startswith("218"):
        return _compute_218(op, target, c_arg)
    raise UsageError(f"unknown scenario {scenario!r}")


def _compute_toric(scenario: str, op: str, target: str) -> Fraction:
    data = load_scenario_data(scenario)
    family = builders.ToricFamily(scenario)
    if op == "toric-s":
        vectors = {
            "G": tuple(data["weight_vector"]),
            "E": (0, 0, 1),
            "F": (1, 0, 0),
            "S": (0, 1, 0),
        }
        if target not in vectors:
            raise UsageError(f"unknown toric-s target {target!r}")
        fan = load_fan(data["ambient_fan"])
        l_div = toric3.ToricDivisor(fan, [parse_poly(s) for s in data["l_on_y"]])
        return toric3.s_invariant_toric(l_div, vectors[target])
    if op == "s-curve":
        if target not in data["curve_cases"]:
            raise UsageError(f"unknown curve {target!r}")
        return flagdelta.s_curve_flag(family.flag_scenario(target)).value
    if op == "s-point":
        if ":" not in target:
            raise UsageError("s-point target must look like curve:point")
        curve, point = target.split(":", 1)
        if curve not in data["curve_cases"]:
            raise UsageError(f"unknown curve {curve!r}")
        return flagdelta.s_point_flag(family.flag_scenario(curve), point).value
    raise UsageError(f"op {op!r} not available for scenario {scenario!r}")


def _compute_surfaces(op: str, target: str) -> Fraction:
    data = load_scenario_data("34-surfaces")
    if op in ("s-divisor", "beta"):
        if target not in data["volumes"]:
            raise UsageError(f"unknown divisor {target!r}")
        vol = data["volumes"][target]
        pieces = [(q(p["lo"]), q(p["hi"]), parse_poly(p["poly"])) for p in vol["pieces"]]
        s_val = flagdelta.s_from_volume(q(data["l_cubed"]), pieces)
        return s_val if op == "s-divisor" else flagdelta.beta(1, s_val)
    if op == "s-curve":
        if target not in data["flags"]:
            raise UsageError(f"unknown flag {target!r}")
        scenario = builders._surface_flag_scenario(
            "34-surfaces", target, data["flags"][target], q(data["l_cubed"])
        )
        return flagdelta.s_curve_flag(scenario).value
    if op == "s-point":
        if ":" not in target:
            raise UsageError("s-point target must look like flag:point")
        name, point = target.split(":", 1)
        if name not in data["flags"]:
            raise UsageError(f"unknown flag {name!r}")
        scenario = builders._surface_flag_scenario(
            "34-surfaces", name, data["flags"][name], q(data["l_cubed"])
        )
        return flagdelta.s_point_flag(scenario, point).value
    if op == "delta":
        for spec in data["deltas"]:
            if spec["name"] == target:
                return flagdelta.delta_lower_bound(
                    [(q(a), q(s)) for a, s in spec["levels"]]
                )
        raise UsageError(f"unknown delta assembly {target!r}")
    raise UsageError(f"op {op!r} not available for 34-surfaces")


def _compute_218(op: str, target: str, c_arg: str | None) -> Fraction:
    from .scenarios import build_218, rf_eval

    if c_arg is None:
        raise UsageError("--c is required for scenario 218")
    c = q(c_arg)
    data = load_scenario_data("218")
    case_name, _, point = target.partition(":")
    if case_name not in data["cases"]:
        raise UsageError(f"unknown 2.18 case {case_name!r}")
    spec = data["cases"][case_name]
    if op == "s-divisor":
        pieces = [
            (parse_poly(p["lo"])(c=c), parse_poly(p["hi"])(c=c), parse_poly(p["poly"]).subs(c=c))
            for p in spec["ambient"]["volume"]
        ]
        return flagdelta.s_from_volume(rf_eval(data["l_cubed"], c), pieces)
    scenario = build_218(case_name, c)
    if op == "s-curve":
        return flagdelta.s_curve_flag(scenario).value
    if op == "s-point":
        if not point:
            raise UsageError("s-point target must look like case:point")
        return flagdelta.s_point_flag(scenario, point).value
    if op == "delta":
        pieces = [
            (parse_poly(p["lo"])(c=c), parse_poly(p["hi"])(c=c), parse_poly(p["poly"]).subs(c=c))
            for p in spec["ambient"]["volume"]
        ]
        s_ambient = flagdelta.s_from_volume(rf_eval(data["l_cubed"], c), pieces)
        levels = [(rf_eval(spec["ambient"]["a"], c), s_ambient),
                  (scenario.curve_a, flagdelta.s_curve_flag(scenario).value)]
        for pt in spec["points"]:
            levels.append(
                (rf_eval(pt["a"], c), flagdelta.s_point_flag(scenario, pt["name"]).value)
            )
        return flagdelta.delta_lower_bound(levels)
    raise UsageError(f"op {op!r} not available for scenario 218")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fano-delta",
        description="Exact verification of the surface/toric flag invariants",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run all checks for a family")
    p_verify.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    p_verify.add_argument("--c", action="append",
                          help="rational boundary weight p/q (repeatable; default: the seven stored samples)")
    p_verify.add_argument("--decimal", action="store_true",
                          help="append approximate decimals to printed values")

    p_compute = sub.add_parser("compute", help="print one exact invariant")
    p_compute.add_argument("--scenario", required=True)
    p_compute.add_argument("--op", required=True,
                           choices=["s-divisor", "s-curve", "s-point", "delta", "beta", "toric-s"])
    p_compute.add_argument("--target", required=True)
    p_compute.add_argument("--c")
    p_compute.add_argument("--decimal", action="store_true")

    p_report = sub.add_parser("report", help="emit a full report")
    p_report.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    p_report.add_argument("--format", choices=["text", "json"], default="text")
    p_report.add_argument("--c", action="append")
    p_report.add_argument("--decimal", action="store_true")

    args = parser.parse_args(argv)

    if args.command == "compute":
        try:
            value = _compute(args.scenario, args.op, args.target, args.c)
        except (UsageError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(_fmt_value(str(value), args.decimal))
        return 0

    c_values = [q(s) for s in args.c] if args.c else None
    try:
        report = build_report(args.family, c_values)
    except FileNotFoundError as exc:
        print(f"error: missing fixture: {exc}", file=sys.stderr)
        return 1

    if args.command == "verify" or args.format == "text":
        _print_table(report, args.decimal)
    else:
        print(json.dumps(report.to_json(), indent=1))
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
