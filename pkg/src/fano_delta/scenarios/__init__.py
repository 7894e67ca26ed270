"""Machine-readable encodings of every verified configuration.

Fixture files live under ``fixtures/`` (override the directory with the
FANO_DELTA_FIXTURES environment variable):

    fixtures/fans/*.json         fan schema {"rays": [[i,j,k],...], "cones": [[a,b,c],...]}
    fixtures/models/*.json       {"curves": [...], "gram": [["p/q",...],...], "generates_pseff": true}
    fixtures/tables/table-NN.json  appendix tables as verbatim row data
    fixtures/scenarios/*.json    per-family scenario bundles
    fixtures/known_discrepancies.json

Tables are stored as data, never as code, so the verification harness and
the source tables stay diffable.  All rationals are "p/q" strings; small
polynomials are compact expressions like "(8-u-3*v)/3".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from ..exactmath import parse_poly, q
from ..surfzar import SurfaceModel, TableRow
from ..toric3 import Fan3, fan_from_dict


def fixtures_dir() -> Path:
    override = os.environ.get("FANO_DELTA_FIXTURES")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "fixtures"


def _load_json(relative: str):
    path = fixtures_dir() / relative
    with open(path) as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def load_fan(name: str) -> Fan3:
    return fan_from_dict(_load_json(f"fans/{name}.json"))


@lru_cache(maxsize=None)
def load_model(name: str) -> SurfaceModel:
    data = _load_json(f"models/{name}.json")
    return SurfaceModel(data["curves"], data["gram"], data.get("generates_pseff", True))


@lru_cache(maxsize=None)
def load_table(table_id: str) -> dict:
    return _load_json(f"tables/{table_id}.json")


@lru_cache(maxsize=None)
def load_scenario_data(scenario_id: str) -> dict:
    return _load_json(f"scenarios/family-{scenario_id}.json")


@lru_cache(maxsize=None)
def known_discrepancies() -> list[dict]:
    return _load_json("known_discrepancies.json")


def table_rows(table_id: str) -> list[TableRow]:
    data = load_table(table_id)
    rows = []
    for row in data["rows"]:
        rows.append(
            TableRow(
                u_lo=q(row["u"][0]),
                u_hi=q(row["u"][1]),
                v_lo=parse_poly(row["v"][0]),
                v_hi=parse_poly(row["v"][1]),
                p=tuple(parse_poly(s) for s in row["P"]),
                n=tuple(parse_poly(s) for s in row["N"]),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Rational functions of the boundary weight c
# ---------------------------------------------------------------------------


def rf_eval(spec, c: Fraction) -> Fraction:
    """Evaluate a fixture closed form at an exact c.

    Accepts "expr" strings, {"num": ..., "den": ...} pairs, and branched
    lists [{"c_max": "1/2", ...}, {"c_min": "1/2", ...}].
    """
    if isinstance(spec, list):
        for branch in spec:
            lo = branch.get("c_min")
            hi = branch.get("c_max")
            if lo is not None and not c > q(lo):
                continue
            if hi is not None and not c <= q(hi):
                continue
            return rf_eval({k: v for k, v in branch.items() if k in ("num", "den")}, c)
        raise ValueError(f"no branch covers c={c}")
    if isinstance(spec, str):
        return parse_poly(spec)(c=c)
    num = parse_poly(spec["num"])(c=c)
    den = parse_poly(spec.get("den", "1"))(c=c)
    return num / den


# ---------------------------------------------------------------------------
# Scenario bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioBundle:
    id: str
    kind: str
    inputs: dict
    expected: tuple[tuple[str, object], ...]


_SCENARIO_IDS = ("218", "34-surfaces", "34-d4", "34-a3")
_SCENARIO_ALIASES = {"218-easy": "218", "218-blowup": "218"}


def load_scenario(scenario_id: str) -> ScenarioBundle:
    scenario_id = _SCENARIO_ALIASES.get(scenario_id, scenario_id)
    if scenario_id not in _SCENARIO_IDS:
        raise KeyError(f"unknown scenario id {scenario_id!r}")
    data = load_scenario_data(scenario_id)
    _validate_bundle(scenario_id, data)
    expected: list[tuple[str, object]] = []
    if scenario_id in ("34-d4", "34-a3"):
        for label, value in data["expected"].items():
            expected.append((label, value))
        for curve, case in data["curve_cases"].items():
            expected.append((f"S_L(W^G;{curve})", case["expected_s_curve"]))
            for point in case["points"]:
                if point["expected_s"] is not None:
                    expected.append((f"S(W^G,{curve};{point['name']})", point["expected_s"]))
    elif scenario_id == "34-surfaces":
        for name, vol in data["volumes"].items():
            expected.append((f"S_L({name})", vol["expected_s"]))
            expected.append((f"beta({name})", vol["expected_beta"]))
        for name, flag in data["flags"].items():
            expected.append((f"S_L(W;{name})", flag["expected_s_curve"]))
            for point in flag["points"]:
                expected.append((f"S(W;{name};{point['name']})", point["expected_s"]))
        for delta in data["deltas"]:
            expected.append((f"delta[{delta['name']}]", delta["expected"]))
    else:
        for case, spec in data["cases"].items():
            expected.append((f"{case}:{spec['ambient']['label']}", spec["ambient"]["expected"]))
            expected.append((f"{case}:S_curve", spec["expected_s_curve"]))
            for point in spec["points"]:
                expected.append((f"{case}:S({point['name']})", point["expected_s"]))
    return ScenarioBundle(
        id=scenario_id, kind=data["kind"], inputs=data, expected=tuple(expected)
    )


def _validate_bundle(scenario_id: str, data: dict) -> None:
    if scenario_id in ("34-d4", "34-a3"):
        for name in (data["ambient_fan"], data["resolution_fan"]):
            load_fan(name)
        for interval in data["certificate"]:
            load_fan(interval["model"])
        load_model(data["star"]["surface_model"])
        for key in ("table_zd3", "table_restriction", "table_threshold"):
            load_table(data["star"][key])
        for case in data["curve_cases"].values():
            load_table(case["table"])
    elif scenario_id == "218":
        for case in data["cases"].values():
            load_model(case["model"])
    elif scenario_id == "34-surfaces":
        for flag in data["flags"].values():
            load_model(flag["model"])


def expected_registry() -> list[tuple[str, str, object]]:
    """Every (scenario, label, expected value) under test."""
    out = []
    for scenario_id in _SCENARIO_IDS:
        bundle = load_scenario(scenario_id)
        for label, value in bundle.expected:
            out.append((scenario_id, label, value))
    return out


def build_218(case: str, c: Fraction):
    """Flag scenario for one section-2 configuration at exact parameter c."""
    from . import builders

    c = q(c)
    if not 0 < c < 1:
        raise ValueError("c must lie strictly between 0 and 1")
    data = load_scenario_data("218")
    if case not in data["cases"]:
        raise KeyError(f"unknown 2.18 case {case!r}")
    return builders.build_218_case(data["cases"][case], case, c)


def default_c_samples() -> list[Fraction]:
    return [q(s) for s in load_scenario_data("218")["default_c_samples"]]
