"""Fixture integrity, bundle loading and the family re-derivation runs."""

import json
from fractions import Fraction as F
import pytest

from fano_delta.exactmath import integrate_chamber, integrate_univariate, parse_poly, q, Chamber
from fano_delta.scenarios import (
    build_218,
    builders,
    default_c_samples,
    expected_registry,
    fixtures_dir,
    known_discrepancies,
    load_scenario,
    load_table,
    table_rows,
)


@pytest.fixture(scope="session")
def family_runs():
    return {
        fam: builders.run_family(fam)
        for fam in ("218", "34-surfaces", "34-d4", "34-a3")
    }


def test_fixture_files_round_trip():
    for path in sorted((fixtures_dir()).rglob("*.json")):
        data = json.loads(path.read_text())
        assert json.loads(json.dumps(data)) == data


def test_table_poly_cells_parse_and_reprint():
    for idx in range(1, 15):
        table = load_table(f"table-{idx:02d}")
        cells = []
        for row in table.get("rows", []):
            cells.extend(row["P"])
            cells.extend(row["N"])
            cells.extend(row["u"])
            cells.extend(row.get("v", []))
        for per_curve in table.get("cells", {}).values():
            for cell in per_curve:
                cells.append(cell["t"])
                cells.extend(cell["u"])
        for text in cells:
            p = parse_poly(text)
            assert parse_poly(str(p)) == p


def test_load_scenario_bundles():
    for scenario_id in ("218", "34-surfaces", "34-d4", "34-a3"):
        bundle = load_scenario(scenario_id)
        assert bundle.expected
    with pytest.raises(KeyError):
        load_scenario("nope")


def test_expected_registry_entries():
    registry = expected_registry()
    labels = {(scenario, label) for scenario, label, _ in registry}
    assert ("34-d4", "S_L(G)") in labels
    assert ("34-surfaces", "S_L(F)") in labels
    values = {(s, l): v for s, l, v in registry}
    assert q(values[("34-d4", "S_L(G)")]) == F(59, 18)
    assert q(values[("34-a3", "S_L(G)")]) == F(41, 9)


def test_build_218_validates_c():
    with pytest.raises(ValueError):
        build_218("easy", F(3, 2))
    with pytest.raises(KeyError):
        build_218("nonsense", F(1, 2))
    scenario = build_218("heart", F(1, 2))
    assert scenario.l_cubed == 6 * (1 - F(1, 2)) * (3 - 1) ** 2


def test_default_c_samples():
    assert default_c_samples() == [F(1,10), F(1,4), F(1,3), F(1,2), F(2,3), F(3,4), F(9,10)]


def test_known_discrepancy_registry_well_formed():
    kinds = {"table-cell", "ratio", "printed-range", "fan-cones", "point-value"}
    for entry in known_discrepancies():
        assert entry["kind"] in kinds
        assert "note" in entry and "printed" in entry and "recomputed" in entry


def test_runs_have_no_failures(family_runs):
    for fam, checks in family_runs.items():
        fails = [c for c in checks if c.status == builders.FAIL]
        assert fails == [], f"{fam}: {[c.label for c in fails]}"


def test_flag_sets_match_registry_exactly(family_runs):
    for fam, checks in family_runs.items():
        observed = builders.flagged_identities(checks)
        expected = builders.expected_flag_identities([fam])
        assert observed == expected, fam


def test_flag_scenario_values_recomputable_from_clean_tables(family_runs):
    # Tables 11 and 14 carry no known discrepancy, so integrating the fixture
    # rows directly must reproduce the flag invariants computed by the scans.
    family = builders.ToricFamily("34-a3")
    for curve, table_id, expected in (("alpha1", "table-11", F(1, 2)),
                                      ("alpha0", "table-14", F(3, 16))):
        model = family.surface
        total = F(0)
        for row in table_rows(table_id):
            chamber = Chamber(row.u_lo, row.u_hi, row.v_lo, row.v_hi)
            p_sq = model.pair(row.p, row.p)
            total += F(3, 9) * integrate_chamber(p_sq, chamber)
        if curve == "alpha1":
            # ord-term of the ambient negative part along alpha1 (table 9).
            table9 = load_table("table-09")
            for raw in table9["rows"]:
                lo, hi = q(raw["u"][0]), q(raw["u"][1])
                d = parse_poly(raw["N"][0])
                if d.is_zero():
                    continue
                p_tilde = [parse_poly(s) for s in raw["P"]]
                p_sq = model.pair(p_tilde, p_tilde)
                total += F(3, 9) * integrate_univariate(p_sq * d, lo, hi, "u")
        assert total == expected


def test_zd3_tables_match_certificate_intervals(family_runs):
    for fam in ("34-d4", "34-a3"):
        data = builders.load_scenario_data(fam)
        table = load_table(data["star"]["table_zd3"])
        cert_intervals = [(q(iv["u"][0]), q(iv["u"][1])) for iv in data["certificate"]]
        table_intervals = [(q(r["u"][0]), q(r["u"][1])) for r in table["rows"]]
        assert cert_intervals == table_intervals


def test_218_printed_range_annotations_flagged(family_runs):
    flagged = builders.flagged_identities(family_runs["218"])
    assert len([i for i in flagged if i[0] == "printed-range"]) == 3


def test_scenario_aliases():
    assert load_scenario("218-easy").id == "218"
    assert load_scenario("218-blowup").id == "218"


def test_point_value_recomputable_from_clean_tables(family_runs):
    # S at a point with no correction term equals the fixture-row integral of
    # (P.C)^2; table 11 is discrepancy-free, and the marked point Q16 of its
    # curve meets no component of any negative part, so F vanishes.
    family = builders.ToricFamily("34-a3")
    model = family.surface
    e1 = [F(1), F(0), F(0), F(0), F(0), F(0)]
    total = F(0)
    for row in table_rows("table-11"):
        chamber = Chamber(row.u_lo, row.u_hi, row.v_lo, row.v_hi)
        p_dot = model.pair(row.p, e1)
        total += F(3, 9) * integrate_chamber(p_dot * p_dot, chamber)
    assert total == F(1, 9)
    from fano_delta import flagdelta

    scenario = family.flag_scenario("alpha1")
    assert flagdelta.f_correction(scenario, "Q16") == 0
    assert flagdelta.s_point_flag(scenario, "Q16").value == total


def test_218_closed_forms_at_stress_weights():
    # The chamber topology changes with c; exercise regimes well away from
    # the default samples, including near-degenerate boundary weights.
    extremes = [F(1, 100), F(5, 7), F(13, 17), F(99, 100)]
    checks = builders.run_218(extremes)
    fails = [c for c in checks if c.status == builders.FAIL]
    assert fails == [], [c.label for c in fails]


HEART_BRANCHES_MAIN = [
    # (v_lo, v_hi, P^2, P.z) in the regime where the first split comes from
    # the s-curve (c <= 1/2, or c > 1/2 with u >= 2c-1)
    ("0", "3-2*c-u", "8*c^2+4*c*u+12-20*c-4*u-v^2/2", "v/2"),
    ("3-2*c-u", "4-4*c", "(3-2*c-u)*(11-10*c-u-2*v)/2", "(3-u-2*c)/2"),
    ("4-4*c", "7-6*c-u", "(7-6*c-u-v)^2/2", "(7-6*c-u-v)/2"),
]
HEART_BRANCHES_LOW_U = [
    # c > 1/2, u <= 2c-1: the f-curve enters first
    ("0", "4-4*c", "8*c^2+4*c*u+12-20*c-4*u-v^2/2", "v/2"),
    ("4-4*c", "3-2*c-u", "4*(1-c)*(5-4*c-u-v)", "2-2*c"),
    ("3-2*c-u", "7-6*c-u", "(7-6*c-u-v)^2/2", "(7-6*c-u-v)/2"),
]


@pytest.mark.parametrize("c,regimes", [
    (F(1, 4), [(F(0), F(5, 2), HEART_BRANCHES_MAIN)]),
    (F(3, 4), [(F(0), F(1, 2), HEART_BRANCHES_LOW_U),
               (F(1, 2), F(3, 2), HEART_BRANCHES_MAIN)]),
])
def test_heart_piecewise_formulas_symbolically(c, regimes):
    # Branch-level check of the printed closed forms: every scan chamber's
    # symbolic P^2 and P.z must equal the corresponding printed branch after
    # substituting the boundary weight.
    from fano_delta import flagdelta

    scenario = build_218("heart", c)
    scans = flagdelta.scenario_scans(scenario)
    model = scenario.model
    matched = 0
    for u_lo, u_hi, branches in regimes:
        for ch in [ch for scan in scans for ch in scan.chambers
                   if u_lo <= ch.chamber.u_lo and ch.chamber.u_hi <= u_hi]:
            for v_lo, v_hi, p_sq, p_dot in branches:
                if (parse_poly(v_lo).subs(c=c) == ch.chamber.v_lo
                        and parse_poly(v_hi).subs(c=c) == ch.chamber.v_hi):
                    assert model.pair(ch.p_coeffs, ch.p_coeffs) == \
                        parse_poly(p_sq).subs(c=c)
                    assert model.pair(ch.p_coeffs, scenario.curve_class) == \
                        parse_poly(p_dot).subs(c=c)
                    matched += 1
                    break
            else:
                raise AssertionError(
                    f"no printed branch for chamber {ch.chamber} at c={c}")
    assert matched >= 3 * len(regimes)


DIAMOND_BRANCHES_LOW_U = [
    ("0", "2-2*c", "8*c^2+4*c*u+12-20*c-4*u-v^2/2", "v/2"),
    ("2-2*c", "6-4*c-2*u", "2*(1-c)*(7-5*c-2*u-v)", "1-c"),
    ("6-4*c-2*u", "8-6*c-2*u", "(8-6*c-2*u-v)^2/2", "(8-6*c-2*u-v)/2"),
]
DIAMOND_BRANCHES_HIGH_U = [
    ("0", "6-4*c-2*u", "8*c^2+4*c*u+12-20*c-4*u-v^2/2", "v/2"),
    ("6-4*c-2*u", "2-2*c", "2*(3-2*c-u)*(5-4*c-u-v)", "3-2*c-u"),
    ("2-2*c", "8-6*c-2*u", "(8-6*c-2*u-v)^2/2", "(8-6*c-2*u-v)/2"),
]


def test_diamond_piecewise_formulas_symbolically():
    from fano_delta import flagdelta

    c = F(1, 2)
    scenario = build_218("diamond", c)
    scans = flagdelta.scenario_scans(scenario)
    model = scenario.model
    regimes = [(F(0), F(3, 2), DIAMOND_BRANCHES_LOW_U),
               (F(3, 2), F(2), DIAMOND_BRANCHES_HIGH_U)]
    matched = 0
    for u_lo, u_hi, branches in regimes:
        for ch in [ch for scan in scans for ch in scan.chambers
                   if u_lo <= ch.chamber.u_lo and ch.chamber.u_hi <= u_hi]:
            for v_lo, v_hi, p_sq, p_dot in branches:
                if (parse_poly(v_lo).subs(c=c) == ch.chamber.v_lo
                        and parse_poly(v_hi).subs(c=c) == ch.chamber.v_hi):
                    assert model.pair(ch.p_coeffs, ch.p_coeffs) == \
                        parse_poly(p_sq).subs(c=c)
                    assert model.pair(ch.p_coeffs, scenario.curve_class) == \
                        parse_poly(p_dot).subs(c=c)
                    matched += 1
                    break
            else:
                raise AssertionError(f"no printed branch for chamber {ch.chamber}")
    assert matched >= 6


def _match_branches(case, c, regimes):
    from fano_delta import flagdelta

    scenario = build_218(case, c)
    scans = flagdelta.scenario_scans(scenario)
    model = scenario.model
    matched = 0
    for u_lo, u_hi, branches in regimes:
        chambers = [ch for scan in scans for ch in scan.chambers
                    if u_lo <= ch.chamber.u_lo and ch.chamber.u_hi <= u_hi]
        assert chambers, (case, c, u_lo, u_hi)
        for ch in chambers:
            for v_lo, v_hi, p_sq, p_dot in branches:
                if (parse_poly(v_lo).subs(c=c) == ch.chamber.v_lo
                        and parse_poly(v_hi).subs(c=c) == ch.chamber.v_hi):
                    assert model.pair(ch.p_coeffs, ch.p_coeffs) == \
                        parse_poly(p_sq).subs(c=c), (case, c, v_lo)
                    assert model.pair(ch.p_coeffs, scenario.curve_class) == \
                        parse_poly(p_dot).subs(c=c), (case, c, v_lo)
                    matched += 1
                    break
            else:
                raise AssertionError(f"no stored branch for {ch.chamber} in {case}@{c}")
    return matched


def test_ok_case_piecewise_formulas_symbolically():
    low_u = [
        ("0", "2-2*c", "8*c^2+4*c*u-v^2-20*c-4*u+12", "v"),
        ("2-2*c", "3-2*c-u", "4*(1-c)*(4-3*c-u-v)", "2-2*c"),
        ("3-2*c-u", "5-4*c-u", "(5-4*c-u-v)^2", "5-4*c-u-v"),
    ]
    high_u = [
        ("0", "3-2*c-u", "8*c^2+4*c*u-v^2-20*c-4*u+12", "v"),
        ("3-2*c-u", "2-2*c", "(3-2*c-u)*(7-6*c-u-2*v)", "3-2*c-u"),
        ("2-2*c", "5-4*c-u", "(5-4*c-u-v)^2", "5-4*c-u-v"),
    ]
    c = F(1, 3)
    assert _match_branches("ok", c, [(F(0), F(1), low_u), (F(1), F(7, 3), high_u)]) >= 6


def test_blowup_case_piecewise_formulas_symbolically():
    low_u = [
        ("0", "u", "(4-4*c)*u-v^2", "v"),
        ("u", "2-2*c", "u*(4-4*c+u-2*v)", "u"),
        ("2-2*c", "2-2*c+u", "(2-2*c+u-v)^2", "2-2*c+u-v"),
    ]
    high_u = [
        ("0", "2-2*c", "(4-4*c)*u-v^2", "v"),
        ("2-2*c", "u", "4*(1-c)*(1-c+u-v)", "2-2*c"),
        ("u", "2-2*c+u", "(2-2*c+u-v)^2", "2-2*c+u-v"),
    ]
    c = F(1, 2)
    assert _match_branches("blowup", c, [(F(0), F(1), low_u), (F(1), F(2), high_u)]) >= 6


def test_blowup_tangent_piecewise_formulas_symbolically():
    # The branch formulas themselves are consistent; only three of the
    # printed v-range endpoints are wrong (registered as flags), and the
    # derived upper bound 2-2c+2u is used here.
    low_u = [
        ("0", "2*u", "(4-4*c)*u-v^2/2", "v/2"),
        ("2*u", "2-2*c", "2*u*(2-2*c+u-v)", "u"),
        ("2-2*c", "2-2*c+2*u", "(2-2*c+2*u-v)^2/2", "(2-2*c+2*u-v)/2"),
    ]
    high_u = [
        ("0", "2-2*c", "(4-4*c)*u-v^2/2", "v/2"),
        ("2-2*c", "2*u", "2*(1-c)*(1-c+2*u-v)", "1-c"),
        ("2*u", "2-2*c+2*u", "(2-2*c+2*u-v)^2/2", "(2-2*c+2*u-v)/2"),
    ]
    c = F(1, 3)
    assert _match_branches("blowup-tangent", c,
                           [(F(0), F(2, 3), low_u), (F(2, 3), F(7, 3), high_u)]) >= 6
