"""Flag S-invariants, corrections, discrepancies and delta bounds."""

from fractions import Fraction as F

import pytest

from fano_delta.exactmath import integrate_chamber, parse_poly
from fano_delta.flagdelta import (
    BasePiece,
    FlagScenario,
    MarkedPoint,
    a_point_on_curve,
    beta,
    delta_lower_bound,
    f_correction,
    log_discrepancy_weighted,
    s_curve_flag,
    s_from_volume,
    s_point_flag,
    scenario_scans,
)
from fano_delta.scenarios import load_model


def weighted_scenario():
    model = load_model("m34-s-weighted")
    return FlagScenario(
        name="weighted",
        l_cubed=F(9),
        model=model,
        curve_class=(F(1), F(0), F(0)),
        pieces=(
            BasePiece(F(0), F(1), tuple(parse_poly(s) for s in ("3", "1", "1"))),
            BasePiece(F(1), F(2), tuple(parse_poly(s) for s in ("4-u", "1", "2-u"))),
        ),
        points=(
            MarkedPoint("z", F(1), ((1, F(1)),)),
            MarkedPoint("q", F(1, 2), ((2, F(1, 2)),)),
            MarkedPoint("generic", F(1)),
        ),
    )


def test_s_from_volume_values():
    assert s_from_volume(9, [(0, 1, parse_poly("9-9*u"))]) == F(1, 2)
    assert s_from_volume(9, [(0, 1, parse_poly("9-6*u-3*u^2"))]) == F(5, 9)
    assert s_from_volume(
        9, [(0, 1, parse_poly("9-6*u")), (1, 2, parse_poly("3*(2-u)^2"))]
    ) == F(7, 9)


def test_s_from_volume_rejects_negative_volume():
    with pytest.raises(ValueError, match="invalid volume function"):
        s_from_volume(9, [(0, 3, parse_poly("(u-1)*(u-2)"))])
    with pytest.raises(ValueError, match="invalid volume function"):
        s_from_volume(9, [(0, 1, parse_poly("1-u/2"))])  # nonzero right endpoint


def test_s_curve_weighted_case():
    result = s_curve_flag(weighted_scenario())
    assert result.value == F(13, 9)
    assert result.check()


def test_s_point_values_weighted_case():
    sc = weighted_scenario()
    assert s_point_flag(sc, "generic").value == F(3, 16)
    assert s_point_flag(sc, "q").value == F(2, 9)
    assert s_point_flag(sc, "z").value == F(1, 2)


def test_f_correction_examples():
    sc = weighted_scenario()
    assert f_correction(sc, "generic") == 0
    # Derived: difference of the point total and the base double integral.
    assert f_correction(sc, "q") == F(2, 9) - F(3, 16) == F(5, 144)


def test_f_correction_is_point_total_minus_base():
    sc = weighted_scenario()
    model = sc.model
    base = F(0)
    for scan in scenario_scans(sc):
        for ch in scan.chambers:
            p_dot = model.pair(ch.p_coeffs, sc.curve_class)
            base += F(3, 9) * integrate_chamber(p_dot * p_dot, ch.chamber)
    for name in ("z", "q", "generic"):
        assert s_point_flag(sc, name).value == base + f_correction(sc, name)


def test_log_discrepancy_examples():
    assert log_discrepancy_weighted((1, 3, 1), [(F(1, 2), 3)]) == F(7, 2)
    assert log_discrepancy_weighted((2, 4, 1), [(F(1, 2), 4)]) == 5
    assert log_discrepancy_weighted((1, 1, 1)) == 3
    with pytest.raises(ValueError, match="not a log Fano"):
        log_discrepancy_weighted((1, 1, 1), [(1, 4)])
    with pytest.raises(ValueError, match="positive"):
        log_discrepancy_weighted((0, 1, 1))


def test_a_point_on_curve():
    a_map = a_point_on_curve([("Q16", F(2, 3)), ("Q14", F(1, 2))])
    assert a_map == {"Q16": F(1, 3), "Q14": F(1, 2)}
    assert a_point_on_curve([("Q16", F(3, 4))])["Q16"] == F(1, 4)
    with pytest.raises(ValueError, match="non-klt"):
        a_point_on_curve([("bad", 1)])


def test_delta_lower_bound():
    assert delta_lower_bound([(1, F(7, 9)), (1, F(1, 2)), (1, F(5, 9))]) == F(9, 7)
    assert delta_lower_bound([(F(5, 3), F(5, 3))]) == 1
    assert delta_lower_bound([(F(7, 2), F(59, 18))]) == F(63, 59)
    with pytest.raises(ValueError, match="degenerate level"):
        delta_lower_bound([(1, 0)])


def test_delta_scaling_invariance():
    levels = [(F(7, 2), F(59, 18)), (1, F(1, 2)), (F(2, 3), F(4, 9))]
    scaled = [(a * F(5, 7), s * F(5, 7)) for a, s in levels]
    assert delta_lower_bound(levels) == delta_lower_bound(scaled)


def test_beta():
    assert beta(1, F(5, 9)) == F(4, 9)
    assert beta(1, 1) == 0
    assert beta(1, F(7, 9)) == F(2, 9)


def test_breakdown_additivity():
    sc = weighted_scenario()
    for result in (s_curve_flag(sc), s_point_flag(sc, "z")):
        assert result.value == sum((x for _, x in result.breakdown), F(0))


def test_invalid_correction_data_detected():
    model = load_model("m34-s-weighted")
    sc = FlagScenario(
        name="bad-sigma",
        l_cubed=F(9),
        model=model,
        curve_class=(F(1), F(0), F(0)),
        pieces=(BasePiece(F(0), F(1), tuple(parse_poly(s) for s in ("3", "1", "1"))),),
        sigma=(F(0), F(5), F(0)),  # oversubtraction makes the order negative
        points=(MarkedPoint("z", F(1), ((1, F(1)),)),),
    )
    with pytest.raises(ValueError, match="invalid correction data"):
        f_correction(sc, "z")
