"""Fan validation, intersection numbers, pullbacks, stars and polytopes."""

import random
from fractions import Fraction as F

import pytest

from fano_delta.exactmath import Poly, parse_poly
from fano_delta.scenarios import load_fan
from fano_delta.toric3 import (
    CurveClass,
    Fan3,
    ToricDivisor,
    curve_intersection,
    divisor_polytope,
    divisor_from_dict,
    divisor_to_dict,
    fan_from_dict,
    fan_to_dict,
    intersection_number,
    is_nef,
    lattice_min,
    nef_on_interval,
    poly_from_obj,
    poly_to_obj,
    polytope_min,
    polytope_moment,
    polytope_vertices,
    polytope_volume,
    pullback,
    restrict_to_star,
    s_invariant_toric,
    star_surface,
    surface_gram,
    triple_product,
    validate_fan,
    verify_zariski3,
)

U = Poly.var("u")


@pytest.fixture(scope="module")
def w0():
    return load_fan("d4-w0")


@pytest.fixture(scope="module")
def y():
    return load_fan("y")


@pytest.fixture(scope="module")
def l_on_w0(w0):
    return ToricDivisor(w0, [7 - U, 1, 1, 2, 0, 0, 0])


# ---------------------------------------------------------------------------
# Fan validation
# ---------------------------------------------------------------------------


def test_validate_accepts_the_blowup_fan(w0):
    report = validate_fan(w0)
    assert report.valid and not report.issues


def test_validate_flags_missing_cone(w0):
    broken = Fan3(w0.rays, [c for c in w0.cones if c != (0, 1, 3)])
    report = validate_fan(broken)
    assert not report.valid
    assert any("face [0, 1]" in issue for issue in report.issues)


def test_validate_flags_nonprimitive_ray(w0):
    rays = [(2, 6, -2) if r == (1, 3, -1) else r for r in w0.rays]
    report = validate_fan(Fan3(rays, w0.cones))
    assert not report.valid
    assert any("not primitive" in issue for issue in report.issues)


# ---------------------------------------------------------------------------
# Intersection numbers
# ---------------------------------------------------------------------------


def test_printed_triple_products(w0):
    assert triple_product(w0, 0, 1, 4) == F(1, 3)
    assert triple_product(w0, 2, 2, 6) == -1
    assert triple_product(w0, 3, 3, 6) == 0
    assert triple_product(w0, 1, 2, 6) == 0  # not a cone


def test_symmetry_and_multilinearity(w0):
    rng = random.Random(3)
    divs = [
        ToricDivisor(w0, [F(rng.randrange(-4, 5)) for _ in range(7)]) for _ in range(3)
    ]
    d1, d2, d3 = divs
    base = intersection_number(d1, d2, d3)
    assert base == intersection_number(d3, d1, d2) == intersection_number(d2, d3, d1)
    a, b = F(3, 2), F(-5, 3)
    combo = ToricDivisor(w0, [a * x + b * y for x, y in zip(d1.coeffs, d2.coeffs)])
    assert intersection_number(combo, d2, d3) == a * base + b * intersection_number(
        d2, d2, d3
    )


def test_principal_divisors_annihilate(w0):
    rng = random.Random(4)
    relations = [
        [1, 1, 0, 0, 0, 0, -1],
        [3, 0, 0, 1, 0, -1, 0],
        [-1, 0, 1, 0, -1, 1, 0],
    ]
    for rel in relations:
        div_chi = ToricDivisor(w0, rel)
        for _ in range(5):
            d1 = ToricDivisor(w0, [F(rng.randrange(-5, 6)) for _ in range(7)])
            d2 = ToricDivisor(w0, [F(rng.randrange(-5, 6)) for _ in range(7)])
            assert intersection_number(div_chi, d1, d2).is_zero()


def test_curve_intersections(w0, l_on_w0):
    assert curve_intersection(l_on_w0, CurveClass(w0, (0, 1))) == parse_poly("u/3")
    at_one = curve_intersection(l_on_w0.at_u(1), CurveClass(w0, (0, 1)))
    assert at_one.as_fraction() == F(1, 3)
    at_two = curve_intersection(l_on_w0.at_u(2), CurveClass(w0, (1, 3)))
    assert at_two.as_fraction() == -1
    zero = ToricDivisor(w0, [0] * 7)
    assert curve_intersection(zero, CurveClass(w0, (0, 1))).is_zero()


def test_nefness(w0, l_on_w0):
    assert is_nef(l_on_w0.at_u(F(1, 2))).nef
    bad = is_nef(l_on_w0.at_u(F(3, 2)))
    assert not bad.nef and bad.witness == (1, 3)
    assert is_nef(ToricDivisor(w0, [0] * 7)).nef
    assert nef_on_interval(l_on_w0, 0, 1).nef


def test_different_fans_error(w0, y):
    d_y = ToricDivisor(y, [1, 1, 2, 0, 0, 0])
    with pytest.raises(ValueError, match="different fans"):
        curve_intersection(d_y, CurveClass(w0, (0, 1)))


# ---------------------------------------------------------------------------
# Pullbacks
# ---------------------------------------------------------------------------


def test_pullback_lists(w0):
    wt = load_fan("d4-wt")
    t0 = ToricDivisor(w0, [1, 0, 0, 0, 0, 0, 0])
    t2 = ToricDivisor(w0, [0, 0, 1, 0, 0, 0, 0])
    assert pullback(wt, w0, t0).coeffs == ToricDivisor(wt, [1] + [0] * 10).coeffs
    expected_t2 = [0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 2]
    assert pullback(wt, w0, t2).coeffs == ToricDivisor(wt, expected_t2).coeffs
    w2 = load_fan("d4-w2")
    t0_w2 = ToricDivisor(w2, [1, 0, 0, 0, 0, 0, 0])
    expected = [1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1]
    assert pullback(wt, w2, t0_w2).coeffs == ToricDivisor(wt, expected).coeffs


def test_pullback_rejects_non_refinement(w0):
    w1 = load_fan("d4-w1")
    d = ToricDivisor(w1, [1, 0, 0, 0, 0, 0, 0])
    with pytest.raises(ValueError, match="not a refinement"):
        pullback(w0, w1, d)  # W0 does not refine W1


def test_projection_formula_sample(w0):
    wt = load_fan("d4-wt")
    rng = random.Random(9)
    for _ in range(3):
        divs = [
            ToricDivisor(w0, [F(rng.randrange(-3, 4)) for _ in range(7)])
            for _ in range(3)
        ]
        coarse = intersection_number(*divs)
        fine = intersection_number(*(pullback(wt, w0, d) for d in divs))
        assert coarse == fine


# ---------------------------------------------------------------------------
# Star surfaces and 2D Gram matrices
# ---------------------------------------------------------------------------


def test_star_surface_quotient_rays():
    wt = load_fan("d4-wt")
    star = star_surface(wt, 0, {1: (1, 0), 3: (0, 1)})
    images = dict(zip(star.adjacent, star.fan2.rays))
    assert images[1] == (1, 0) and images[3] == (0, 1)
    assert images[9] == (1, 2) and images[8] == (1, 3)
    assert images[7] == (-1, 0) and images[4] == (-1, -3)
    assert all(m == 1 for m in star.mults)


def test_star_surface_fractional_multiplicities():
    wt = load_fan("a3-wt")
    star = star_surface(wt, 0, {1: (1, 0), 3: (0, 1)})
    table = star.restriction_table()
    assert table[4][1] == F(1, 2)  # T4 restricts with multiplier 1/2
    assert table[7][1] == F(1, 2)
    assert table[1][1] == 1


def test_star_surface_restriction_vector():
    wt = load_fan("d4-wt")
    star = star_surface(wt, 0, {1: (1, 0), 3: (0, 1)})
    t4 = ToricDivisor(wt, [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0])
    restricted = restrict_to_star(star, t4)
    pos = star.adjacent.index(4)
    assert restricted[pos] == Poly.const(1)
    # T0 restricts through the chi_1 relation to -(alpha1+alpha2+alpha3).
    t0 = ToricDivisor(wt, [1] + [0] * 10)
    r0 = restrict_to_star(star, t0, (1, 0, 0))
    by_ray = dict(zip(star.adjacent, r0))
    assert by_ray[1] == Poly.const(-1)
    assert by_ray[8] == Poly.const(-1) and by_ray[9] == Poly.const(-1)
    assert by_ray[3].is_zero() and by_ray[4].is_zero() and by_ray[7].is_zero()


def test_star_requires_valid_basis():
    wt = load_fan("d4-wt")
    with pytest.raises(ValueError):
        star_surface(wt, 0, {1: (1, 0), 3: (0, 2)})
    with pytest.raises(ValueError, match="isolated ray"):
        star_surface(Fan3([(1, 0, 0)], []), 0, {})


def test_surface_gram_quadric():
    from fano_delta.toric3 import Fan2

    fan2 = Fan2([(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])
    gram = surface_gram(fan2)
    assert gram[0][0] == 0 and gram[1][1] == 0
    assert gram[0][1] == 1 and gram[1][2] == 1 and gram[0][2] == 0


def test_surface_gram_incomplete():
    from fano_delta.toric3 import Fan2

    with pytest.raises(ValueError, match="not complete"):
        surface_gram(Fan2([(1, 0), (0, 1)], [(0, 1)]))


# ---------------------------------------------------------------------------
# Polytopes and the toric S-invariant
# ---------------------------------------------------------------------------


def test_divisor_polytope_inequalities(y):
    p = divisor_polytope(ToricDivisor(y, [1, 1, 2, 0, 0, 0]))
    assert list(p.normals) == list(y.rays)
    assert list(p.rhs) == [F(-1), F(-1), F(-2), F(0), F(0), F(0)]


def test_zero_divisor_polytope_is_origin(y):
    p = divisor_polytope(ToricDivisor(y, [0] * 6))
    assert polytope_vertices(p) == [(F(0), F(0), F(0))]
    assert polytope_volume(p) == 0


def test_unit_cube_volume_min_moment():
    from fano_delta.toric3 import HPolytope

    p = HPolytope(
        normals=((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)),
        rhs=(F(0), F(-1), F(0), F(-1), F(0), F(-1)),
    )
    assert polytope_volume(p) == 1
    assert polytope_min(p, (1, 0, 0)) == 0
    assert polytope_moment(p, (1, 0, 0)) == F(1, 2)


def test_polytope_moment_oracle(y):
    # Independent oracle: P_L is the product [-1,0] x {(x2,x3): -2<=x2<=x3<=0,
    # x3>=-1}, so the moment of <x,(1,3,-1)> splits into three 1D integrals.
    p = divisor_polytope(ToricDivisor(y, [1, 1, 2, 0, 0, 0]))
    x1_part = F(-1, 2) * F(3, 2)
    x2_part = F(1, 2) * (F(1, 3) - 4)
    x3_part = F(1, 3) - 1
    oracle = x1_part + 3 * x2_part - x3_part
    assert oracle == F(-67, 12)
    assert polytope_moment(p, (1, 3, -1)) == oracle
    assert polytope_min(p, (1, 3, -1)) == -7
    assert lattice_min(p, (1, 3, -1)) == -7


def test_s_invariant_values(y):
    l_div = ToricDivisor(y, [1, 1, 2, 0, 0, 0])
    assert s_invariant_toric(l_div, (1, 3, -1)) == F(59, 18)
    assert s_invariant_toric(l_div, (2, 4, -1)) == F(41, 9)
    assert s_invariant_toric(l_div, (0, 0, 1)) == F(5, 9)


def test_s_invariant_relabeling_invariance(y):
    perm = [3, 0, 2, 5, 1, 4]
    rays = [y.rays[i] for i in perm]
    inverse = {old: new for new, old in enumerate(perm)}
    cones = [tuple(sorted(inverse[i] for i in cone)) for cone in y.cones]
    shuffled = Fan3(rays, cones)
    coeffs = [0] * 6
    for old, coef in enumerate([1, 1, 2, 0, 0, 0]):
        coeffs[inverse[old]] = coef
    assert s_invariant_toric(ToricDivisor(shuffled, coeffs), (1, 3, -1)) == F(59, 18)


def test_unbounded_region_rejected():
    from fano_delta.toric3 import HPolytope

    p = HPolytope(normals=((1, 0, 0), (0, 1, 0), (0, 0, 1)), rhs=(F(0), F(0), F(0)))
    with pytest.raises(ValueError, match="not a polytope"):
        polytope_vertices(p)


# ---------------------------------------------------------------------------
# Zariski certificates
# ---------------------------------------------------------------------------


def test_zariski3_interval_accept_and_reject():
    from fano_delta.scenarios import builders

    family = builders.ToricFamily("34-d4")
    cert = family.certificate()
    report = verify_zariski3(cert)
    assert report.accepted

    # The [2,4] interval with N = 0 on W0 must be rejected with witness [1,3].
    import dataclasses

    w0 = load_fan("d4-w0")
    l_u = cert.l_u
    bad_iv = dataclasses.replace(
        cert.intervals[2],
        model=w0,
        positive=ToricDivisor(w0, l_u),
        negative=ToricDivisor(w0, [0] * 7),
        forcing=(),
    )
    bad = dataclasses.replace(cert, intervals=(bad_iv,))
    report = verify_zariski3(bad)
    assert not report.accepted
    assert "(1, 3)" in report.lines[0]


def test_zariski3_forcing_check():
    import dataclasses

    from fano_delta.scenarios import builders

    family = builders.ToricFamily("34-d4")
    cert = family.certificate()
    iv = cert.intervals[2]
    missing = dataclasses.replace(iv, forcing=())
    report = verify_zariski3(dataclasses.replace(cert, intervals=(missing,)))
    assert not report.accepted and "no forcing curve" in report.lines[0]


# ---------------------------------------------------------------------------
# JSON schemas
# ---------------------------------------------------------------------------


def test_fan_and_divisor_round_trip(y):
    assert fan_from_dict(fan_to_dict(y)) == y
    d = ToricDivisor(y, [parse_poly("-u/3"), 1, 2, 0, 0, 0])
    data = divisor_to_dict(d, "y")
    assert data["coeffs"][0] == {"vars": ["u"], "terms": [{"exp": [1], "coef": "-1/3"}]}
    assert divisor_from_dict(data, {"y": y}).coeffs == d.coeffs


def test_poly_object_schema():
    obj = {"vars": ["u"], "terms": [{"exp": [1], "coef": "-1/3"}, {"exp": [0], "coef": "2"}]}
    assert poly_from_obj(obj) == parse_poly("2-u/3")
    assert poly_from_obj("7/2") == Poly.const(F(7, 2))
    assert poly_from_obj(poly_to_obj(parse_poly("u^2-v"))) == parse_poly("u^2-v")


def test_polytope_volume_equals_positive_part_cube():
    # Independent oracle for the interval certificates: the divisor volume
    # from pure lattice geometry (3! * polytope volume at fixed u) must equal
    # the cube of the certificate's positive part, nef or not.
    from fano_delta.scenarios import builders
    from fano_delta.toric3 import divisor_polytope, polytope_volume

    for fam, samples in (("34-d4", (F(1, 2), F(3), F(11, 2), F(13, 2))),
                         ("34-a3", (F(1, 2), F(4), F(15, 2), F(9)))):
        family = builders.ToricFamily(fam)
        cert = family.certificate()
        for u0 in samples:
            iv = next(i for i in cert.intervals if i.u_lo <= u0 <= i.u_hi)
            l_at = ToricDivisor(iv.model, [c.subs(u=u0) for c in cert.l_u])
            p_at = iv.positive.at_u(u0)
            cube = intersection_number(p_at, p_at, p_at).as_fraction()
            vol = 6 * polytope_volume(divisor_polytope(l_at))
            assert vol == cube


def test_nef_divisor_volume_on_blowup_fans():
    w0 = load_fan("d4-w0")
    from fano_delta.toric3 import divisor_polytope, polytope_volume

    for u0 in (F(0), F(1, 2), F(1)):
        l_at = ToricDivisor(w0, [7 - u0, 1, 1, 2, 0, 0, 0])
        assert is_nef(l_at).nef
        assert 6 * polytope_volume(divisor_polytope(l_at)) == \
            intersection_number(l_at, l_at, l_at).as_fraction()
