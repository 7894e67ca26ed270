"""Simplicial complete fans in a rank-3 lattice and their intersection theory.

A fan is a list of primitive integer ray generators plus a list of maximal
cones given as index triples.  Torus-invariant divisors are coefficient
vectors over the rays; coefficients may be exact rationals or polynomials in
u for one-parameter families.

Triple intersection numbers follow the simplicial recipe: for distinct rays
spanning a maximal cone the product is 1/|det|, other distinct triples give
0, and repeated rays are eliminated by substituting a principal divisor
div(chi_m) chosen so the coefficient at the repeated ray cancels.  The same
character relations drive pullbacks along toric morphisms, restriction to
invariant surfaces (star construction), and the 2D Gram matrices.

Divisor polytopes are handled by brute-force vertex enumeration (at most a
handful of facets here), giving exact volumes, moments and minima for the
lattice-polytope form of the S-invariant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from . import linalg
from .exactmath import Poly, Scalar, q

Ray = tuple[int, int, int]
Cone = tuple[int, int, int]


# ---------------------------------------------------------------------------
# Fans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fan3:
    """A simplicial fan in Z^3 given by primitive rays and maximal cones."""

    rays: tuple[Ray, ...]
    cones: tuple[Cone, ...]

    def __init__(self, rays: Sequence[Sequence[int]], cones: Sequence[Sequence[int]]):
        object.__setattr__(
            self, "rays", tuple(tuple(int(x) for x in r) for r in rays)
        )
        object.__setattr__(
            self, "cones", tuple(tuple(sorted(int(i) for i in c)) for c in cones)
        )

    def two_cones(self) -> list[tuple[int, int]]:
        """Index pairs spanning a 2-dimensional cone of the fan."""
        pairs = set()
        for cone in self.cones:
            for a, b in itertools.combinations(cone, 2):
                pairs.add((a, b))
        return sorted(pairs)

    def cone_set(self) -> frozenset[Cone]:
        return frozenset(self.cones)

    def cones_containing(self, ray_index: int) -> list[Cone]:
        return [c for c in self.cones if ray_index in c]


@dataclass
class FanReport:
    valid: bool
    issues: list[str] = field(default_factory=list)


def validate_fan(fan: Fan3) -> FanReport:
    """Check primitivity, simpliciality and the 2-face completeness criterion.

    Completeness here means: every index pair occurring in some maximal cone
    occurs in exactly two of them.  For the complete simplicial fans handled
    by this package that criterion is exact and cheap.
    """
    issues: list[str] = []
    for i, ray in enumerate(fan.rays):
        if len(ray) != 3:
            issues.append(f"ray {i} is not a 3-vector")
            continue
        g = gcd(gcd(abs(ray[0]), abs(ray[1])), abs(ray[2]))
        if g != 1:
            issues.append(f"ray {i}={ray} is not primitive (gcd {g})")
    seen = set()
    for cone in fan.cones:
        if len(set(cone)) != 3:
            issues.append(f"cone {cone} does not have three distinct rays")
            continue
        if cone in seen:
            issues.append(f"cone {cone} listed twice")
        seen.add(cone)
        if any(i >= len(fan.rays) or i < 0 for i in cone):
            issues.append(f"cone {cone} references a missing ray")
            continue
        det = linalg.det3(*(fan.rays[i] for i in cone))
        if det == 0:
            issues.append(f"cone {cone} is not simplicial (rays dependent)")
    counts: dict[tuple[int, int], int] = {}
    for cone in fan.cones:
        for a, b in itertools.combinations(cone, 2):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    for pair, count in sorted(counts.items()):
        if count != 2:
            issues.append(f"face {list(pair)} lies in {count} maximal cone(s), expected 2")
    return FanReport(valid=not issues, issues=issues)


# ---------------------------------------------------------------------------
# Divisors and intersection numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToricDivisor:
    fan: Fan3
    coeffs: tuple[Poly, ...]

    def __init__(self, fan: Fan3, coeffs: Sequence[Poly | Scalar]):
        object.__setattr__(self, "fan", fan)
        object.__setattr__(self, "coeffs", tuple(Poly.coerce(x) for x in coeffs))
        if len(self.coeffs) != len(fan.rays):
            raise ValueError("coefficient list length must equal ray count")

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        self._same_fan(other)
        return ToricDivisor(self.fan, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "ToricDivisor") -> "ToricDivisor":
        self._same_fan(other)
        return ToricDivisor(self.fan, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def scale(self, factor: Poly | Scalar) -> "ToricDivisor":
        factor = Poly.coerce(factor)
        return ToricDivisor(self.fan, [factor * a for a in self.coeffs])

    def at_u(self, u0: Scalar) -> "ToricDivisor":
        return ToricDivisor(self.fan, [co.subs(u=q(u0)) for co in self.coeffs])

    def _same_fan(self, other: "ToricDivisor"):
        if self.fan != other.fan:
            raise ValueError("different fans")


@dataclass(frozen=True)
class CurveClass:
    """Torus-invariant curve given by a 2-dimensional cone [i, j]."""

    fan: Fan3
    pair: tuple[int, int]

    def __init__(self, fan: Fan3, pair: Sequence[int]):
        pair = tuple(sorted(int(x) for x in pair))
        if pair not in set(fan.two_cones()):
            raise ValueError(f"pair {pair} is not a 2-cone of the fan")
        object.__setattr__(self, "fan", fan)
        object.__setattr__(self, "pair", pair)


_TRIPLE_CACHE: dict[tuple[Fan3, tuple[int, int, int]], Fraction] = {}


def triple_product(fan: Fan3, i: int, j: int, k: int) -> Fraction:
    """Intersection number T_i.T_j.T_k of invariant divisors (exact)."""
    key = (fan, tuple(sorted((i, j, k))))
    cached = _TRIPLE_CACHE.get(key)
    if cached is not None:
        return cached
    value = _triple_uncached(fan, *key[1])
    _TRIPLE_CACHE[key] = value
    return value


def _triple_uncached(fan: Fan3, i: int, j: int, k: int) -> Fraction:
    if i != j and j != k and i != k:
        if (i, j, k) in fan.cone_set():
            det = linalg.det3(fan.rays[i], fan.rays[j], fan.rays[k])
            return Fraction(1, abs(det))
        return Fraction(0)
    # Repeated ray: substitute T_rep ~ T_rep - div(chi_m) with <m, v_rep> = 1
    # and <m, .> = 0 on the other two rays of a fixed (lowest-index) maximal
    # cone, which cancels the repeated factor.  The cone is chosen to contain
    # the remaining ray of the monomial as well, so every generated triple
    # has distinct rays and the recursion terminates after at most two
    # substitutions.
    rep = i if i == j else k
    others = [i, j, k]
    others.remove(rep)
    required = {rep} | {o for o in others if o != rep}
    cone = next((c for c in sorted(fan.cones) if required <= set(c)), None)
    if cone is None:
        if len(required) > 1:
            # The rays span no common cone: the divisors are disjoint.
            return Fraction(0)
        raise ValueError(f"ray {rep} lies in no maximal cone")
    other_rays = [r for r in cone if r != rep]
    m = linalg.solve(
        [list(fan.rays[rep]), list(fan.rays[other_rays[0]]), list(fan.rays[other_rays[1]])],
        [Fraction(1), Fraction(0), Fraction(0)],
    )
    total = Fraction(0)
    for r in range(len(fan.rays)):
        if r == rep:
            continue
        coef = -sum(Fraction(m[t]) * fan.rays[r][t] for t in range(3))
        if coef != 0:
            total += coef * triple_product(fan, r, others[0], others[1])
    return total


def intersection_number(
    d1: ToricDivisor, d2: ToricDivisor, d3: ToricDivisor
) -> Poly:
    """Trilinear extension of the invariant-divisor triple products."""
    d1._same_fan(d2)
    d1._same_fan(d3)
    fan = d1.fan
    n = len(fan.rays)
    total = Poly()
    for i in range(n):
        ci = d1.coeffs[i]
        if ci.is_zero():
            continue
        for j in range(n):
            cj = d2.coeffs[j]
            if cj.is_zero():
                continue
            partial = ci * cj
            for k in range(n):
                ck = d3.coeffs[k]
                if ck.is_zero():
                    continue
                t = triple_product(fan, i, j, k)
                if t != 0:
                    total = total + partial * ck * t
    return total


def curve_intersection(d: ToricDivisor, curve: CurveClass) -> Poly:
    if d.fan != curve.fan:
        raise ValueError("different fans")
    i, j = curve.pair
    total = Poly()
    for r, coeff in enumerate(d.coeffs):
        if coeff.is_zero():
            continue
        t = triple_product(d.fan, r, i, j)
        if t != 0:
            total = total + coeff * t
    return total


@dataclass
class NefReport:
    nef: bool
    witness: tuple[int, int] | None = None
    note: str = ""


def is_nef(d: ToricDivisor) -> NefReport:
    """Nefness of a constant-coefficient divisor on a complete fan."""
    for pair in d.fan.two_cones():
        val = curve_intersection(d, CurveClass(d.fan, pair)).as_fraction()
        if val < 0:
            return NefReport(False, pair, f"curve {pair} meets the divisor in {val}")
    return NefReport(True)


def nef_on_interval(d: ToricDivisor, u_lo: Scalar, u_hi: Scalar) -> NefReport:
    """Nefness of a Poly-in-u divisor over [u_lo, u_hi].

    All curve intersections are affine in u, so nonnegativity at the two
    endpoints certifies the whole interval; one interior sample is checked as
    well and the justification is recorded in the report.
    """
    u_lo, u_hi = q(u_lo), q(u_hi)
    samples = [u_lo, (u_lo + u_hi) / 2, u_hi]
    for pair in d.fan.two_cones():
        val = curve_intersection(d, CurveClass(d.fan, pair))
        if val.total_degree() > 1:
            raise ValueError(f"curve intersection {val} is not affine in u")
        for u0 in samples:
            if val(u=u0) < 0:
                return NefReport(False, pair, f"curve {pair} meets the divisor in {val} < 0 at u={u0}")
    return NefReport(
        True,
        note="all curve intersections affine in u; endpoint nonnegativity "
        "plus one interior sample certifies the interval",
    )


# ---------------------------------------------------------------------------
# Pullbacks along toric morphisms
# ---------------------------------------------------------------------------


def _in_cone(vec: Sequence[Fraction | int], rays: Sequence[Ray]) -> bool:
    try:
        coords = linalg.solve(
            [[Fraction(rays[j][t]) for j in range(3)] for t in range(3)],
            [q(x) for x in vec],
        )
    except ValueError:
        return False
    return all(x >= 0 for x in coords)


def pullback(fine: Fan3, coarse: Fan3, d: ToricDivisor) -> ToricDivisor:
    """Pull a divisor on the coarse fan back along the refinement map.

    The coefficient at a ray w of the fine fan is -phi_D(w), where phi_D is
    the support function of the divisor (linear on each coarse cone, taking
    value -a_r at ray r).
    """
    if d.fan != coarse:
        raise ValueError("divisor does not live on the coarse fan")
    coarse_index: dict[Ray, int] = {ray: i for i, ray in enumerate(coarse.rays)}
    for ray in coarse.rays:
        if ray not in set(fine.rays):
            raise ValueError("not a refinement")
    for cone in fine.cones:
        vecs = [fine.rays[i] for i in cone]
        if not any(
            all(_in_cone(v, [coarse.rays[j] for j in sigma]) for v in vecs)
            for sigma in coarse.cones
        ):
            raise ValueError("not a refinement")

    coeffs: list[Poly] = []
    for w in fine.rays:
        if w in coarse_index:
            coeffs.append(d.coeffs[coarse_index[w]])
            continue
        sigma = next(
            (s for s in coarse.cones if _in_cone(w, [coarse.rays[j] for j in s])),
            None,
        )
        if sigma is None:
            raise ValueError("not a refinement")
        rays = [coarse.rays[j] for j in sigma]
        m = linalg.solve(
            [list(r) for r in rays],
            [-d.coeffs[j] for j in sigma],
        )
        phi = sum((m[t] * w[t] for t in range(3)), Poly())
        coeffs.append(-phi)
    return ToricDivisor(fine, coeffs)


# ---------------------------------------------------------------------------
# Star surfaces (restriction to an invariant surface) and 2D Gram matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fan2:
    rays: tuple[tuple[int, int], ...]
    cones: tuple[tuple[int, int], ...]

    def __init__(self, rays: Sequence[Sequence[int]], cones: Sequence[Sequence[int]]):
        object.__setattr__(self, "rays", tuple(tuple(int(x) for x in r) for r in rays))
        object.__setattr__(
            self, "cones", tuple(tuple(sorted(int(x) for x in c)) for c in cones)
        )


@dataclass(frozen=True)
class StarSurface:
    """The invariant surface of a ray, as a 2D fan plus restriction data.

    ``adjacent`` lists the 3D rays spanning a 2-cone with the star ray; entry
    k of ``fan2.rays`` is the primitive image of ``adjacent[k]`` under the
    quotient map, and ``mults[k]`` is the reciprocal lattice index of the
    image, i.e. the multiplier for restricting that ray's divisor.
    """

    fan: Fan3
    ray_index: int
    quotient: tuple[tuple[int, int, int], tuple[int, int, int]]
    adjacent: tuple[int, ...]
    fan2: Fan2
    mults: tuple[Fraction, ...]

    def restriction_table(self) -> dict[int, tuple[int, Fraction]]:
        return {r: (k, self.mults[k]) for k, r in enumerate(self.adjacent)}


def star_surface(
    fan: Fan3, ray_index: int, pinned: Mapping[int, Sequence[int]]
) -> StarSurface:
    """Quotient the star of a ray to a 2D fan.

    ``pinned`` fixes the images of two adjacent rays (e.g. {1: (1, 0),
    3: (0, 1)}), which pins the quotient lattice isomorphism Z^3/Z v_0 = Z^2.
    The map is validated to be integral and surjective; it is never chosen
    silently, so outputs are reproducible.
    """
    cones = fan.cones_containing(ray_index)
    if not cones:
        raise ValueError("isolated ray")
    if len(pinned) != 2:
        raise ValueError("exactly two pinned ray images are required")
    (r1, img1), (r2, img2) = sorted(pinned.items())
    v0 = fan.rays[ray_index]
    rows = []
    for coord in range(2):
        sol = linalg.solve(
            [list(v0), list(fan.rays[r1]), list(fan.rays[r2])],
            [Fraction(0), Fraction(img1[coord]), Fraction(img2[coord])],
        )
        if any(x.denominator != 1 for x in sol):
            raise ValueError("pinned images do not define an integral quotient map")
        rows.append(tuple(int(x) for x in sol))
    minors = [
        rows[0][a] * rows[1][b] - rows[0][b] * rows[1][a]
        for a, b in ((0, 1), (0, 2), (1, 2))
    ]
    if gcd(gcd(abs(minors[0]), abs(minors[1])), abs(minors[2])) != 1:
        raise ValueError("pinned images do not define a lattice basis of the quotient")

    adjacent = sorted(
        {r for cone in cones for r in cone if r != ray_index}
    )
    images: list[tuple[int, int]] = []
    mults: list[Fraction] = []
    for r in adjacent:
        vec = fan.rays[r]
        img = (
            sum(rows[0][t] * vec[t] for t in range(3)),
            sum(rows[1][t] * vec[t] for t in range(3)),
        )
        g = gcd(abs(img[0]), abs(img[1]))
        if g == 0:
            raise ValueError(f"adjacent ray {r} maps to zero in the quotient")
        images.append((img[0] // g, img[1] // g))
        mults.append(Fraction(1, g))
    position = {r: k for k, r in enumerate(adjacent)}
    cones2 = []
    for cone in cones:
        a, b = (r for r in cone if r != ray_index)
        cones2.append((position[a], position[b]))
    return StarSurface(
        fan=fan,
        ray_index=ray_index,
        quotient=(rows[0], rows[1]),
        adjacent=tuple(adjacent),
        fan2=Fan2(images, cones2),
        mults=tuple(mults),
    )


def restrict_to_star(
    star: StarSurface, d: ToricDivisor, self_character: Sequence[int] = (1, 0, 0)
) -> tuple[Poly, ...]:
    """Coefficients of D restricted to the star surface, in its curve basis.

    Adjacent rays restrict with their lattice-index multiplier; rays not
    adjacent to the star ray restrict to zero; the star ray itself is first
    rewritten via the character relation div(chi_m) for ``self_character`` m
    (which must pair nontrivially with the star ray).  The character is a
    required input so coefficient vectors are reproducible against reference
    data that fixed a particular choice.
    """
    if d.fan != star.fan:
        raise ValueError("different fans")
    fan = star.fan
    n2 = len(star.fan2.rays)
    out = [Poly() for _ in range(n2)]
    table = star.restriction_table()
    for r, coeff in enumerate(d.coeffs):
        if coeff.is_zero() or r == star.ray_index:
            continue
        if r in table:
            k, mult = table[r]
            out[k] = out[k] + coeff * mult
    c0 = d.coeffs[star.ray_index]
    if not c0.is_zero():
        m = tuple(int(x) for x in self_character)
        pairing = sum(m[t] * fan.rays[star.ray_index][t] for t in range(3))
        if pairing == 0:
            raise ValueError("self_character must pair nontrivially with the star ray")
        for r in star.adjacent:
            k, mult = table[r]
            weight = sum(m[t] * fan.rays[r][t] for t in range(3))
            if weight:
                out[k] = out[k] - c0 * Fraction(weight, pairing) * mult
    return tuple(out)


def surface_gram(fan2: Fan2) -> list[list[Fraction]]:
    """Gram matrix of the invariant curves of a complete simplicial 2D fan."""
    n = len(fan2.rays)
    order = _cyclic_order(fan2.rays)
    consecutive = {
        tuple(sorted((order[i], order[(i + 1) % n]))) for i in range(n)
    }
    if n < 3 or consecutive != set(fan2.cones):
        raise ValueError("not complete")
    gram = [[Fraction(0)] * n for _ in range(n)]
    for i, j in fan2.cones:
        det = fan2.rays[i][0] * fan2.rays[j][1] - fan2.rays[i][1] * fan2.rays[j][0]
        gram[i][j] = gram[j][i] = Fraction(1, abs(det))
    for i in range(n):
        w = fan2.rays[i]
        m = (1, 0) if w[0] != 0 else (0, 1)
        pairing = m[0] * w[0] + m[1] * w[1]
        acc = Fraction(0)
        for j in range(n):
            if j != i:
                acc += (m[0] * fan2.rays[j][0] + m[1] * fan2.rays[j][1]) * gram[i][j]
        gram[i][i] = -acc / pairing
    return gram


def _cyclic_order(rays: Sequence[tuple[int, int]]) -> list[int]:
    """Indices of the rays sorted counterclockwise, exactly."""

    def half(vec: tuple[int, int]) -> int:
        # 0 for angle in [0, pi), 1 for [pi, 2 pi).
        return 0 if (vec[1] > 0 or (vec[1] == 0 and vec[0] > 0)) else 1

    import functools

    def compare(i: int, j: int) -> int:
        a, b = rays[i], rays[j]
        if half(a) != half(b):
            return -1 if half(a) < half(b) else 1
        cross = a[0] * b[1] - a[1] * b[0]
        if cross == 0:
            raise ValueError("not complete")  # parallel rays
        return -1 if cross > 0 else 1

    return sorted(range(len(rays)), key=functools.cmp_to_key(compare))


# ---------------------------------------------------------------------------
# Divisor polytopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HPolytope:
    """Intersection of half-spaces <x, normal> >= rhs in R^3."""

    normals: tuple[Ray, ...]
    rhs: tuple[Fraction, ...]


def divisor_polytope(d: ToricDivisor) -> HPolytope:
    """H-polytope of a constant-coefficient divisor: <m, v_r> >= -a_r."""
    rhs = []
    for coeff in d.coeffs:
        rhs.append(-coeff.as_fraction())
    return HPolytope(normals=d.fan.rays, rhs=tuple(rhs))


def polytope_vertices(p: HPolytope) -> list[tuple[Fraction, Fraction, Fraction]]:
    """All vertices by exhaustive intersection of inequality triples."""
    from . import lp

    n = len(p.normals)
    # Boundedness: the normals must positively span R^3, i.e. 0 is in the
    # interior of their convex-conic hull and they have rank 3.
    if len(linalg.column_space_basis([[Fraction(r[t]) for r in p.normals] for t in range(3)])) < 3:
        raise ValueError("not a polytope")
    feas = lp.solve_max(
        [Fraction(0)] * n,
        [[Fraction(p.normals[j][t]) for j in range(n)] for t in range(3)]
        + [[Fraction(1)] * n],
        [Fraction(0), Fraction(0), Fraction(0), Fraction(1)],
    )
    if feas.status != lp.OPTIMAL:
        raise ValueError("not a polytope")

    vertices: set[tuple[Fraction, Fraction, Fraction]] = set()
    for trio in itertools.combinations(range(n), 3):
        try:
            x = linalg.solve(
                [[Fraction(p.normals[i][t]) for t in range(3)] for i in trio],
                [p.rhs[i] for i in trio],
            )
        except ValueError:
            continue
        if all(
            sum(Fraction(p.normals[i][t]) * x[t] for t in range(3)) >= p.rhs[i]
            for i in range(n)
        ):
            vertices.add(tuple(x))
    if not vertices:
        raise ValueError("empty polytope")
    return sorted(vertices)


def _facet_triangulation(
    p: HPolytope,
) -> list[tuple[tuple[Fraction, ...], tuple[Fraction, ...], tuple[Fraction, ...], tuple[Fraction, ...]]]:
    """Tetrahedra covering the polytope: apex + fan triangulation per facet."""
    vertices = polytope_vertices(p)
    apex = vertices[0]
    tets = []
    for i in range(len(p.normals)):
        on_facet = [
            v
            for v in vertices
            if sum(Fraction(p.normals[i][t]) * v[t] for t in range(3)) == p.rhs[i]
        ]
        if len(on_facet) < 3:
            continue
        ordered = _order_facet(on_facet, p.normals[i])
        for k in range(1, len(ordered) - 1):
            tets.append((apex, ordered[0], ordered[k], ordered[k + 1]))
    return tets


def _order_facet(points: list[tuple[Fraction, ...]], normal: Ray):
    """Order coplanar points cyclically around their centroid, exactly."""
    n = len(points)
    centroid = tuple(sum(pt[t] for pt in points) / n for t in range(3))
    # Exact tangent basis of the facet plane.
    e1 = _any_orthogonal(normal)
    e2 = _cross(normal, e1)

    def planar(pt):
        d = tuple(pt[t] - centroid[t] for t in range(3))
        return (
            sum(Fraction(e1[t]) * d[t] for t in range(3)),
            sum(Fraction(e2[t]) * d[t] for t in range(3)),
        )

    import functools

    coords = {pt: planar(pt) for pt in points}

    def half(vec) -> int:
        return 0 if (vec[1] > 0 or (vec[1] == 0 and vec[0] > 0)) else 1

    def compare(a, b):
        va, vb = coords[a], coords[b]
        if half(va) != half(vb):
            return -1 if half(va) < half(vb) else 1
        cross = va[0] * vb[1] - va[1] * vb[0]
        if cross == 0:
            return 0
        return -1 if cross > 0 else 1

    return sorted(points, key=functools.cmp_to_key(compare))


def _any_orthogonal(v: Ray) -> tuple[int, int, int]:
    if v[0] == 0 and v[1] == 0:
        return (1, 0, 0)
    return (-v[1], v[0], 0)


def _cross(a, b) -> tuple[int, int, int]:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def polytope_volume(p: HPolytope) -> Fraction:
    total = Fraction(0)
    for apex, a, b, c in _facet_triangulation(p):
        rows = [
            [a[t] - apex[t] for t in range(3)],
            [b[t] - apex[t] for t in range(3)],
            [c[t] - apex[t] for t in range(3)],
        ]
        total += abs(linalg.determinant(rows)) / 6
    return total


def polytope_min(p: HPolytope, w: Sequence[int]) -> Fraction:
    vertices = polytope_vertices(p)
    return min(sum(v[t] * w[t] for t in range(3)) for v in vertices)


def polytope_moment(p: HPolytope, w: Sequence[int]) -> Fraction:
    """Exact integral of <x, w> over the polytope.

    The integrand is linear, so on each tetrahedron the integral is the
    volume times the average of the vertex values.
    """
    total = Fraction(0)
    for tet in _facet_triangulation(p):
        apex, a, b, c = tet
        rows = [
            [a[t] - apex[t] for t in range(3)],
            [b[t] - apex[t] for t in range(3)],
            [c[t] - apex[t] for t in range(3)],
        ]
        vol = abs(linalg.determinant(rows)) / 6
        avg = sum(sum(v[t] * w[t] for t in range(3)) for v in tet) / 4
        total += vol * avg
    return total


def lattice_min(p: HPolytope, w: Sequence[int]) -> Fraction:
    """Minimum of <x, w> over the lattice points of the polytope."""
    vertices = polytope_vertices(p)
    lo = [min(v[t] for v in vertices) for t in range(3)]
    hi = [max(v[t] for v in vertices) for t in range(3)]
    best = None
    for x in range(_ceil(lo[0]), _floor(hi[0]) + 1):
        for y in range(_ceil(lo[1]), _floor(hi[1]) + 1):
            for z in range(_ceil(lo[2]), _floor(hi[2]) + 1):
                if all(
                    p.normals[i][0] * x + p.normals[i][1] * y + p.normals[i][2] * z
                    >= p.rhs[i]
                    for i in range(len(p.normals))
                ):
                    val = Fraction(x * w[0] + y * w[1] + z * w[2])
                    if best is None or val < best:
                        best = val
    if best is None:
        raise ValueError("empty polytope")
    return best


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def s_invariant_toric(d: ToricDivisor, w: Sequence[int]) -> Fraction:
    """Expected vanishing order along the valuation of the lattice vector w.

    Computed on the divisor polytope as -min + (3!/L^3) * moment, with
    L^3 = 3! * volume.
    """
    p = divisor_polytope(d)
    vol = polytope_volume(p)
    if vol == 0:
        raise ValueError("empty polytope")
    l_cubed = 6 * vol
    return -polytope_min(p, w) + Fraction(6) / l_cubed * polytope_moment(p, w)


# ---------------------------------------------------------------------------
# 3-fold Zariski certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Zariski3Interval:
    u_lo: Fraction
    u_hi: Fraction
    model: Fan3
    positive: ToricDivisor
    negative: ToricDivisor
    forcing: tuple[tuple[int, tuple[int, int]], ...]  # (ray, forcing 2-cone)


@dataclass(frozen=True)
class ZariskiCertificate3:
    """Interval-wise Zariski decomposition data for a one-parameter divisor.

    Each interval names the birational model on which the positive part is
    nef, the decomposition itself (coefficients affine in u), and, for every
    ray supporting the negative part, a forcing curve along which positivity
    pins the negative coefficient.
    """

    l_u: tuple[Poly, ...]
    intervals: tuple[Zariski3Interval, ...]


@dataclass
class Zariski3Report:
    accepted: bool
    lines: list[str] = field(default_factory=list)


def verify_zariski3(cert: ZariskiCertificate3) -> Zariski3Report:
    report = Zariski3Report(accepted=True)
    for iv in cert.intervals:
        label = f"[{iv.u_lo},{iv.u_hi}] on {len(iv.model.rays)}-ray model"
        failure = _check_interval(cert, iv)
        if failure:
            report.accepted = False
            report.lines.append(f"{label}: REJECT ({failure})")
        else:
            report.lines.append(f"{label}: accept")
    return report


def _check_interval(cert: ZariskiCertificate3, iv: Zariski3Interval) -> str | None:
    fan = iv.model
    if iv.positive.fan != fan or iv.negative.fan != fan:
        return "decomposition parts on a different fan"
    # (a) positive + negative equals the transformed L_u coefficientwise:
    # small modifications keep ray coefficients, so the transform of L_u has
    # the same coefficient vector on every model.
    for k in range(len(fan.rays)):
        if iv.positive.coeffs[k] + iv.negative.coeffs[k] != cert.l_u[k]:
            return f"P + N differs from L_u at ray {k}"
    samples = [iv.u_lo, (iv.u_lo + iv.u_hi) / 2, iv.u_hi]
    # (b) negative part effective on the interval (affine coefficients).
    for k, coeff in enumerate(iv.negative.coeffs):
        if coeff.total_degree() > 1:
            return f"negative coefficient at ray {k} is not affine in u"
        for u0 in samples:
            if coeff(u=u0) < 0:
                return f"negative part not effective at ray {k}, u={u0}"
    # (c) positive part nef on the stated model.
    nef = nef_on_interval(iv.positive, iv.u_lo, iv.u_hi)
    if not nef.nef:
        return f"positive part not nef: {nef.note}"
    # (d) forcing certificates for every ray in the negative support.
    support = [
        k for k, coeff in enumerate(iv.negative.coeffs) if not coeff.is_zero()
    ]
    forcing = dict(iv.forcing)
    for k in support:
        if k not in forcing:
            return f"no forcing curve for negative ray {k}"
        curve = CurveClass(fan, forcing[k])
        along = curve_intersection(iv.positive, curve)
        if not along.is_zero():
            return f"forcing curve {forcing[k]} not orthogonal to P (got {along})"
        self_int = triple_product(fan, k, *curve.pair)
        if self_int >= 0:
            return (
                f"forcing curve {forcing[k]} does not pin ray {k}: "
                f"T{k}.curve = {self_int} >= 0"
            )
    return None


# ---------------------------------------------------------------------------
# JSON (de)serialization per the external file schemas
# ---------------------------------------------------------------------------


def poly_from_obj(obj) -> Poly:
    """Polynomial from either a "p/q" string or the structured object form
    {"vars": ["u"], "terms": [{"exp": [1], "coef": "-1/3"}, ...]}."""
    if isinstance(obj, str):
        return Poly.const(Fraction(obj))
    if isinstance(obj, (int,)):
        return Poly.const(obj)
    variables = obj["vars"]
    total = Poly()
    for term in obj["terms"]:
        mono = Poly.const(Fraction(str(term["coef"])))
        for var, e in zip(variables, term["exp"]):
            mono = mono * Poly.var(var) ** int(e)
        total = total + mono
    return total


def poly_to_obj(p: Poly):
    if p.is_constant():
        return str(p.as_fraction())
    variables = list(p.variables())
    from .exactmath import _VAR_INDEX  # stable variable order

    terms = []
    for exp in sorted(p.terms):
        terms.append(
            {
                "exp": [exp[_VAR_INDEX[v]] for v in variables],
                "coef": str(p.terms[exp]),
            }
        )
    return {"vars": variables, "terms": terms}


def fan_from_dict(data) -> Fan3:
    return Fan3(data["rays"], data["cones"])


def fan_to_dict(fan: Fan3):
    return {"rays": [list(r) for r in fan.rays], "cones": [list(c) for c in fan.cones]}


def divisor_from_dict(data, fans: Mapping[str, Fan3]) -> ToricDivisor:
    fan = fans[data["fan"]]
    return ToricDivisor(fan, [poly_from_obj(x) for x in data["coeffs"]])


def divisor_to_dict(d: ToricDivisor, fan_name: str):
    return {"fan": fan_name, "coeffs": [poly_to_obj(x) for x in d.coeffs]}
