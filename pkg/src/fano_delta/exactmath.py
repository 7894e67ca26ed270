"""Exact rational arithmetic for small multivariate polynomials.

Everything in this package computes over Q.  A polynomial is a sparse map
from exponent triples to Fraction coefficients, always over the fixed
variable universe (u, v, c):

    5/3*u^2*v - 2  ->  {(2, 1, 0): Fraction(5, 3), (0, 0, 0): Fraction(-2)}

Zero coefficients are never stored, so structural equality of the term maps
is mathematical equality.  The module also provides

  * parse_poly / str round-trips for a compact human-auditable text form
    ("(8-u-3*v)/3"), used by the JSON fixtures,
  * exact interpolation with a mandatory cross-validation sample,
  * exact definite integration over intervals and over chambers
    (u-intervals with affine-in-u bounds for v).

No floating point exists anywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

VARS = ("u", "v", "c")
_VAR_INDEX = {name: i for i, name in enumerate(VARS)}

Exponent = tuple[int, int, int]
Scalar = Union[int, str, Fraction]


def q(x: Scalar | "Poly") -> Fraction:
    """Coerce an int, Fraction or "p/q" string to an exact Fraction."""
    if isinstance(x, Poly):
        return x.as_fraction()
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


class Poly:
    """Sparse exact polynomial in the variables u, v, c.

    Immutable after construction; arithmetic returns new objects.  Terms with
    coefficient zero are dropped on construction, so ``==`` on Poly objects is
    mathematical equality.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Exponent, Scalar] | None = None):
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, coef in terms.items():
                coef = Fraction(coef) if not isinstance(coef, Fraction) else coef
                if coef != 0:
                    clean[(int(exp[0]), int(exp[1]), int(exp[2]))] = coef
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - guard only
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def const(x: Scalar) -> "Poly":
        return Poly({(0, 0, 0): q(x)})

    @staticmethod
    def var(name: str) -> "Poly":
        if name not in _VAR_INDEX:
            raise ValueError(f"unknown variable {name!r}; expected one of {VARS}")
        exp = [0, 0, 0]
        exp[_VAR_INDEX[name]] = 1
        return Poly({tuple(exp): Fraction(1)})

    @staticmethod
    def coerce(x: "Poly | Scalar") -> "Poly":
        return x if isinstance(x, Poly) else Poly.const(x)

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(e == (0, 0, 0) for e in self.terms)

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return self.terms.get((0, 0, 0), Fraction(0))

    def variables(self) -> tuple[str, ...]:
        """Ordered subset of (u, v, c) actually occurring."""
        used = [False, False, False]
        for exp in self.terms:
            for i in range(3):
                if exp[i]:
                    used[i] = True
        return tuple(name for i, name in enumerate(VARS) if used[i])

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, name: str) -> int:
        i = _VAR_INDEX[name]
        return max((e[i] for e in self.terms), default=0)

    def is_affine(self) -> bool:
        return self.total_degree() <= 1

    def coefficient(self, exp: Exponent) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = Poly.coerce(other)
        out = dict(self.terms)
        for exp, coef in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + coef
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly.coerce(other))

    def __rsub__(self, other) -> "Poly":
        return Poly.coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = Poly.coerce(other)
        out: dict[Exponent, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exp = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2])
                out[exp] = out.get(exp, Fraction(0)) + ca * cb
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        d = q(other) if not isinstance(other, Poly) else other.as_fraction()
        if d == 0:
            raise ZeroDivisionError("division of polynomial by zero")
        return Poly({e: c / d for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, str)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # -- substitution ------------------------------------------------------

    def subs(self, **values: "Poly | Scalar") -> "Poly":
        """Substitute polynomials or rationals for variables (partial ok)."""
        repl: dict[int, Poly] = {}
        for name, val in values.items():
            if name not in _VAR_INDEX:
                raise ValueError(f"unknown variable {name!r}")
            repl[_VAR_INDEX[name]] = Poly.coerce(val)
        out = Poly()
        for exp, coef in self.terms.items():
            term = Poly.const(coef)
            for i, e in enumerate(exp):
                if e == 0:
                    continue
                base = repl.get(i)
                if base is None:
                    mono = [0, 0, 0]
                    mono[i] = e
                    base_pow = Poly({tuple(mono): Fraction(1)})
                else:
                    base_pow = base**e
                term = term * base_pow
            out = out + term
        return out

    def __call__(self, **values: "Poly | Scalar") -> Fraction:
        """Full evaluation; raises if any occurring variable is left free."""
        return self.subs(**values).as_fraction()

    # -- calculus ----------------------------------------------------------

    def antiderivative(self, name: str) -> "Poly":
        i = _VAR_INDEX[name]
        out: dict[Exponent, Fraction] = {}
        for exp, coef in self.terms.items():
            new = list(exp)
            new[i] += 1
            out[tuple(new)] = coef / new[i]
        return Poly(out)

    # -- formatting --------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            coef = self.terms[exp]
            mono = "*".join(
                f"{VARS[i]}^{e}" if e > 1 else VARS[i]
                for i, e in enumerate(exp)
                if e
            )
            if not mono:
                body = str(abs(coef))
            elif abs(coef) == 1:
                body = mono
            else:
                body = f"{abs(coef)}*{mono}"
            sign = "-" if coef < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    __repr__ = __str__


ZERO = Poly()
ONE = Poly.const(1)
U = Poly.var("u")
V = Poly.var("v")
C = Poly.var("c")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_poly(text: str) -> Poly:
    """Parse a compact polynomial expression over u, v, c.

    Grammar: + - * / ^ with parentheses; division only by a constant
    subexpression; implicit multiplication is not supported.  This is the
    format used by the JSON fixtures, e.g. "(8-u-3*v)/3" or "u^2".
    """
    tokens = _tokenize(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr() -> Poly:
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_term() -> Poly:
        node = parse_factor()
        while peek() in ("*", "/"):
            op = take()
            rhs = parse_factor()
            node = node * rhs if op == "*" else node / rhs
        return node

    def parse_factor() -> Poly:
        node = parse_atom()
        if peek() == "^":
            take()
            exp_tok = take()
            if not exp_tok.isdigit():
                raise ValueError(f"bad exponent {exp_tok!r} in {text!r}")
            node = node ** int(exp_tok)
        return node

    def parse_atom() -> Poly:
        tok = peek()
        if tok is None:
            raise ValueError(f"unexpected end of expression in {text!r}")
        if tok == "(":
            take()
            node = parse_expr()
            if peek() != ")":
                raise ValueError(f"unbalanced parentheses in {text!r}")
            take()
            return node
        if tok == "-":
            take()
            return -parse_atom()
        if tok == "+":
            take()
            return parse_atom()
        take()
        if tok in _VAR_INDEX:
            return Poly.var(tok)
        return Poly.const(Fraction(tok))

    result = parse_expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return result


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*/^()":
            tokens.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(text[i:j])
            i = j
        elif ch in _VAR_INDEX:
            tokens.append(ch)
            i += 1
        else:
            raise ValueError(f"bad character {ch!r} in {text!r}")
    return tokens


# ---------------------------------------------------------------------------
# Interpolation
# ---------------------------------------------------------------------------

_DEFAULT_VARS = {1: ("v",), 2: ("u", "v"), 3: ("u", "v", "c")}


def interpolate(
    samples: Sequence[tuple[Sequence[Scalar], Scalar]],
    degree_bound: int,
    variables: Sequence[str] | None = None,
) -> Poly:
    """Exact polynomial interpolation with cross-validation.

    ``samples`` is a list of (point, value) pairs; the interpolant is the
    unique polynomial of total degree <= ``degree_bound`` in ``variables``
    through them.  At least one sample beyond the determining count must be
    supplied; every sample is checked against the solved interpolant, so a
    wrong degree bound cannot slip through silently.

    Raises ValueError("insufficient samples") if the system is
    underdetermined, and ValueError("not polynomial of stated degree") if an
    extra sample disagrees with the unique interpolant.
    """
    from . import linalg

    if not samples:
        raise ValueError("insufficient samples")
    arity = len(samples[0][0])
    if variables is None:
        if arity not in _DEFAULT_VARS:
            raise ValueError(f"cannot infer variables for arity {arity}")
        variables = _DEFAULT_VARS[arity]
    if len(variables) != arity:
        raise ValueError("arity mismatch")

    monomials = _monomials(len(variables), degree_bound)
    rows = []
    rhs = []
    for point, value in samples:
        if len(point) != arity:
            raise ValueError("arity mismatch")
        coords = [q(x) for x in point]
        rows.append([_eval_monomial(m, coords) for m in monomials])
        rhs.append(q(value))

    if len(samples) <= len(monomials):
        raise ValueError("insufficient samples")

    solution = linalg.solve_overdetermined(rows, rhs)
    if solution is None:
        raise ValueError("not polynomial of stated degree")
    if any(s is None for s in solution):
        raise ValueError("insufficient samples")

    terms: dict[Exponent, Fraction] = {}
    for mono, coef in zip(monomials, solution):
        exp = [0, 0, 0]
        for var, e in zip(variables, mono):
            exp[_VAR_INDEX[var]] = e
        terms[tuple(exp)] = terms.get(tuple(exp), Fraction(0)) + coef
    return Poly(terms)


def _monomials(nvars: int, bound: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int, budget: int):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for e in range(budget + 1):
            rec(prefix + [e], remaining - 1, budget - e)

    rec([], nvars, bound)
    return out


def _eval_monomial(mono: tuple[int, ...], coords: list[Fraction]) -> Fraction:
    val = Fraction(1)
    for e, x in zip(mono, coords):
        val *= x**e
    return val


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


def integrate_univariate(p: Poly, lo: Scalar, hi: Scalar, name: str | None = None) -> Fraction:
    """Exact definite integral of a univariate polynomial over [lo, hi]."""
    used = p.variables()
    if len(used) > 1:
        raise ValueError("arity mismatch")
    if name is None:
        name = used[0] if used else "u"
    elif used and used != (name,):
        raise ValueError("arity mismatch")
    lo, hi = q(lo), q(hi)
    if lo > hi:
        raise ValueError(f"inverted interval [{lo}, {hi}]")
    anti = p.antiderivative(name)
    return anti(**{name: hi}) - anti(**{name: lo})


@dataclass(frozen=True)
class Chamber:
    """A region u in [u_lo, u_hi], v in [v_lo(u), v_hi(u)] with affine v-bounds.

    For one-variable (u only) pieces, v_lo and v_hi are None.
    """

    u_lo: Fraction
    u_hi: Fraction
    v_lo: Poly | None = None
    v_hi: Poly | None = None

    def __post_init__(self):
        object.__setattr__(self, "u_lo", q(self.u_lo))
        object.__setattr__(self, "u_hi", q(self.u_hi))
        if (self.v_lo is None) != (self.v_hi is None):
            raise ValueError("v_lo and v_hi must both be set or both None")
        if self.u_lo > self.u_hi:
            raise ValueError("empty or inverted chamber")
        if self.v_lo is not None:
            for b in (self.v_lo, self.v_hi):
                if b.degree_in("v") or b.degree_in("c") or b.total_degree() > 1:
                    raise ValueError("v-bounds must be affine in u")
            # Affine bounds: endpoint checks certify v_lo <= v_hi throughout.
            for u0 in (self.u_lo, self.u_hi):
                if self.v_lo(u=u0) > self.v_hi(u=u0):
                    raise ValueError("empty or inverted chamber")

    def is_two_dimensional(self) -> bool:
        return self.v_lo is not None

    def contains(self, u0: Scalar, v0: Scalar | None = None) -> bool:
        u0 = q(u0)
        if not (self.u_lo <= u0 <= self.u_hi):
            return False
        if self.v_lo is None:
            return v0 is None
        v0 = q(v0)
        return self.v_lo(u=u0) <= v0 <= self.v_hi(u=u0)

    def corners(self) -> list[tuple[Fraction, Fraction]]:
        if self.v_lo is None:
            raise ValueError("corners of a 1-dimensional chamber")
        return [
            (u0, bound(u=u0))
            for u0 in (self.u_lo, self.u_hi)
            for bound in (self.v_lo, self.v_hi)
        ]


def integrate_chamber(p: Poly, ch: Chamber) -> Fraction:
    """Exact iterated integral of p over a chamber (dv then du)."""
    if p.degree_in("c"):
        raise ValueError("arity mismatch")
    if not ch.is_two_dimensional():
        if p.degree_in("v"):
            raise ValueError("arity mismatch")
        return integrate_univariate(p, ch.u_lo, ch.u_hi, "u")
    anti = p.antiderivative("v")
    inner = anti.subs(v=ch.v_hi) - anti.subs(v=ch.v_lo)
    return integrate_univariate(inner, ch.u_lo, ch.u_hi, "u")


@dataclass(frozen=True)
class ChamberFunction:
    """A function given by one polynomial per chamber.

    The chambers are expected to have pairwise disjoint interiors; adjacent
    pieces of volume-type functions agree on shared boundaries, which
    ``check_continuity`` verifies by exact evaluation at two rational points
    of every shared boundary segment.
    """

    pieces: tuple[tuple[Chamber, Poly], ...]

    def __init__(self, pieces: Iterable[tuple[Chamber, Poly]]):
        object.__setattr__(self, "pieces", tuple((ch, Poly.coerce(p)) for ch, p in pieces))

    def evaluate(self, u0: Scalar, v0: Scalar | None = None) -> Fraction:
        for ch, p in self.pieces:
            if ch.contains(u0, v0):
                args = {"u": q(u0)}
                if v0 is not None:
                    args["v"] = q(v0)
                return p(**args)
        raise ValueError(f"point ({u0}, {v0}) outside every chamber")

    def integrate(self) -> Fraction:
        return sum((integrate_chamber(p, ch) for ch, p in self.pieces), Fraction(0))

    def check_continuity(self) -> list[str]:
        """Return human-readable violations of boundary continuity."""
        problems: list[str] = []
        pieces = self.pieces
        for a in range(len(pieces)):
            for b in range(a + 1, len(pieces)):
                ch_a, p_a = pieces[a]
                ch_b, p_b = pieces[b]
                for u0, v0 in _shared_boundary_samples(ch_a, ch_b):
                    if v0 is None:
                        va, vb = p_a(u=u0), p_b(u=u0)
                    else:
                        va, vb = p_a(u=u0, v=v0), p_b(u=u0, v=v0)
                    if va != vb:
                        problems.append(
                            f"discontinuity at (u,v)=({u0},{v0}): {va} != {vb}"
                        )
        return problems


def _shared_boundary_samples(
    a: Chamber, b: Chamber
) -> list[tuple[Fraction, Fraction | None]]:
    """Two exact sample points on each shared boundary segment of a and b."""
    if a.is_two_dimensional() != b.is_two_dimensional():
        return []
    if not a.is_two_dimensional():
        if a.u_hi == b.u_lo:
            return [(a.u_hi, None)]
        if b.u_hi == a.u_lo:
            return [(b.u_hi, None)]
        return []
    samples: list[tuple[Fraction, Fraction | None]] = []
    # Vertical boundary: same u-line, overlapping v-ranges.
    for u0 in {a.u_hi} & {b.u_lo} | {a.u_lo} & {b.u_hi}:
        lo = max(a.v_lo(u=u0), b.v_lo(u=u0))
        hi = min(a.v_hi(u=u0), b.v_hi(u=u0))
        if lo < hi:
            samples += [(u0, lo * Fraction(2, 3) + hi * Fraction(1, 3)),
                        (u0, lo * Fraction(1, 3) + hi * Fraction(2, 3))]
        elif lo == hi:
            samples.append((u0, lo))
    # Horizontal boundary: overlapping u-interval, touching v-bounds.
    u_lo, u_hi = max(a.u_lo, b.u_lo), min(a.u_hi, b.u_hi)
    if u_lo < u_hi:
        for upper, lower in ((a.v_hi, b.v_lo), (b.v_hi, a.v_lo)):
            if upper == lower:
                for t in (Fraction(1, 3), Fraction(2, 3)):
                    u0 = u_lo + (u_hi - u_lo) * t
                    samples.append((u0, upper(u=u0)))
    return samples
