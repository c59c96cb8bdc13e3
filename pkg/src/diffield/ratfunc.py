"""Canonical multivariate rational functions over Q.

A :class:`RatFunc` stores a coprime numerator/denominator pair whose
denominator is monic under the graded-lex order, so equality of values is
equality of representations.  This is the universal element type: everything
the engine manipulates (generators, twisted-equation coefficients, character
arguments) is one of these.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .linalg import integer_kernel
from .poly import MPoly, VarId, divexact, poly_gcd, poly_lcm

Q0 = Fraction(0)
Q1 = Fraction(1)


class PoleError(ArithmeticError):
    """A substitution made a denominator identically zero."""


class RatFunc:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: MPoly, den: MPoly):
        self.num, self.den = _normalize(num, den)
        self._hash: int | None = None

    # -- constructors --------------------------------------------------------

    @staticmethod
    def const(c) -> "RatFunc":
        return RatFunc(MPoly.const(c), MPoly.const(1))

    @staticmethod
    def zero() -> "RatFunc":
        return RatFunc(MPoly(), MPoly.const(1))

    @staticmethod
    def one() -> "RatFunc":
        return RatFunc.const(1)

    @staticmethod
    def var(v: VarId) -> "RatFunc":
        return RatFunc(MPoly.var(v), MPoly.const(1))

    @staticmethod
    def from_poly(p: MPoly) -> "RatFunc":
        return RatFunc(p, MPoly.const(1))

    # -- queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Q0
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def variables(self) -> set[VarId]:
        return self.num.variables() | self.den.variables()

    def shifts(self) -> set[int]:
        return {v.shift for v in self.variables()}

    def valuation(self) -> int:
        """Degree at infinity: deg(num) - deg(den). Only for nonzero values."""
        if self.is_zero():
            raise ValueError("zero has no degree at infinity")
        return self.num.total_degree() - self.den.total_degree()

    def top_form(self) -> "RatFunc":
        """Ratio of the homogeneous top parts (nonzero input)."""
        return RatFunc(self.num.top_form(), self.den.top_form())

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        other = _coerce(other)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        r = RatFunc.__new__(RatFunc)
        r.num, r.den = -self.num, self.den
        r._hash = None
        return r

    def __sub__(self, other) -> "RatFunc":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "RatFunc":
        other = _coerce(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return _coerce(other) / self

    def inv(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("division by zero")
        return RatFunc(self.den, self.num)

    def __pow__(self, n: int) -> "RatFunc":
        if n == 0:
            return RatFunc.one()
        if n < 0:
            return self.inv() ** (-n)
        return RatFunc(self.num**n, self.den**n)

    def shift(self, k: int) -> "RatFunc":
        """Shift all variables by k; canonicalization is preserved."""
        if k == 0:
            return self
        r = RatFunc.__new__(RatFunc)
        r.num, r.den = self.num.shift(k), self.den.shift(k)
        r._hash = None
        return r

    # -- substitution / evaluation ---------------------------------------------

    def evaluate(self, assignment: Mapping[VarId, Fraction]) -> "RatFunc":
        """Substitute rational values for some variables and renormalize."""
        num = self.num.eval_partial(assignment)
        den = self.den.eval_partial(assignment)
        if den.is_zero():
            raise PoleError("pole hit: denominator vanished under substitution")
        return RatFunc(num, den)

    def substitute(self, images: Mapping[VarId, "RatFunc"]) -> "RatFunc":
        """Substitute rational functions for variables (used by the sigma action)."""
        if not images:
            return self
        num = _subst_poly(self.num, images)
        den = _subst_poly(self.den, images)
        if den.is_zero():
            raise PoleError("pole hit: denominator vanished under substitution")
        return num / den

    # -- equality / printing -----------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        if self.den == MPoly.const(1):
            return repr(self.num)
        num = repr(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        den = repr(self.den)
        if len(self.den.terms) > 1:
            den = f"({den})"
        return f"{num}/{den}"


def normalize(num: MPoly, den: MPoly) -> RatFunc:
    """The canonical representative of num/den.

    normalize(num*h, den*h) == normalize(num, den) for any nonzero h.
    """
    return RatFunc(num, den)


def _coerce(x) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, MPoly):
        return RatFunc.from_poly(x)
    if isinstance(x, (int, Fraction)):
        return RatFunc.const(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to RatFunc")


def _normalize(num: MPoly, den: MPoly) -> tuple[MPoly, MPoly]:
    if den.is_zero():
        raise ZeroDivisionError("division by zero")
    if num.is_zero():
        return MPoly(), MPoly.const(1)
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not (g.is_constant()):
            num = divexact(num, g)
            den = divexact(den, g)
    lc = den.leading_coefficient()
    if lc != 1:
        inv = Q1 / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


def _subst_poly(p: MPoly, images: Mapping[VarId, RatFunc]) -> RatFunc:
    power_cache: dict[tuple[VarId, int], RatFunc] = {}

    def power(v: VarId, e: int) -> RatFunc:
        key = (v, e)
        got = power_cache.get(key)
        if got is None:
            got = images[v] ** e
            power_cache[key] = got
        return got

    total = RatFunc.zero()
    for m, c in p.terms.items():
        term = RatFunc.const(c)
        for v, e in m:
            if v in images:
                term = term * power(v, e)
            else:
                term = term * RatFunc(MPoly({((v, e),): Q1}), MPoly.const(1))
        total = total + term
    return total


def common_denominator(elems: Sequence[RatFunc]) -> MPoly:
    seen: set[MPoly] = set()
    den = MPoly.const(1)
    for e in elems:
        d = e.den
        if d.is_constant() or d in seen:
            continue
        seen.add(d)
        den = poly_lcm(den, d)
    return den


def linear_relations(elements: Sequence[RatFunc]) -> list[tuple[Fraction, ...]]:
    """Basis of the integer relation lattice {z : sum z_i * element_i = 0}.

    The tuples returned are integral and primitive, form a Q-basis of the full
    rational relation space, and generate *all* integer relations (the lattice
    is saturated).  Downstream character checks rely on the last point:
    a circle-valued homomorphism extends exactly when it vanishes on every
    integer relation, and a rescaled rational basis could miss some.
    """
    if not elements:
        raise ValueError("empty element list")
    den = common_denominator(elements)
    cleared = [e.num * divexact(den, e.den) for e in elements]
    monomials = sorted({m for p in cleared for m in p.terms}, key=lambda m: str(m))
    matrix = [[p.terms.get(m, Q0) for p in cleared] for m in monomials]
    basis = integer_kernel(matrix, len(elements))
    return [tuple(Fraction(z) for z in vec) for vec in basis]


class SpanTracker:
    """Incremental Q-span membership for rational functions.

    Keeps a common denominator and an echelonized set of cleared numerator
    vectors; adding an element whose denominator does not divide the current
    one triggers a re-clearing of the stored vectors.  Candidates should be
    grouped by denominator where possible to keep rebuilds rare.
    """

    def __init__(self) -> None:
        self.values: list[RatFunc] = []
        self.den: MPoly = MPoly.const(1)
        self._pivots: dict = {}

    def __len__(self) -> int:
        return len(self.values)

    def _clear(self, f: RatFunc) -> dict:
        if f.den == self.den:
            poly = f.num
        else:
            poly = f.num * divexact(self.den, f.den)
        return dict(poly.terms)

    def _reduce(self, vec: dict) -> dict:
        while vec:
            lead = max(vec, key=_mono_key)
            pivot = self._pivots.get(lead)
            if pivot is None:
                return vec
            factor = vec[lead]
            for m, c in pivot.items():
                nv = vec.get(m, Q0) - factor * c
                if nv:
                    vec[m] = nv
                else:
                    vec.pop(m, None)
        return vec

    def _insert(self, vec: dict) -> None:
        lead = max(vec, key=_mono_key)
        inv = Q1 / vec[lead]
        self._pivots[lead] = {m: c * inv for m, c in vec.items()}

    def _rebuild(self) -> None:
        self._pivots = {}
        for v in self.values:
            vec = self._reduce(self._clear(v))
            if vec:
                self._insert(vec)

    def contains(self, f: RatFunc) -> bool:
        if f.is_zero():
            return True
        if not poly_lcm(self.den, f.den) == self.den:
            return False  # its denominator is not even reachable
        return not self._reduce(self._clear(f))

    def add(self, f: RatFunc) -> bool:
        """Add if independent; returns True when the span grew."""
        if f.is_zero():
            return False
        new_den = poly_lcm(self.den, f.den)
        if new_den != self.den:
            self.den = new_den
            self._rebuild()
        vec = self._reduce(self._clear(f))
        if not vec:
            return False
        self._insert(vec)
        self.values.append(f)
        return True


def _mono_key(m):
    from .poly import mono_degree

    return (mono_degree(m), _mono_lex_key(m))


def _mono_lex_key(m):
    # ascending variable order with exponents negated compares like graded-lex
    return tuple((-v.index, -v.shift, v.name, e) for v, e in m)


class CircleValue:
    """Element of the rational circle group Q/Z, written additively.

    Angles live in [0, 1); the group law is addition mod 1.  Restricting to
    rational angles keeps every consistency question exact, and all in-scope
    decisions are Q-linear, so nothing is lost at instance level.
    """

    __slots__ = ("angle",)

    def __init__(self, angle) -> None:
        a = Fraction(angle)
        self.angle = a - (a.numerator // a.denominator)

    def __add__(self, other: "CircleValue") -> "CircleValue":
        return CircleValue(self.angle + other.angle)

    def __neg__(self) -> "CircleValue":
        return CircleValue(-self.angle)

    def __sub__(self, other: "CircleValue") -> "CircleValue":
        return CircleValue(self.angle - other.angle)

    def scaled(self, q) -> "CircleValue":
        return CircleValue(self.angle * Fraction(q))

    def is_identity(self) -> bool:
        return self.angle == 0

    def order(self) -> int:
        return self.angle.denominator

    def __eq__(self, other) -> bool:
        return isinstance(other, CircleValue) and self.angle == other.angle

    def __hash__(self) -> int:
        return hash(("circle", self.angle))

    def __repr__(self) -> str:
        return f"angle({self.angle})"
