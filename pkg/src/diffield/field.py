"""Finitely presented difference fields.

A presentation is an ordered list of generators over Q.  Each generator is
either *free* (its shifted copies g[k] are algebraically independent
indeterminates and the automorphism acts by shifting the index) or *affine*,
bound by a rule sigma(a) = alpha*a + beta with alpha != 0 and alpha, beta
built from strictly earlier generators.  Affinity makes the rule invertible
in closed form, so the induced sigma is an automorphism of the generated
field; every rule used downstream (torsor adjunctions sigma(t) = t + f and
multiplicative twists sigma(a) = e*a + e) is of this shape.

Affine generators only ever appear at shift 0: positive and negative images
are expanded eagerly through the rule, keeping the variable set finite and
canonical forms comparable.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .poly import MPoly, VarId
from .ratfunc import RatFunc


class PresentationError(ValueError):
    pass


@dataclass(frozen=True)
class FreeSpec:
    """A transformally transcendental generator."""


@dataclass(frozen=True)
class AffineSpec:
    """Rule sigma(a) = linear*a + constant over earlier generators."""

    linear: RatFunc
    constant: RatFunc


@dataclass(frozen=True)
class GeneratorSpec:
    index: int
    name: str
    kind: FreeSpec | AffineSpec

    @property
    def is_free(self) -> bool:
        return isinstance(self.kind, FreeSpec)


@dataclass(frozen=True)
class Presentation:
    """Immutable generator list; the base field is Q.

    Sub-presentations keep the ambient generator indices so elements stay
    comparable across restriction (the variable order never changes).
    """

    gens: tuple[GeneratorSpec, ...]

    # -- construction -------------------------------------------------------

    @staticmethod
    def empty() -> "Presentation":
        return Presentation(())

    def _next_index(self) -> int:
        return max((g.index for g in self.gens), default=-1) + 1

    def with_free(self, name: str) -> tuple["Presentation", "Element"]:
        p = Presentation(self.gens + (GeneratorSpec(self._next_index(), name, FreeSpec()),))
        p.validate()
        return p, p.gen(name)

    def with_affine(self, name: str, linear, constant) -> tuple["Presentation", "Element"]:
        lin = _as_ratfunc(linear)
        const = _as_ratfunc(constant)
        spec = GeneratorSpec(self._next_index(), name, AffineSpec(lin, const))
        p = Presentation(self.gens + (spec,))
        p.validate()
        return p, p.gen(name)

    def restrict(self, names: Iterable[str]) -> "Presentation":
        keep = set(names)
        p = Presentation(tuple(g for g in self.gens if g.name in keep))
        p.validate()
        return p

    # -- lookups -------------------------------------------------------------

    def spec(self, name: str) -> GeneratorSpec:
        for g in self.gens:
            if g.name == name:
                return g
        raise PresentationError(f"unknown generator {name!r}")

    def spec_by_index(self, index: int) -> GeneratorSpec:
        for g in self.gens:
            if g.index == index:
                return g
        raise PresentationError(f"no generator with index {index}")

    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.gens)

    def has_gen(self, name: str) -> bool:
        return any(g.name == name for g in self.gens)

    def free_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.gens if g.is_free)

    def affine_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.gens if not g.is_free)

    def is_free_only(self) -> bool:
        return all(g.is_free for g in self.gens)

    def subsumes(self, other: "Presentation") -> bool:
        mine = {g.index: g for g in self.gens}
        return all(mine.get(g.index) == g for g in other.gens)

    # -- validation ------------------------------------------------------------

    def validate(self) -> None:
        """Check name uniqueness, stratification and invertibility of rules."""
        seen: dict[str, int] = {}
        indices: set[int] = set()
        for g in self.gens:
            if g.name in seen:
                raise PresentationError(f"duplicate generator name {g.name!r}")
            if g.index in indices:
                raise PresentationError(f"duplicate generator index for {g.name!r}")
            seen[g.name] = g.index
            indices.add(g.index)
            if g.is_free:
                continue
            kind = g.kind
            if kind.linear.is_zero():
                raise PresentationError(f"generator {g.name!r}: linear part zero")
            for part in (kind.linear, kind.constant):
                for v in part.variables():
                    if v.index >= g.index:
                        raise PresentationError(
                            f"generator {g.name!r}: rule mentions {v.name!r}, "
                            "which is not strictly earlier (stratification)"
                        )
                    if v.index not in indices:
                        raise PresentationError(
                            f"generator {g.name!r}: rule mentions {v.name!r}, "
                            "which is not in this presentation"
                        )
                    earlier = self.spec_by_index(v.index)
                    if not earlier.is_free and v.shift != 0:
                        raise PresentationError(
                            f"generator {g.name!r}: affine generator {v.name!r} "
                            "used at a nonzero shift"
                        )

    def diagnostics(self) -> list[str]:
        try:
            self.validate()
        except PresentationError as exc:
            return [str(exc)]
        return []

    # -- element constructors ----------------------------------------------------

    def varid(self, name: str, shift: int = 0) -> VarId:
        g = self.spec(name)
        if not g.is_free and shift != 0:
            raise PresentationError(f"affine generator {name!r} only exists at shift 0")
        return VarId(g.index, g.name, shift)

    def gen(self, name: str, shift: int = 0) -> "Element":
        return Element(self, RatFunc.var(self.varid(name, shift)))

    def const(self, c) -> "Element":
        return Element(self, RatFunc.const(c))

    def zero(self) -> "Element":
        return self.const(0)

    def one(self) -> "Element":
        return self.const(1)

    def element(self, value: RatFunc) -> "Element":
        return Element(self, value)

    def check_value(self, value: RatFunc) -> None:
        by_index = {g.index: g for g in self.gens}
        for v in value.variables():
            g = by_index.get(v.index)
            if g is None or g.name != v.name:
                raise PresentationError(f"value mentions foreign variable {v!r}")
            if not g.is_free and v.shift != 0:
                raise PresentationError(
                    f"affine generator {g.name!r} appears at shift {v.shift}"
                )


def _as_ratfunc(x) -> RatFunc:
    if isinstance(x, Element):
        return x.value
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, MPoly):
        return RatFunc.from_poly(x)
    return RatFunc.const(Fraction(x))


class Element:
    """A field element: a presentation plus a canonical rational function."""

    __slots__ = ("pres", "value")

    def __init__(self, pres: Presentation, value: RatFunc):
        pres.check_value(value)
        self.pres = pres
        self.value = value

    @staticmethod
    def _make(pres: Presentation, value: RatFunc) -> "Element":
        # internal fast path: arithmetic on validated elements stays valid
        e = Element.__new__(Element)
        e.pres = pres
        e.value = value
        return e

    # -- arithmetic (allowed across compatible presentations) -------------------

    def _join(self, other) -> tuple[Presentation, RatFunc, RatFunc]:
        if not isinstance(other, Element):
            return self.pres, self.value, _as_ratfunc(other)
        if self.pres is other.pres or self.pres == other.pres:
            return self.pres, self.value, other.value
        if self.pres.subsumes(other.pres):
            return self.pres, self.value, other.value
        if other.pres.subsumes(self.pres):
            return other.pres, self.value, other.value
        raise PresentationError("elements of incompatible presentations")

    def __add__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, a + b)

    __radd__ = __add__

    def __neg__(self):
        return Element._make(self.pres, -self.value)

    def __sub__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, a - b)

    def __rsub__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, b - a)

    def __mul__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, a / b)

    def __rtruediv__(self, other):
        p, a, b = self._join(other)
        return Element._make(p, b / a)

    def __pow__(self, n: int):
        return Element._make(self.pres, self.value**n)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.value == RatFunc.const(other)
        return isinstance(other, Element) and self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return repr(self.value)

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def is_constant(self) -> bool:
        return self.value.is_constant()

    def constant_value(self) -> Fraction:
        return self.value.constant_value()

    def in_presentation(self, pres: Presentation) -> "Element":
        return Element(pres, self.value)

    def sigma(self, k: int = 1) -> "Element":
        return Element._make(self.pres, sigma_value(self.pres, self.value, k))

    def wp(self) -> "Element":
        """The additive difference operator x -> sigma(x) - x."""
        return self.sigma(1) - self

    def is_fixed(self) -> bool:
        return sigma_value(self.pres, self.value, 1) == self.value


# -- the sigma action ----------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _var_image(pres: Presentation, var: VarId, direction: int) -> RatFunc:
    """Image of a single variable under sigma^{+1} or sigma^{-1}."""
    g = pres.spec_by_index(var.index)
    if g.is_free:
        return RatFunc.var(var.shifted(direction))
    kind = g.kind
    a = RatFunc.var(var)
    if direction == 1:
        return kind.linear * a + kind.constant
    alpha_inv = sigma_value(pres, kind.linear, -1)
    beta_inv = sigma_value(pres, kind.constant, -1)
    return (a - beta_inv) / alpha_inv


def sigma_value(pres: Presentation, value: RatFunc, k: int) -> RatFunc:
    """Apply sigma^k to a rational function over the presentation."""
    if k == 0 or value.is_constant():
        return value
    direction = 1 if k > 0 else -1
    by_index = {g.index: g for g in pres.gens}
    for _ in range(abs(k)):
        vars_ = value.variables()
        if all(by_index[v.index].is_free for v in vars_):
            value = value.shift(direction)  # purely free variables: fast path
        else:
            images = {v: _var_image(pres, v, direction) for v in vars_}
            value = value.substitute(images)
    return value


# -- module-level operations matching the public surface ------------------------


def validate(pres: Presentation) -> list[str]:
    """Empty list when the presentation is well formed, else diagnostics."""
    return pres.diagnostics()


def sigma(x: Element, k: int = 1) -> Element:
    return x.sigma(k)


def wp(x: Element) -> Element:
    return x.wp()


def is_fixed(x: Element) -> bool:
    return x.is_fixed()
