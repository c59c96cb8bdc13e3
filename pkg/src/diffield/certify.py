"""Unsolvability certificates over affine extension stacks.

A bounded search can only report exhaustion; certificates refute equations
outright.  The engine works by leading-coefficient reduction: writing a
hypothetical solution over the top affine generator a (rule sigma(a) =
alpha*a + beta) as N(a)/D(a) in normal position forces, per degree case, a
twisted or multiplicative equation on the leading coefficient ratio one
level down.  Composing the case analyses down the extension stack, every
branch must end in a registered avoided family, a free-base refutation, or
a degree obstruction; the assembled tree replays mechanically.

The verdict is deliberately three-valued: certificates refute, solutions
are found elsewhere, and anything the case analysis cannot close is an
honest Unknown (general unsolvability over non-free bases is only
semi-decided; only specific families refute unboundedly).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .equations import (
    MultiplicativeEquation,
    TwistedEquation,
    Unknown,
    Unsolvable,
    UnsupportedCoefficientShape,
)
from .field import Element, Presentation
from .freebase import FreeRefutation, decide_free_base, multiplicative_kernel
from .tower import coefficients_in, last_affine


# -- query forms ----------------------------------------------------------------


@dataclass(frozen=True)
class RatioQuery:
    """sigma(y)/y = ratio, y != 0."""

    ratio: Element

    def __repr__(self) -> str:
        return f"sigma(y)/y = {self.ratio}"


@dataclass(frozen=True)
class IntSet:
    """Symbolic set of integer exponents."""

    kind: str  # "all" | "nonzero" | "le" | "ge"
    bound: int = 0

    def excludes_zero(self) -> bool:
        if self.kind == "nonzero":
            return True
        if self.kind == "le":
            return self.bound <= -1
        if self.kind == "ge":
            return self.bound >= 1
        return False

    def samples(self) -> tuple[int, ...]:
        if self.kind == "nonzero":
            return (1, 2, 3, -1, -2, -3)
        if self.kind == "le":
            return (self.bound, self.bound - 1, self.bound - 2)
        if self.kind == "ge":
            return (self.bound, self.bound + 1, self.bound + 2)
        return (0, 1, -1, 2, -2)

    def __repr__(self) -> str:
        if self.kind == "le":
            return f"z <= {self.bound}"
        if self.kind == "ge":
            return f"z >= {self.bound}"
        return {"all": "z in Z", "nonzero": "z != 0"}[self.kind]


@dataclass(frozen=True)
class MultFamilyQuery:
    """sigma(y)/y = twist * base^z for every z in the exponent set."""

    twist: Element
    base: Element
    exponents: IntSet

    def __repr__(self) -> str:
        return f"sigma(y)/y = ({self.twist})*({self.base})^z, {self.exponents}"


@dataclass(frozen=True)
class TwistedShiftFamily:
    """sigma(x) - e1*x = e2 + c for every c in the level below the top generator.

    This is the parametric form needed by refutation chains: the additive
    shift c is arbitrary but cannot reach the top coefficient of e2.
    """

    e1: Element
    e2: Element

    def __repr__(self) -> str:
        return f"sigma(x) - ({self.e1})*x = {self.e2} + c (c arbitrary one level down)"


Query = Union[TwistedEquation, MultiplicativeEquation, RatioQuery, MultFamilyQuery, TwistedShiftFamily]


# -- certificate nodes -------------------------------------------------------------


@dataclass(frozen=True)
class RegistryHit:
    index: int
    description: str


@dataclass(frozen=True)
class BaseRefutation:
    refutation: FreeRefutation


@dataclass(frozen=True)
class FamilyBaseRefutation:
    """Uniform free-base argument for a whole exponent family.

    For nonzero exponents the reduced ratio has exactly the base's variables,
    so the shift window is empty independently of z; constants would need the
    ratio to equal 1, which a nonconstant base never allows.
    """

    description: str
    spot_checks: tuple[int, ...]


@dataclass(frozen=True)
class DegreeObstruction:
    """A coefficient position the ansatz cannot reach is forced nonzero."""

    position: int
    coefficient: Element


@dataclass(frozen=True)
class Case:
    label: str
    derived: Optional[Query]
    node: "CertNode"


@dataclass(frozen=True)
class ExtensionSplit:
    generator: str
    rule: str
    query: str
    cases: tuple[Case, ...]


CertNode = Union[RegistryHit, BaseRefutation, FamilyBaseRefutation, DegreeObstruction, ExtensionSplit]


@dataclass(frozen=True)
class Certificate:
    presentation: tuple[str, ...]
    query: str
    node: CertNode


# -- the avoided-family registry ------------------------------------------------------


@dataclass(frozen=True)
class RegistryEntry:
    query: Query
    certificate: Certificate


@dataclass(frozen=True)
class AvoidedRegistry:
    pres: Presentation
    entries: tuple[RegistryEntry, ...]

    def match(self, pres: Presentation, query: Query) -> RegistryHit | None:
        if pres != self.pres:
            return None
        for i, entry in enumerate(self.entries):
            if _query_subsumed(query, entry.query):
                return RegistryHit(i, repr(entry.query))
        return None


def _query_subsumed(query: Query, registered: Query) -> bool:
    if isinstance(registered, TwistedEquation):
        return (
            isinstance(query, TwistedEquation)
            and query.e1 == registered.e1
            and query.e2 == registered.e2
        )
    if isinstance(registered, MultFamilyQuery):
        if isinstance(query, MultFamilyQuery):
            return (
                query.twist == registered.twist
                and query.base == registered.base
                and _exp_subset(query.exponents, registered.exponents)
            )
        if isinstance(query, RatioQuery) and registered.twist == 1:
            z = _power_of(query.ratio, registered.base)
            return z is not None and z != 0 and registered.exponents.kind in ("all", "nonzero")
        if isinstance(query, MultiplicativeEquation) and registered.twist == 1:
            return query.e == registered.base and registered.exponents.kind in ("all", "nonzero")
    return False


def _exp_subset(a: IntSet, b: IntSet) -> bool:
    if b.kind == "all":
        return True
    if b.kind == "nonzero":
        return a.excludes_zero()
    if b.kind == a.kind:
        return a.bound <= b.bound if b.kind == "le" else a.bound >= b.bound
    return False


def _power_of(u: Element, base: Element, limit: int = 8) -> int | None:
    if u == 1:
        return 0
    acc = base.pres.one()
    for z in range(1, limit + 1):
        acc = acc * base
        if u == acc:
            return z
    acc = base.pres.one()
    for z in range(1, limit + 1):
        acc = acc / base
        if u == acc:
            return -z
    return None


# -- certification ----------------------------------------------------------------------


def certify_unsolvable(pres: Presentation, query: Query, registry: AvoidedRegistry | None = None):
    """Certificate of unsolvability, or Unknown.

    The certifier never contradicts a solver: a query it cannot close (in
    particular, a solvable one) comes back Unknown, not refuted.
    """
    query = _normalize_query(query)
    try:
        node = _certify(pres, query, registry)
    except UnsupportedCoefficientShape as exc:
        return Unknown(str(exc))
    if node is None:
        return Unknown(f"no closing case analysis for {query!r}")
    return Unsolvable(Certificate(pres.names(), repr(query), node))


def replay_certificate(pres: Presentation, query: Query, cert: Certificate, registry: AvoidedRegistry | None = None) -> bool:
    """Re-derive the case analysis from the inputs and compare, bit-exactly."""
    again = certify_unsolvable(pres, query, registry)
    return isinstance(again, Unsolvable) and again.certificate == cert


def _normalize_query(query: Query) -> Query:
    if isinstance(query, MultiplicativeEquation):
        return RatioQuery(query.ratio())
    return query


def _certify(pres: Presentation, query: Query, registry: AvoidedRegistry | None) -> CertNode | None:
    if registry is not None:
        hit = registry.match(pres, query)
        if hit is not None:
            return hit
    if pres.is_free_only():
        return _certify_free(pres, query)
    gen = last_affine(pres)
    sub = pres.restrict([n for n in pres.names() if n != gen.name])
    alpha = Element(sub, gen.kind.linear)
    beta = Element(sub, gen.kind.constant)
    rule = f"sigma({gen.name}) = ({alpha})*{gen.name} + ({beta})"

    if isinstance(query, (TwistedEquation, TwistedShiftFamily)):
        return _certify_twisted_over_extension(pres, sub, gen, alpha, rule, query, registry)
    if isinstance(query, RatioQuery):
        u = _level_free(query.ratio, pres, sub, gen)
        if u is None:
            return None
        derived = _mult_family_over_extension(MultFamilyQuery(u, sub.one(), IntSet("all")), alpha, sub)
        return _close_case(pres, sub, gen, rule, query, [("any degrees n, m", derived)], registry)
    if isinstance(query, MultFamilyQuery):
        twist = _level_free(query.twist, pres, sub, gen)
        base = _level_free(query.base, pres, sub, gen)
        if twist is None or base is None:
            return None
        derived = _mult_family_over_extension(
            MultFamilyQuery(twist, base, query.exponents), alpha, sub
        )
        return _close_case(pres, sub, gen, rule, query, [("any degrees n, m", derived)], registry)
    return None


def _mult_family_over_extension(fam: MultFamilyQuery, alpha: Element, sub: Presentation) -> Query | None:
    """Reduce a multiplicative family over one extension.

    The leading-coefficient identity multiplies the ratio by alpha^(m-n)
    with m - n arbitrary; only a trivial alpha keeps the family closed.
    """
    if alpha == 1:
        if fam.base == 1:
            return RatioQuery(fam.twist)
        return fam
    if fam.base == 1:
        return MultFamilyQuery(fam.twist, alpha, IntSet("all"))
    return None  # exponent sets would smear over all of Z


def _certify_twisted_over_extension(pres, sub, gen, alpha, rule, query, registry) -> CertNode | None:
    opaque = isinstance(query, TwistedShiftFamily)
    e1 = _level_free(query.e1, pres, sub, gen)
    if e1 is None:
        return None
    coeffs = {
        deg: val.in_presentation(sub)
        for deg, val in coefficients_in(query.e2, pres, gen).items()
    }
    d2 = max(coeffs.keys(), default=0)
    top = coeffs.get(d2, sub.zero())
    if d2 == 0:
        if opaque:
            return None  # the arbitrary shift swallows the only coefficient
        if top.is_zero():
            return None  # e2 = 0 is solved by x = 0; nothing to refute
    cases: list[tuple[str, Query | None]] = []
    # n < m + d2: the coefficient of a^(m+d2) is alpha^m * top * 1 != 0 but the
    # numerator cannot reach that degree.
    if d2 >= 1:
        cases.append((f"n < m + {d2}", DegreeObstruction(d2, top)))
    else:
        cases.append(("n < m", DegreeObstruction(0, top)))
    shift = alpha ** (-d2)
    derived_twisted: Query = TwistedEquation(e1 * shift, top * shift)
    cases.append((f"n = m + {d2}", derived_twisted))
    if alpha == 1:
        if e1 == 1:
            return None  # leading coefficients may be constant; inconclusive
        high: Query = RatioQuery(e1)
    else:
        high = MultFamilyQuery(e1, alpha, IntSet("le", -(d2 + 1)))
    cases.append((f"n > m + {d2}", high))
    return _close_case(pres, sub, gen, rule, query, cases, registry)


def _close_case(pres, sub, gen, rule, query, labeled: list[tuple[str, Query | DegreeObstruction | None]], registry) -> CertNode | None:
    out: list[Case] = []
    for label, derived in labeled:
        if derived is None:
            return None
        if isinstance(derived, DegreeObstruction):
            out.append(Case(label, None, derived))
            continue
        node = _certify(sub, derived, registry)
        if node is None:
            return None
        out.append(Case(label, derived, node))
    return ExtensionSplit(gen.name, rule, repr(query), tuple(out))


def _level_free(elem: Element, pres: Presentation, sub: Presentation, gen) -> Element | None:
    try:
        coeffs = coefficients_in(elem, pres, gen)
    except UnsupportedCoefficientShape:
        return None
    if set(coeffs) - {0}:
        return None
    return coeffs.get(0, pres.zero()).in_presentation(sub)


def _certify_free(pres: Presentation, query: Query) -> CertNode | None:
    if isinstance(query, TwistedEquation):
        res = decide_free_base(pres, query)
        return BaseRefutation(res.certificate) if isinstance(res, Unsolvable) else None
    if isinstance(query, TwistedShiftFamily):
        return None  # an arbitrary rational shift can always be matched here
    if isinstance(query, RatioQuery):
        basis, cert = multiplicative_kernel(pres, query.ratio)
        return BaseRefutation(cert) if not basis else None
    if isinstance(query, MultFamilyQuery):
        return _certify_free_family(pres, query)
    return None


def _certify_free_family(pres: Presentation, fam: MultFamilyQuery) -> CertNode | None:
    """Uniform-in-z refutation of sigma(y)/y = twist * base^z over a free base."""
    if not fam.twist.is_constant():
        return None
    if fam.base.is_constant():
        return None
    shifts = fam.base.value.shifts()
    if max(shifts) - 1 >= min(shifts):
        return None  # nonempty window: no uniform argument available
    if not fam.exponents.excludes_zero() and fam.twist == 1:
        return None  # z = 0 gives sigma(y) = y, solved by constants
    checks = []
    for z in fam.exponents.samples():
        if z == 0:
            ok = fam.twist != 1
        else:
            basis, _ = multiplicative_kernel(pres, fam.twist * fam.base**z)
            ok = not basis
        if not ok:
            return None
        checks.append(z)
    description = (
        f"for every admissible z the reduced ratio ({fam.twist})*({fam.base})^z has the "
        "variables of the base, so the shift window is empty and nonconstant solutions "
        "are impossible; constants would need the ratio to equal 1, which a nonconstant "
        "base never allows"
    )
    return FamilyBaseRefutation(description, tuple(checks))


# -- explicit-degree leading-coefficient reduction ----------------------------------


@dataclass(frozen=True)
class DerivedCondition:
    """Necessary condition on the leading coefficient ratio, one level down.

    Any solution x = N/D with deg N = n, deg D = m in normal position over the
    extension yields an element of the lower level satisfying ``equation``
    (the monic-denominator normalization carries y = (leading coefficient of
    N) / (leading coefficient of D)).
    """

    label: str
    equation: Query | None  # None when the degree pair is outright impossible
    obstruction: DegreeObstruction | None = None


def reduce_over_affine_extension(
    pres: Presentation,
    gen_name: str,
    eq: TwistedEquation | MultiplicativeEquation,
    n: int,
    m: int,
) -> list[DerivedCondition]:
    """Leading-coefficient conditions for ansatz degrees (n, m) over one extension.

    The equation's coefficients must live one level down (polynomially in the
    extension generator for the right-hand side); degenerate leading
    coefficients are the caller's concern ("not in normal position" means the
    caller should decrement degrees and retry).
    """
    if n < 0 or m < 0:
        raise ValueError("ansatz degrees must be nonnegative")
    gen = pres.spec(gen_name)
    if gen.is_free:
        raise UnsupportedCoefficientShape(f"{gen_name!r} is a free generator")
    sub = pres.restrict([nm for nm in pres.names() if nm != gen_name])
    alpha = Element(sub, gen.kind.linear)
    if isinstance(eq, MultiplicativeEquation):
        u = _level_free(eq.ratio(), pres, sub, gen)
        if u is None:
            raise UnsupportedCoefficientShape("ratio mentions the extension generator")
        return [DerivedCondition(f"n = {n}, m = {m}", RatioQuery(u * alpha ** (m - n)))]
    e1 = _level_free(eq.e1, pres, sub, gen)
    if e1 is None:
        raise UnsupportedCoefficientShape("twist coefficient mentions the extension generator")
    coeffs = {
        deg: val.in_presentation(sub)
        for deg, val in coefficients_in(eq.e2, pres, gen).items()
    }
    d2 = max(coeffs.keys(), default=0)
    top = coeffs.get(d2, sub.zero())
    if n > m + d2:
        return [DerivedCondition(f"n > m + {d2}", RatioQuery(e1 * alpha ** (m - n)))]
    if n == m + d2:
        shift = alpha ** (m - n)
        return [DerivedCondition(f"n = m + {d2}", TwistedEquation(e1 * shift, top * shift))]
    return [
        DerivedCondition(
            f"n < m + {d2}",
            None,
            DegreeObstruction(m + d2, top),
        )
    ]
