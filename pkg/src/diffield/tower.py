"""Bounded solving over presentations with affine extensions.

The solver peels the last affine generator a (rule sigma(a) = alpha*a +
beta) and writes a candidate x = N(a)/D(a) with coefficients one level
down.  For coefficients of the equation polynomial in a, coprimality forces
the reduced monic denominator to satisfy sigma(D) = alpha^m * D, and the
numerator identity sigma(N) = alpha^m * (e1*N + e2*D) splits into a
triangular tower of twisted equations for the coefficients, solved
recursively; the recursion bottoms out in the complete free-base solver.
Everything stays jointly linear in the bookkeeping parameters, so each
structural branch is one exact linear system.

Search class (what "within bounds" means here): numerator and denominator
degree at most ``bounds.degree`` in every affine generator, coefficient
degree budgets shrinking accordingly, free-variable shifts within
``bounds.window`` plus the derived free-base windows, and free-base
denominators from the derived candidate products.  Denominators whose
coefficient tower has free parameters are searched at their particular
point only.  Every returned solution is verified by substitution;
exhaustion of the class is reported as NoSolutionWithinBounds, never as
unsolvability (certificates are a separate mechanism).
"""

from __future__ import annotations

from math import comb
from typing import Iterator

from .equations import (
    MultiplicativeEquation,
    NoSolutionWithinBounds,
    SearchBounds,
    Solution,
    SolveResult,
    TwistedEquation,
    UnsupportedCoefficientShape,
)
from .field import Element, GeneratorSpec, Presentation
from .freebase import decide_free_base, twisted_family
from .params import Infeasible, LinComb, ParamContext
from .poly import MPoly
from .ratfunc import RatFunc, SpanTracker


def last_affine(pres: Presentation) -> GeneratorSpec | None:
    for g in reversed(pres.gens):
        if not g.is_free:
            return g
    return None


def coefficients_in(elem: Element, pres: Presentation, gen: GeneratorSpec) -> dict[int, Element]:
    """Write an element as a polynomial in gen with lower-level coefficients.

    Raises UnsupportedCoefficientShape when the denominator involves gen.
    """
    var = pres.varid(gen.name)
    value = elem.value
    if any(v == var for v in value.den.variables()):
        raise UnsupportedCoefficientShape(
            f"coefficient has {gen.name!r} in its denominator"
        )
    out: dict[int, dict] = {}
    for mono, c in value.num.terms.items():
        deg = 0
        rest = []
        for v, e in mono:
            if v == var:
                deg = e
            else:
                rest.append((v, e))
        out.setdefault(deg, {})[tuple(rest)] = c
    den = RatFunc.from_poly(value.den)
    result: dict[int, Element] = {}
    for deg, terms in out.items():
        result[deg] = Element(elem.pres, RatFunc.from_poly(MPoly(terms)) / den)
    return result


def _safe_branches(*args) -> Iterator[tuple[ParamContext, LinComb]]:
    """Recursive branch iteration; prunes shapes outside the search class.

    A lower-level solution family can carry extension-generator denominators
    (an m >= 1 denominator branch); feeding it into the next coefficient
    equation would need a non-polynomial split, so such combinations are
    outside the documented class and their branches simply end here.
    """
    try:
        yield from iter_twisted_branches(*args)
    except UnsupportedCoefficientShape:
        return


def iter_twisted_branches(
    pres: Presentation,
    e1: Element,
    rhs: LinComb,
    ctx: ParamContext,
    deg_budget: int,
    window: int,
) -> Iterator[tuple[ParamContext, LinComb]]:
    """Yield (ctx, family) branches covering the search class."""
    if deg_budget < 0:
        return
    if pres.is_free_only():
        forked = ctx.fork()
        try:
            fam = twisted_family(pres, e1, rhs, forked, deg_budget, window)
        except Infeasible:
            return
        yield forked, fam
        return
    gen = last_affine(pres)
    assert gen is not None
    sub = pres.restrict([n for n in pres.names() if n != gen.name])
    alpha = Element(sub, gen.kind.linear)
    beta = Element(sub, gen.kind.constant)
    e1_sub = _require_level_free(e1, pres, sub, gen)
    rhs_by_deg = _lincomb_coefficients(rhs, pres, gen, sub)
    d2 = max(rhs_by_deg.keys(), default=0)
    a_var = pres.gen(gen.name)
    for m in range(0, deg_budget + 1):
        for delta in _denominator_candidates(sub, alpha, beta, m, deg_budget, window):
            yield from _numerator_branches(
                pres, sub, gen, alpha, beta, e1_sub, rhs_by_deg, d2,
                m, delta, ctx, deg_budget, window, a_var,
            )


def _require_level_free(e1: Element, pres: Presentation, sub: Presentation, gen: GeneratorSpec) -> Element:
    coeffs = coefficients_in(e1, pres, gen)
    if set(coeffs) - {0}:
        raise UnsupportedCoefficientShape(
            f"twist coefficient mentions the extension generator {gen.name!r}"
        )
    return coeffs.get(0, pres.zero()).in_presentation(sub)


def _lincomb_coefficients(lc: LinComb, pres: Presentation, gen: GeneratorSpec, sub: Presentation) -> dict[int, LinComb]:
    """Split a LinComb into per-degree LinCombs over the sub-presentation."""
    out: dict[int, LinComb] = {}

    def put(deg: int, param: int | None, value: Element):
        cur = out.get(deg, LinComb.zero(sub))
        add = LinComb(sub, value) if param is None else LinComb(sub, sub.zero(), {param: value})
        out[deg] = cur + add

    for deg, val in coefficients_in(lc.const, pres, gen).items():
        put(deg, None, val.in_presentation(sub))
    for param, coeff in lc.coeffs.items():
        for deg, val in coefficients_in(coeff, pres, gen).items():
            put(deg, param, val.in_presentation(sub))
    return out


_denominator_cache: dict[tuple, list[list[Element]]] = {}


def _denominator_candidates(
    sub: Presentation,
    alpha: Element,
    beta: Element,
    m: int,
    deg_budget: int,
    window: int,
) -> list[list[Element]]:
    """Concrete monic denominators: coefficient lists [c_0..c_m], c_m = 1.

    The tower sigma(c_k) - alpha^(m-k)*c_k = -(binomial terms of higher
    coefficients) is solved recursively in an isolated parameter context;
    each branch is materialized at its particular point.  Results are cached
    per exact budget, so enumeration order never depends on call history.
    """
    key = (sub, alpha.value, beta.value, m, window, deg_budget)
    cached = _denominator_cache.get(key)
    if cached is not None:
        return cached
    one = sub.one()
    if m == 0:
        _denominator_cache[key] = [[one]]
        return [[one]]

    def extend(k: int, solved: dict[int, LinComb], ctx: ParamContext) -> Iterator[tuple[ParamContext, dict[int, LinComb]]]:
        if k < 0:
            yield ctx, solved
            return
        rhs = LinComb.zero(sub)
        for i in range(k + 1, m + 1):
            term = solved[i].sigma(1).mul_known(
                sub.const(comb(i, k)) * beta ** (i - k)
            )
            rhs = rhs - term
        e1_level = alpha ** (m - k)
        for ctx2, fam in _safe_branches(sub, e1_level, rhs, ctx, deg_budget, window):
            yield from extend(k - 1, {**solved, k: fam}, ctx2)

    seen: set[tuple] = set()
    out = []
    base = ParamContext()
    for ctx, solved in extend(m - 1, {m: LinComb.constant(sub, one)}, base):
        particular, _ = ctx.solve()
        concrete = [solved[k].evaluate(particular) if k in solved else sub.zero() for k in range(m + 1)]
        dedup = tuple(repr(c) for c in concrete)
        if dedup in seen:
            continue
        seen.add(dedup)
        out.append(concrete)
    _denominator_cache[key] = out
    return out


def _numerator_branches(
    pres, sub, gen, alpha, beta, e1_sub, rhs_by_deg, d2,
    m, delta, ctx, deg_budget, window, a_var,
) -> Iterator[tuple[ParamContext, LinComb]]:
    n_max = deg_budget
    k_top = max(n_max, m + d2)

    def rhs_delta_coeff(k: int) -> LinComb:
        total = LinComb.zero(sub)
        for j, part in rhs_by_deg.items():
            idx = k - j
            if 0 <= idx <= m:
                c = delta[idx]
                if not c.is_zero():
                    total = total + part.mul_known(c)
        return total

    def descend(k: int, solved: dict[int, LinComb], cur: ParamContext) -> Iterator[tuple[ParamContext, dict[int, LinComb]]]:
        if k < 0:
            yield cur, solved
            return
        if k > n_max:
            forked = cur.fork()
            try:
                forked.add_zero(rhs_delta_coeff(k))
            except Infeasible:
                return
            yield from descend(k - 1, solved, forked)
            return
        rhs = rhs_delta_coeff(k).mul_known(alpha ** (m - k))
        for i in range(k + 1, n_max + 1):
            term = solved[i].sigma(1).mul_known(sub.const(comb(i, k)) * beta ** (i - k))
            rhs = rhs - term
        e1_level = e1_sub * alpha ** (m - k)
        for ctx2, fam in _safe_branches(sub, e1_level, rhs, cur, deg_budget - k, window):
            yield from descend(k - 1, {**solved, k: fam}, ctx2)

    denominator = pres.zero()
    for k, c in enumerate(delta):
        denominator = denominator + c.in_presentation(pres) * a_var**k
    if denominator.is_zero():
        return
    for final_ctx, ys in descend(k_top, {}, ctx):
        family = LinComb.zero(pres)
        for k in range(0, n_max + 1):
            if k in ys:
                family = family + ys[k].lift(pres).mul_known(a_var**k / denominator)
        yield final_ctx, family


def solve_twisted_bounded(pres: Presentation, eq: TwistedEquation, bounds: SearchBounds = SearchBounds()) -> SolveResult:
    """Search the bounded class; first verified hit under the documented order.

    Over an all-free presentation this delegates to the genuine decision,
    which can return the stronger Unsolvable verdict.
    """
    if pres.is_free_only():
        return decide_free_base(pres, eq)
    ctx = ParamContext()
    rhs = LinComb.constant(pres, eq.e2)
    for branch_ctx, family in iter_twisted_branches(pres, eq.e1, rhs, ctx, bounds.degree, bounds.window):
        particular, _ = branch_ctx.solve()
        x = family.evaluate(particular)
        if eq.holds_for(x):
            return Solution(x)
        raise AssertionError("internal error: branch solution failed verification")
    return NoSolutionWithinBounds(bounds)


def solve_multiplicative_bounded(
    pres: Presentation, eq: MultiplicativeEquation, bounds: SearchBounds = SearchBounds()
) -> SolveResult:
    """Nonzero solutions of sigma(x) = e^z * x within the bounded class."""
    if pres.is_free_only():
        return decide_free_base(pres, eq)
    ratio = eq.ratio()
    ctx = ParamContext()
    rhs = LinComb.zero(pres)
    for branch_ctx, family in iter_twisted_branches(pres, ratio, rhs, ctx, bounds.degree, bounds.window):
        particular, kernel = branch_ctx.solve()
        candidates = [family.evaluate(particular)]
        for direction in kernel:
            candidates.append(candidates[0] + family.direction(direction))
        for x in candidates:
            if not x.is_zero():
                if eq.holds_for(x):
                    return Solution(x)
                raise AssertionError("internal error: branch solution failed verification")
    return NoSolutionWithinBounds(bounds)


_fixed_space_cache: dict[tuple, list[Element]] = {}


def fixed_space(pres: Presentation, bounds: SearchBounds = SearchBounds()) -> list[Element]:
    """Spanning set of fixed elements found within the bounded class.

    Complete for the documented class; used as the honest bounded proxy for
    the fixed subfield of a generated difference field.
    """
    key = (pres, bounds)
    hit = _fixed_space_cache.get(key)
    if hit is not None:
        return list(hit)
    out = _fixed_space(pres, bounds)
    _fixed_space_cache[key] = out
    return list(out)


def _fixed_space(pres: Presentation, bounds: SearchBounds) -> list[Element]:
    if pres.is_free_only():
        return [pres.one()]  # the fixed field of a free presentation is Q
    ctx = ParamContext()
    rhs = LinComb.zero(pres)
    candidates: list[Element] = []
    for branch_ctx, family in iter_twisted_branches(pres, pres.one(), rhs, ctx, bounds.degree, bounds.window):
        particular, kernel = branch_ctx.solve()
        batch = [family.evaluate(particular)]
        for direction in kernel:
            batch.append(family.direction(direction))
        for x in batch:
            if x.is_zero():
                continue
            if not x.is_fixed():
                raise AssertionError("internal error: fixed-space candidate not fixed")
            candidates.append(x)
    # group by denominator so the span tracker rarely re-clears
    candidates.sort(key=lambda e: (repr(e.value.den), repr(e.value)))
    tracker = SpanTracker()
    basis = [pres.one()]
    tracker.add(basis[0].value)
    for x in candidates:
        if tracker.add(x.value):
            basis.append(x)
    return basis
