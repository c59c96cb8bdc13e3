"""Complete decisions for first-order equations over all-free presentations.

Over a presentation whose generators are all free, the field is a rational
function field in shift-indexed indeterminates and sigma permutes the
variables.  That makes three a-priori bounds provable for any solution x of
sigma(x) - e1*x = e2 (written in lowest terms as N/D):

* window: every variable of x has shift in [lo, hi] where lo is the minimal
  shift appearing in e1, e2 and hi is the maximal shift minus one.  If x is
  nonconstant, sigma(x) has maximal shift m(x)+1 in reduced form, and the
  reduced right-hand side cannot reach above the coefficient support, which
  forces m(x) < max shift; the minimal-shift bound is symmetric.
* denominator: sigma(D) divides q1*q2*D and D divides sigma(D)*q2*p1 (p/q
  the coefficient numerators/denominators), so every irreducible factor of
  D chains out of the window through the coefficients in both directions;
  D divides the product over i = 1..S of gcd(sigma^'-i'(q1*q2),
  prod_j sigma^j(q2*p1)), a two-sided candidate that stays close to what
  can actually chain.
* numerator degree: the degree at infinity v(x) = deg N - deg D is capped by
  max(v(e2), v(e2) - v(e1), d0), where the extra candidate d0 exists only if
  the top homogeneous forms admit a multiplicative relation sigma(T) =
  top(e1)*T (a one-dimensional condition decided by the same machinery).

Within those bounds the equation is a finite exact linear system in the
coefficients of Y, where x = Y/A, so solvability is genuinely decided: a
returned witness verifies by substitution and an infeasible system refutes
every solution, not just bounded ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .equations import (
    MultiplicativeEquation,
    Solution,
    SolveResult,
    TwistedEquation,
    Unsolvable,
    UnsupportedCoefficientShape,
)
from .field import Element, Presentation
from .linalg import Q0
from .params import Infeasible, LinComb, ParamContext
from .poly import MPoly, VarId, divexact, poly_gcd, poly_lcm
from .ratfunc import RatFunc

_ANSATZ_LIMIT = 20000


@dataclass(frozen=True)
class WindowBound:
    lo: int
    hi: int

    def is_empty(self) -> bool:
        return self.hi < self.lo

    def span(self) -> int:
        return 0 if self.is_empty() else self.hi - self.lo + 1


@dataclass(frozen=True)
class FreeRefutation:
    """Replayable record of a free-base unsolvability decision."""

    kind: str  # "twisted" | "multiplicative"
    equation: str
    window: WindowBound | None
    denominator_bound: str
    degree_cap: int
    ansatz_size: int
    constant_candidate: str | None
    note: str

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "equation": self.equation,
            "window": None if self.window is None else [self.window.lo, self.window.hi],
            "denominator_bound": self.denominator_bound,
            "degree_cap": self.degree_cap,
            "ansatz_size": self.ansatz_size,
            "constant_candidate": self.constant_candidate,
            "note": self.note,
        }


def _require_free(pres: Presentation) -> None:
    if not pres.is_free_only():
        raise UnsupportedCoefficientShape(
            "free-base decision requires a presentation with only free generators"
        )


def _support_window(parts: Sequence[RatFunc]) -> WindowBound | None:
    shifts: set[int] = set()
    for p in parts:
        shifts |= p.shifts()
    if not shifts:
        return None
    return WindowBound(min(shifts), max(shifts) - 1)


def _clip_window(w: WindowBound | None, cap: int | None) -> WindowBound | None:
    if w is None or cap is None:
        return w
    return WindowBound(max(w.lo, -cap), min(w.hi, cap))


def _shift_product(q: MPoly, span: int) -> MPoly:
    out = MPoly.const(1)
    for i in range(1, span + 1):
        out = out * q.shift(-i)
    return out


def _denominator_bound(up: MPoly, down: MPoly, span: int) -> MPoly:
    """Two-sided candidate denominator.

    Every irreducible factor of a reduced solution denominator chains
    upward out of the window through ``up`` (sigma(D) | up * D) and
    downward through ``down`` (D | sigma(D) * down), so D divides the
    product over i of gcd(sigma^'-i'(up), prod_j sigma^j(down)); taking the
    gcd per shifted piece keeps the bound close to what can actually chain.
    """
    if up.is_constant():
        return MPoly.const(1)
    down_all = MPoly.const(1)
    for j in range(0, span + 1):
        down_all = down_all * down.shift(j)
    out = MPoly.const(1)
    for i in range(1, span + 1):
        piece = poly_gcd(up.shift(-i), down_all)
        if not piece.is_constant():
            out = out * piece
    return out


def _window_vars(pres: Presentation, w: WindowBound | None) -> list[VarId]:
    if w is None or w.is_empty():
        return []
    out = []
    for g in pres.gens:
        for s in range(w.lo, w.hi + 1):
            out.append(VarId(g.index, g.name, s))
    return out


def _monomials(vars_: Sequence[VarId], max_deg: int) -> list[MPoly]:
    """All monomials of total degree <= max_deg, deterministically ordered."""
    if max_deg < 0:
        return []
    count = 1
    k = len(vars_)
    # quick size estimate: C(max_deg + k, k)
    est = 1
    for i in range(1, k + 1):
        est = est * (max_deg + i) // i
    if est > _ANSATZ_LIMIT:
        raise UnsupportedCoefficientShape(
            f"ansatz of ~{est} monomials exceeds the supported search size"
        )
    ordered = sorted(vars_, key=VarId.key)
    monos: list[MPoly] = []
    for deg in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(ordered, deg):
            p = MPoly.const(1)
            for v in combo:
                p = p * MPoly.var(v)
            monos.append(p)
    return monos


_mult_kernel_cache: dict[tuple, tuple[list[Element], "FreeRefutation | None"]] = {}


def multiplicative_kernel(
    pres: Presentation,
    ratio: Element,
    deg_cap: int | None = None,
    window_cap: int | None = None,
) -> tuple[list[Element], FreeRefutation | None]:
    """All nonzero solutions of sigma(x) = ratio*x over a free presentation.

    Returns (basis of the solution space, refutation record when empty).
    The space has dimension at most one over Q since the fixed field of a
    free presentation is Q.
    """
    cache_key = (pres, ratio.value, deg_cap, window_cap)
    hit = _mult_kernel_cache.get(cache_key)
    if hit is not None:
        return hit
    out = _multiplicative_kernel(pres, ratio, deg_cap, window_cap)
    _mult_kernel_cache[cache_key] = out
    return out


def _multiplicative_kernel(
    pres: Presentation,
    ratio: Element,
    deg_cap: int | None = None,
    window_cap: int | None = None,
) -> tuple[list[Element], FreeRefutation | None]:
    _require_free(pres)
    u = ratio.value
    eqrepr = f"sigma(x) = ({ratio})*x"
    if u.is_constant():
        if u == RatFunc.one():
            return [pres.one()], None
        cert = FreeRefutation(
            "multiplicative", eqrepr, None, "1", 0, 1,
            None, f"constant ratio {ratio} != 1 admits no nonzero solution",
        )
        return [], cert
    window = _clip_window(_support_window([u]), window_cap)
    if window is None or window.is_empty():
        cert = FreeRefutation(
            "multiplicative", eqrepr, window, "1", 0, 0,
            None,
            "empty shift window: nonconstant solutions impossible, "
            "constants require ratio = 1",
        )
        return [], cert
    span = window.span()
    a_den = _denominator_bound(u.den, u.num, span)
    a_num = _denominator_bound(u.num, u.den, span)
    cap = a_num.total_degree() + a_den.total_degree()
    if deg_cap is not None:
        cap = min(cap, deg_cap + a_den.total_degree())
    vars_ = sorted(set(_window_vars(pres, window)) | a_den.variables(), key=VarId.key)
    monos = _monomials(vars_, cap)
    ctx = ParamContext()
    params = ctx.new_params(len(monos))
    a_elem = Element(pres, RatFunc.from_poly(a_den))
    # cleared identity: sigma(Y)*q*A_den - p*Y*sigma(A_den) = 0
    lhs_pos = u.den * a_den
    lhs_neg = u.num * a_den.shift(1)
    rows: dict = {}
    for p, mono in zip(params, monos):
        contribution = mono.shift(1) * lhs_pos - mono * lhs_neg
        for mkey, c in contribution.terms.items():
            rows.setdefault(mkey, {})[p] = c
    try:
        for mkey in sorted(rows, key=str):
            ctx.add_row(rows[mkey], Q0)
        solved = ctx.solve()
    except Infeasible:
        solved = None
    basis: list[Element] = []
    if solved is not None:
        _, kernel = solved
        for direction in kernel:
            y = pres.zero()
            for p, mono in zip(params, monos):
                q = direction.get(p, Q0)
                if q:
                    y = y + Element(pres, RatFunc.from_poly(mono.scale(q)))
            if not y.is_zero():
                x = y / a_elem
                if not any(x == b for b in basis):
                    basis.append(x)
    if basis:
        return basis, None
    cert = FreeRefutation(
        "multiplicative", eqrepr, window, repr(a_den), cap, len(monos),
        None, "homogeneous coefficient system has trivial kernel",
    )
    return [], cert


def twisted_family(
    pres: Presentation,
    e1: Element,
    rhs: LinComb,
    ctx: ParamContext,
    deg_cap: int | None = None,
    window_cap: int | None = None,
    trace: dict | None = None,
) -> LinComb:
    """Complete affine family of solutions of sigma(y) - e1*y = rhs.

    ``rhs`` may mention outer parameters; the ansatz coefficients become
    fresh parameters of ``ctx`` and the equation becomes exact rows.  Any
    actual solution (for any admissible parameter values) lies in the
    returned family; conversely, ctx rows force the family to solve.
    Raises Infeasible when no parameter assignment can work.
    """
    _require_free(pres)
    rhs_parts = [rhs.const] + list(rhs.coeffs.values())
    parts = [e1.value] + [p.value for p in rhs_parts]
    window = _clip_window(_support_window(parts), window_cap)
    q1 = e1.value.den
    q2 = MPoly.const(1)
    for p in rhs_parts:
        q2 = poly_lcm(q2, p.value.den)
    span = window.span() if window is not None else 0
    a_poly = _denominator_bound(q1 * q2, q2 * e1.value.num, span)
    v_candidates: list[int] = []
    ve1 = e1.value.valuation()
    for p in rhs_parts:
        if not p.is_zero():
            v_candidates.append(p.value.valuation())
            v_candidates.append(p.value.valuation() - ve1)
    if ve1 == 0:
        top = Element(pres, e1.value.top_form())
        kernel, _ = multiplicative_kernel(pres, top, deg_cap, window_cap)
        if kernel:
            v_candidates.append(kernel[0].value.valuation())
    if trace is not None:
        trace["window"] = window
        trace["denominator_bound"] = repr(a_poly)
    if not v_candidates:
        # rhs identically zero and no homogeneous direction: only y = 0.
        if trace is not None:
            trace["degree_cap"] = -1
            trace["ansatz_size"] = 0
        return LinComb.zero(pres)
    cap = max(v_candidates) + a_poly.total_degree()
    if deg_cap is not None:
        cap = min(cap, deg_cap + a_poly.total_degree())
    if cap < 0:
        if trace is not None:
            trace["degree_cap"] = cap
            trace["ansatz_size"] = 0
        ctx.add_zero(-rhs)  # only y = 0 remains possible
        return LinComb.zero(pres)
    vars_ = sorted(set(_window_vars(pres, window)) | a_poly.variables(), key=VarId.key)
    monos = _monomials(vars_, cap)
    if trace is not None:
        trace["degree_cap"] = cap
        trace["ansatz_size"] = len(monos)
    params = ctx.new_params(len(monos))
    # rows come from the cleared polynomial identity
    #   sigma(Y)*A*q1*Q2 - p1*Y*sigma(A)*Q2 = R(lambda)*sigma(A)*A*q1,
    # built with polynomial products only: no gcd normalization in the loop.
    a_shifted = a_poly.shift(1)
    p1 = e1.value.num
    lhs_pos = a_poly * q1 * q2
    lhs_neg = p1 * a_shifted * q2
    rhs_scale = a_shifted * a_poly * q1
    rows: dict = {}
    for p, mono in zip(params, monos):
        contribution = mono.shift(1) * lhs_pos - mono * lhs_neg
        for mkey, c in contribution.terms.items():
            rows.setdefault(mkey, ({}, [Q0]))[0][p] = c
    const_cleared = (rhs.const.value.num * divexact(q2, rhs.const.value.den)) * rhs_scale
    for mkey, c in const_cleared.terms.items():
        rows.setdefault(mkey, ({}, [Q0]))[1][0] -= c
    lam_cleared = {}
    for lam, part in rhs.coeffs.items():
        lam_cleared[lam] = (part.value.num * divexact(q2, part.value.den)) * rhs_scale
    for lam, poly in lam_cleared.items():
        for mkey, c in poly.terms.items():
            entry = rows.setdefault(mkey, ({}, [Q0]))
            entry[0][lam] = entry[0].get(lam, Q0) - c
    for mkey in sorted(rows, key=str):
        coeffs, const = rows[mkey]
        ctx.add_row(coeffs, const[0])
    a_elem = Element(pres, RatFunc.from_poly(a_poly))
    family = {p: Element(pres, RatFunc.from_poly(mono)) / a_elem for p, mono in zip(params, monos)}
    return LinComb(pres, pres.zero(), family)


def decide_twisted(pres: Presentation, eq: TwistedEquation) -> SolveResult:
    """Genuine decision for a twisted equation over a free presentation."""
    _require_free(pres)
    ctx = ParamContext()
    trace: dict = {}
    infeasible = False
    family = LinComb.zero(pres)
    try:
        family = twisted_family(pres, eq.e1, LinComb.constant(pres, eq.e2), ctx, trace=trace)
    except Infeasible:
        infeasible = True
    solved = None if infeasible else ctx.solve()
    if solved is not None:
        particular, _ = solved
        x = family.evaluate(particular)
        if not eq.holds_for(x):
            raise AssertionError("internal error: candidate failed verification")
        return Solution(x)
    cert = _twisted_refutation(pres, eq, trace)
    return Unsolvable(cert)


def _twisted_refutation(pres: Presentation, eq: TwistedEquation, trace: dict) -> FreeRefutation:
    window = trace.get("window")
    const_cand = None
    note = "coefficient system infeasible over the derived ansatz"
    if eq.e1 != 1:
        cand = eq.e2 / (pres.one() - eq.e1)
        if not cand.is_constant():
            const_cand = repr(cand)
            if window is None or window.is_empty():
                note = "constant case: the forced candidate is not rational"
    elif window is None or window.is_empty():
        note = "torsor over empty window: sigma(x)-x is never a nonzero constant"
    return FreeRefutation(
        "twisted",
        repr(eq),
        window,
        trace.get("denominator_bound", "1"),
        trace.get("degree_cap", -1),
        trace.get("ansatz_size", 0),
        const_cand,
        note,
    )


def decide_multiplicative(pres: Presentation, eq: MultiplicativeEquation) -> SolveResult:
    _require_free(pres)
    basis, cert = multiplicative_kernel(pres, eq.ratio())
    if basis:
        x = basis[0]
        if not eq.holds_for(x):
            raise AssertionError("internal error: candidate failed verification")
        return Solution(x)
    return Unsolvable(cert)


def decide_free_base(pres: Presentation, eq) -> SolveResult:
    """Decision procedure over an all-free presentation (no search bounds)."""
    if isinstance(eq, TwistedEquation):
        return decide_twisted(pres, eq)
    if isinstance(eq, MultiplicativeEquation):
        return decide_multiplicative(pres, eq)
    raise TypeError(f"unsupported equation type {type(eq).__name__}")


def replay_refutation(pres: Presentation, eq, cert: FreeRefutation) -> bool:
    """Re-run the decision and compare the reproduced record."""
    again = decide_free_base(pres, eq)
    return isinstance(again, Unsolvable) and again.certificate == cert
