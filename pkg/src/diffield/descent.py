"""Descent from algebraic extensions to the ground difference field.

If an algebraic element solves a twisted equation, the coefficients of its
minimal polynomial already produce a solution downstairs: comparing the two
monic minimal polynomials of x and sigma(x) forces -c1/n to solve the same
twisted equation, and in the multiplicative case the first nonzero
coefficient c_k solves the equation with exponent scaled by k.  These
transformations justify working in generated (non-closed) difference
fields: realizability of the equation shapes in scope is unchanged by
algebraic closure.

The caller asserts that the input really is minimal-polynomial data; the
output is verified by substitution and a failed check reports the violated
hypothesis rather than a wrong witness.
"""

from __future__ import annotations

from typing import Sequence

from .field import Element


class DescentHypothesisViolated(ValueError):
    pass


def descent_linear(coefficients: Sequence[Element], e1: Element, e2: Element) -> Element:
    """Solution -c1/n of sigma(x) - e1*x = e2 from minimal-polynomial coefficients.

    ``coefficients`` lists c1..cn of the monic minimal polynomial
    X^n + c1 X^(n-1) + ... + cn of an algebraic solution.
    """
    if not coefficients:
        raise ValueError("empty coefficient list")
    n = len(coefficients)
    witness = -coefficients[0] / n
    if witness.sigma(1) - e1 * witness != e2:
        raise DescentHypothesisViolated(
            "descent hypothesis violated: -c1/n does not solve the twisted equation"
        )
    return witness


def descent_multiplicative(coefficients: Sequence[Element], e: Element, z: int) -> tuple[Element, int]:
    """First nonzero coefficient c_k solves sigma(x) = e^(z*k) * x.

    Returns (c_k, k) with k 1-based, verified by substitution.
    """
    if not coefficients or all(c.is_zero() for c in coefficients):
        raise ValueError("coefficient list has no nonzero entry")
    k, ck = next((i + 1, c) for i, c in enumerate(coefficients) if not c.is_zero())
    if ck.sigma(1) != e ** (z * k) * ck:
        raise DescentHypothesisViolated(
            "descent hypothesis violated: c_k does not solve the scaled equation"
        )
    return ck, k
