"""Presentations and the sigma action: rules, inverses, homomorphism laws."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffield.field import Presentation, PresentationError
from diffield.poly import MPoly, VarId
from diffield.ratfunc import RatFunc


def twisted_pair_presentation():
    p, g = Presentation.empty().with_free("g")
    p, a1 = p.with_affine("a1", g, g)
    return p, g, a1


def test_validate_ok():
    p, _ = Presentation.empty().with_free("g")
    assert p.diagnostics() == []


def test_validate_zero_linear_part():
    p = Presentation.empty()
    with pytest.raises(PresentationError, match="linear part zero"):
        p.with_affine("a", 0, 1)


def test_validate_stratification():
    p, g = Presentation.empty().with_free("g")
    # a rule may not mention a generator declared later
    later = RatFunc.var(VarId(5, "b"))
    with pytest.raises(PresentationError, match="strictly earlier|not in this"):
        p.with_affine("a", later, 1)


def test_sigma_free_shift():
    p, g = Presentation.empty().with_free("g")
    assert g.sigma(1) == p.gen("g", 1)
    assert g.sigma(-2) == p.gen("g", -2)


def test_sigma_affine_rule():
    p, g, a1 = twisted_pair_presentation()
    # sigma(a1) = g*a1 + g
    assert a1.sigma(1) == g * a1 + g


def test_sigma_inverse_affine():
    p, g, a1 = twisted_pair_presentation()
    gm1 = p.gen("g", -1)
    assert a1.sigma(-1) == a1 / gm1 - 1
    assert a1.sigma(-1).sigma(1) == a1


def test_wp_examples():
    p, g, a1 = twisted_pair_presentation()
    assert p.const(Fraction(7, 3)).wp().is_zero()
    assert a1.wp() == (g - 1) * a1 + g


def test_wp_of_twisted_product():
    # sigma(a1) = g a1 + g, sigma(a2) = (1/g) a2 + (1/g): wp(a1*a2) = a1+a2+1
    p, g = Presentation.empty().with_free("g")
    p, a1 = p.with_affine("a1", g, g)
    p, a2 = p.with_affine("a2", g.in_presentation(p).value.inv(), g.value.inv())
    a1 = a1.in_presentation(p)
    prod = a1 * a2
    assert prod.wp() == a1 + a2 + 1


def test_is_fixed():
    p, g, a1 = twisted_pair_presentation()
    assert p.const(Fraction(7, 3)).is_fixed()
    assert not g.is_fixed()


def _random_element(p, rng, names, max_shift=1):
    def rand_poly():
        poly = MPoly.const(rng.randint(-3, 3))
        for _ in range(rng.randint(1, 3)):
            mono = MPoly.const(Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
            for _ in range(rng.randint(0, 2)):
                name = rng.choice(names)
                shift = rng.randint(-max_shift, max_shift) if p.spec(name).is_free else 0
                mono = mono * MPoly.var(p.varid(name, shift))
            poly = poly + mono
        return poly

    num = rand_poly()
    den = MPoly()
    while den.is_zero():
        den = rand_poly()
    return p.element(RatFunc(num, den))


def _laws_presentation():
    p, g = Presentation.empty().with_free("g")
    p, t = p.with_affine("t", 1, 1)
    p, a = p.with_affine("a", g.in_presentation(p), g.in_presentation(p))
    return p


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_sigma_is_ring_homomorphism(seed):
    p = _laws_presentation()
    rng = random.Random(seed)
    x = _random_element(p, rng, list(p.names()))
    y = _random_element(p, rng, list(p.names()))
    assert (x * y).sigma(1) == x.sigma(1) * y.sigma(1)
    assert (x + y).sigma(1) == x.sigma(1) + y.sigma(1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_sigma_inverse_roundtrip(seed, k):
    p = _laws_presentation()
    rng = random.Random(seed)
    x = _random_element(p, rng, list(p.names()))
    assert x.sigma(k).sigma(-k) == x


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_wp_zero_iff_fixed(seed):
    p = _laws_presentation()
    rng = random.Random(seed)
    x = _random_element(p, rng, list(p.names()))
    assert x.wp().is_zero() == x.is_fixed()
    q = p.const(Fraction(rng.randint(-5, 5), rng.randint(1, 5)))
    assert q.wp().is_zero() and q.is_fixed()


def test_restriction_preserves_indices():
    p, g, a1 = twisted_pair_presentation()
    sub = p.restrict(["g"])
    assert sub.gen("g", 2).value == p.gen("g", 2).value
    # element of the sub-presentation combines with ambient elements
    assert (sub.gen("g") + a1) == (g + a1)


def test_affine_shift_materialization_rejected():
    p, g, a1 = twisted_pair_presentation()
    with pytest.raises(PresentationError):
        p.gen("a1", 1)
