"""Exact polynomial arithmetic in one and two variables."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st
from pytest import approx, raises

from regtang import Poly1, Poly2

coeff_lists = st.lists(st.integers(min_value=-9, max_value=9), min_size=1, max_size=6)


def p1(coeffs):
    return Poly1([Fraction(c) for c in coeffs])


def test_eval_exact_matches_float_call():
    p = p1([1, -2, 0, 3])  # 1 - 2x + 3x^3
    assert p.eval_exact(Fraction(1, 2)) == Fraction(1) - 1 + Fraction(3, 8)
    assert p(0.5) == approx(float(p.eval_exact(Fraction(1, 2))))


def test_diff_and_integrate_roundtrip():
    p = p1([5, 0, -1, 2])
    q = p.diff().integrate()
    # integration constant is lost: q + p(0) == p
    assert q + Poly1([p.coeffs[0]]) == p


def test_monomial_degree_valuation():
    m = Poly1.monomial(4, Fraction(7))
    assert m.degree == 4
    assert m.valuation() == 4
    assert m.eval_exact(2) == 112
    assert p1([0, 0, 3, 1]).valuation() == 2
    assert Poly1([Fraction(0)]).is_zero()


def test_shift_is_composition():
    p = p1([1, 2, 3])
    s = p.shift(Fraction(1))  # x -> x + 1
    assert s.eval_exact(Fraction(0)) == p.eval_exact(Fraction(1))
    assert s.eval_exact(Fraction(-1)) == p.eval_exact(Fraction(0))


def test_shift_down_strips_low_monomials():
    p = Poly1.monomial(5, Fraction(3)) + Poly1.monomial(3, Fraction(1))
    q = p.shift_down(3)
    assert q.eval_exact(Fraction(2)) == 3 * 4 + 1


@settings(deadline=None, max_examples=40)
@given(coeff_lists, coeff_lists, st.integers(min_value=-5, max_value=5))
def test_product_rule(a, b, x0):
    pa, pb = p1(a), p1(b)
    lhs = (pa * pb).diff()
    rhs = pa.diff() * pb + pa * pb.diff()
    assert lhs.eval_exact(Fraction(x0)) == rhs.eval_exact(Fraction(x0))


@settings(deadline=None, max_examples=40)
@given(coeff_lists, coeff_lists, st.integers(min_value=-5, max_value=5))
def test_addition_is_pointwise(a, b, x0):
    pa, pb = p1(a), p1(b)
    assert (pa + pb).eval_exact(x0) == pa.eval_exact(x0) + pb.eval_exact(x0)
    assert (pa - pb).eval_exact(x0) == pa.eval_exact(x0) - pb.eval_exact(x0)


def test_poly2_constructors_and_eval():
    q = Poly2.x() * Poly2.x() + Poly2.const(Fraction(1, 2)) * Poly2.y()
    assert q.eval_exact(Fraction(2), Fraction(4)) == 6
    assert q(2.0, 4.0) == approx(6.0)


def test_poly2_partial_derivatives():
    # q = x^2 y + 3y^2
    q = Poly2.x().pow(2) * Poly2.y() + Poly2.const(3) * Poly2.y().pow(2)
    assert q.diff_x().eval_exact(2, 5) == 2 * 2 * 5
    assert q.diff_y().eval_exact(2, 5) == 4 + 30


def test_poly2_at_y0_and_lift():
    p = p1([1, 0, -2])
    q = Poly2.from_poly1_in_x(p)
    assert q.eval_exact(3, 99) == p.eval_exact(3)
    back = q.at_y0()
    assert back == p


def test_poly2_divide_out_y():
    q = Poly2.y() * (Poly2.x() + Poly2.const(2))
    r = q.divide_out_y()
    assert r.eval_exact(5, 0) == 7


def test_compiled_matches_exact_on_grid():
    q = Poly2.x().pow(3) - Poly2.y() * Poly2.x() + Poly2.const(Fraction(1, 4))
    fn = q.compiled()
    xs = np.linspace(-2, 2, 9)
    for x in xs:
        assert fn(x, 0.3) == approx(float(q.eval_exact(Fraction(x).limit_denominator(10**12), Fraction(3, 10))), rel=1e-12)
