import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padicprob.errors import DomainError, OrderMismatch, RadiusViolation
from padicprob.scalar import (CyclotomicScalar, NormValue, RootOfUnityExponent,
                              ScalarKs, character, cyclo_embed, exp_s,
                              factorial_valuation, frac_part, ord_q)

rationals = st.fractions(min_value=-10 ** 6, max_value=10 ** 6,
                         max_denominator=10 ** 4)
small_primes = st.sampled_from([2, 3, 5, 7])


# -- valuations ------------------------------------------------------------


def test_ord_q_values():
    assert ord_q(Fraction(7, 25), 5) == -2
    assert ord_q(12, 2) == 2
    assert ord_q(12, 3) == 1
    assert ord_q(Fraction(9, 2), 3) == 2
    assert ord_q(0, 3) == math.inf


def test_ord_q_rejects_composite():
    with pytest.raises(DomainError):
        ord_q(1, 6)


@given(rationals, rationals, small_primes)
def test_ord_ultrametric(a, b, p):
    # ord(a+b) >= min(ord a, ord b), with equality when the orders differ
    va, vb, vs = ord_q(a, p), ord_q(b, p), ord_q(a + b, p)
    assert vs >= min(va, vb)
    if va != vb:
        assert vs == min(va, vb)


def test_frac_part_values():
    assert frac_part(Fraction(7, 4), 2) == Fraction(3, 4)
    assert frac_part(Fraction(5, 6), 2) == Fraction(1, 2)
    assert frac_part(Fraction(5, 6), 3) == Fraction(1, 3)
    assert frac_part(10, 5) == 0
    assert frac_part(Fraction(1, 3), 2) == 0


@given(rationals, small_primes)
def test_frac_part_is_integral_shift(y, p):
    r = frac_part(y, p)
    assert 0 <= r < 1
    assert ord_q(y - r, p) >= 0 if y != r else True


def test_factorial_valuation():
    assert factorial_valuation(10, 2) == 8
    assert factorial_valuation(10, 3) == 4
    assert factorial_valuation(100, 5) == 24
    assert factorial_valuation(0, 3) == 0


@given(st.integers(min_value=1, max_value=300), small_primes)
def test_factorial_bound(n, s):
    assert Fraction(factorial_valuation(n, s)) <= Fraction(n - 1, s - 1)


# -- NormValue ---------------------------------------------------------------


def test_norm_value_ordering_and_product():
    z = NormValue.zero(3)
    one = NormValue.one(3)
    big = NormValue(3, 2)
    assert z < one < big
    assert big * z == z
    assert one * big == big
    assert big.root(2) == NormValue(3, 1)
    assert float(NormValue(3, -1)) == pytest.approx(1 / 3)


# -- ScalarKs ------------------------------------------------------------------


@given(rationals, rationals, small_primes)
def test_exact_ring_ops(a, b, s):
    x, y = ScalarKs.exact(a, s), ScalarKs.exact(b, s)
    assert (x + y).as_fraction() == a + b
    assert (x * y).as_fraction() == a * b
    assert (x - y).as_fraction() == a - b
    if b != 0:
        assert (x / y).as_fraction() == a / b


@given(rationals, small_primes, st.integers(min_value=1, max_value=40))
def test_truncation_agrees_with_exact(a, s, prec):
    x = ScalarKs.exact(a, s)
    t = x.truncate(prec)
    assert t.agrees_to(x, t.abs_precision())


@given(rationals, rationals, small_primes)
def test_mixed_arithmetic_tracks_exact(a, b, s):
    xa, xb = ScalarKs.exact(a, s), ScalarKs.exact(b, s)
    ta = xa.truncate(20)
    # sums carry absolute precision, products relative precision
    assert (ta + xb).agrees_to(xa + xb, min(ta.abs_precision(), 10))
    if a != 0 and b != 0:
        assert (ta * xb).agrees_to(xa * xb, ord_q(a * b, s) + 10)
    else:
        assert (ta * xb) == 0


def test_zero_marker_semantics():
    z = ScalarKs.zero_to_precision(3, 5)
    assert z.is_zero_marker
    assert z.ord() == 5
    assert z == ScalarKs.exact(0, 3)
    assert z == ScalarKs.exact(Fraction(3 ** 7), 3)  # below the resolution
    assert not z == ScalarKs.exact(1, 3)
    with pytest.raises(DomainError):
        z.norm()
    # marker absorbs additively at its own precision
    y = ScalarKs.exact(1, 3) + z
    assert y.agrees_to(1, 5)


def test_marker_propagates_through_product():
    z = ScalarKs.zero_to_precision(3, 5)
    w = z * ScalarKs.exact(9, 3)
    assert w.is_zero_marker and w.ord() == 7


def test_truncated_repr_and_digits():
    t = ScalarKs.truncated(Fraction(1, 2), 3, precision=4)
    # 1/2 = 2 + 3 + 3^2 + 3^3 + ... in Z_3
    assert t.digits() == [2, 1, 1, 1]
    assert t.ord() == 0


def test_division_by_marker_rejected():
    with pytest.raises(DomainError):
        ScalarKs.exact(1, 3) / ScalarKs.zero_to_precision(3, 5)


def test_truncated_unhashable():
    with pytest.raises(TypeError):
        hash(ScalarKs.truncated(5, 3))


def test_mixed_primes_rejected():
    with pytest.raises(DomainError):
        ScalarKs.exact(1, 3) + ScalarKs.exact(1, 5)


# -- exponential ----------------------------------------------------------------


@given(st.sampled_from([3, 5, 7]), st.integers(min_value=1, max_value=3),
       st.integers(min_value=1, max_value=50))
def test_exp_is_a_unit(s, k, n):
    x = ScalarKs.exact(Fraction(n) * s ** k, s)
    e = exp_s(x)
    assert e.ord() == 0
    assert (e - 1).ord() >= 1


def test_exp_values_match_series_tail():
    # Exp(3) at s=3, checked against a long partial sum in exact arithmetic
    s, prec = 3, 24
    e = exp_s(ScalarKs.exact(3, s), precision=prec)
    partial = Fraction(0)
    for n in range(0, 60):
        partial += Fraction(3 ** n, math.factorial(n))
    assert e.agrees_to(ScalarKs.exact(partial, s), prec)


def test_exp_functional_equation():
    s = 5
    x = ScalarKs.exact(Fraction(5, 2), s)
    y = ScalarKs.exact(Fraction(25, 3), s)
    lhs = exp_s(x + y)
    rhs = exp_s(x) * exp_s(y)
    assert lhs.agrees_to(rhs, 28)


def test_exp_radius():
    with pytest.raises(RadiusViolation):
        exp_s(ScalarKs.exact(1, 3))
    with pytest.raises(RadiusViolation):
        exp_s(ScalarKs.exact(2, 2))  # ord 1 < 2 needed at s = 2
    # ord 2 is fine at s = 2
    assert exp_s(ScalarKs.exact(4, 2)).ord() == 0


def test_exp_of_zero():
    assert exp_s(ScalarKs.exact(0, 7)) == 1


# -- characters and cyclotomics ---------------------------------------------------


def test_character_exponents():
    assert character(Fraction(7, 4), 2).exponent == Fraction(3, 4)
    assert character(5, 3).exponent == 0
    c = character(Fraction(3, 4), 2) + character(Fraction(1, 2), 2)
    assert c.exponent == Fraction(1, 4)


def test_character_order():
    assert character(Fraction(1, 8), 2).order_exponent == 3
    assert character(1, 2).order_exponent == 0


def test_character_prime_mismatch():
    with pytest.raises(OrderMismatch):
        character(Fraction(1, 2), 2) + character(Fraction(1, 3), 3)


def test_root_of_unity_denominator_check():
    with pytest.raises(DomainError):
        RootOfUnityExponent(2, Fraction(1, 6))


def test_zeta4_squared_is_minus_one():
    z = CyclotomicScalar.from_monomial(2, 2, 5, 1)
    sq = z * z
    minus_one = CyclotomicScalar.from_scalar(ScalarKs.exact(-1, 5), 2, 2)
    assert sq == minus_one


def test_full_root_sum_vanishes():
    # 1 + zeta + ... + zeta^(p^k - 1) = 0
    for p, k, s in ((2, 3, 5), (3, 2, 5), (5, 1, 3)):
        total = CyclotomicScalar.zero(p, k, s)
        for m in range(p ** k):
            total = total + CyclotomicScalar.from_monomial(p, k, s, m)
        assert total.is_zero


def test_cyclo_embed_multiplicativity():
    p, k, s = 3, 2, 7
    a = RootOfUnityExponent(p, Fraction(2, 9))
    b = RootOfUnityExponent(p, Fraction(5, 9))
    lhs = cyclo_embed(a + b, p, k, s)
    rhs = cyclo_embed(a, p, k, s) * cyclo_embed(b, p, k, s)
    assert lhs == rhs


def test_cyclo_embed_order_too_big():
    with pytest.raises(OrderMismatch):
        cyclo_embed(RootOfUnityExponent(2, Fraction(1, 16)), 2, 3, 5)
