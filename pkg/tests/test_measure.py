import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padicprob.clopen import Ball, ClopenSet, DepthSpace
from padicprob.errors import (BudgetExceeded, DomainError, NormNotOne,
                              PrimeClash, ScenarioParseError, SpaceMismatch)
from padicprob.measure import (LqWeight, Measure, StepFunction, density, haar,
                               integrate, lq_norm, measure_from_text,
                               measure_to_text, normalize_probability, product,
                               product_convergence_probe)
from padicprob.scalar import NormValue, ScalarKs

SPACE = DepthSpace(2, 2)

small_fracs = st.fractions(min_value=-9, max_value=9, max_denominator=9)


@st.composite
def measures(draw, space=SPACE, s=3):
    vals = {x: draw(small_fracs) for x in space.leaves()}
    return Measure(space, s, vals)


def clopen_of(space, leaves):
    return ClopenSet(space.prime, [space.leaf_ball(x) for x in leaves])


# -- evaluation and additivity ----------------------------------------------------


def test_evaluate_sums_leaves():
    mu = Measure(SPACE, 3, {0: 1, 1: Fraction(1, 2), 2: -2, 3: 0})
    A = ClopenSet.from_ball(Ball(2, 1, 0))  # leaves 0, 2
    assert mu.evaluate(A).as_fraction() == -1
    assert mu.total().as_fraction() == Fraction(-1, 2)


@given(measures())
def test_additivity_on_random_split(mu):
    A = clopen_of(SPACE, [0, 3])
    B = clopen_of(SPACE, [1])
    union = A.union(B)
    assert mu.evaluate(union) == mu.evaluate(A) + mu.evaluate(B)


@given(measures())
def test_norm_is_leaf_max_and_matches_bruteforce(mu):
    whole = SPACE.whole()
    assert mu.mu_norm(whole) == mu.mu_norm_bruteforce(whole)


def test_norm_dominates_evaluations():
    mu = Measure(SPACE, 3, {0: Fraction(1, 3), 1: 2, 2: 3, 3: 1})
    whole = SPACE.whole()
    assert mu.mu_norm(whole) == NormValue(3, 1)  # the 1/3 leaf
    assert not mu.total().norm() > mu.mu_norm(whole)


def test_single_atom_norm():
    # one atom of s-adic norm > 1 dominates everything
    mu = Measure(SPACE, 3, {0: Fraction(1, 3)})
    assert mu.mu_norm(SPACE.whole()) == NormValue(3, 1)
    assert mu.n_mu(0) == NormValue(3, 1)
    assert mu.n_mu(1) == NormValue.zero(3)


def test_pointwise_norm_sup_equals_total_norm():
    mu = Measure(SPACE, 3, {0: 1, 1: Fraction(5, 3), 2: 9, 3: 0})
    sup = max(mu.n_mu(x) for x in SPACE.leaves())
    assert sup == mu.mu_norm(SPACE.whole())


# -- haar -------------------------------------------------------------------------


def test_haar_is_uniform_and_translation_invariant():
    h = haar(SPACE, 3)
    assert h.total() == 1
    A = ClopenSet.from_ball(Ball(2, 1, 1))
    assert h.evaluate(A).as_fraction() == Fraction(1, 2)
    assert h.translate(3) == h


def test_haar_needs_distinct_primes():
    with pytest.raises(PrimeClash):
        haar(SPACE, 2)


# -- normalization -----------------------------------------------------------------


def test_normalize_probability():
    mu = Measure(SPACE, 3, {0: Fraction(1, 2), 1: 1, 2: 0, 3: 0})
    ext = normalize_probability(mu)
    assert ext.total() == 1
    assert ext.atom.as_fraction() == Fraction(-1, 2)


def test_normalize_requires_unit_norm():
    mu = Measure(SPACE, 3, {0: Fraction(1, 3)})
    with pytest.raises(NormNotOne):
        normalize_probability(mu)


# -- step functions and integration ---------------------------------------------


def test_step_function_partition_enforced():
    A = clopen_of(SPACE, [0, 1])
    with pytest.raises(DomainError):
        StepFunction(SPACE, 3, [(A, 1)])  # does not cover the space
    with pytest.raises(DomainError):
        StepFunction(SPACE, 3, [(A, 1), (A, 2), (A.complement_in(SPACE), 0)])


def test_integrate_indicator_gives_measure():
    mu = Measure(SPACE, 3, {0: 1, 1: 2, 2: 3, 3: 4})
    A = clopen_of(SPACE, [1, 2])
    f = StepFunction.indicator(SPACE, 3, A)
    assert integrate(f, mu) == mu.evaluate(A)


def test_density():
    mu = haar(SPACE, 3)
    f = StepFunction.from_leaves(SPACE, 3, {0: 2, 1: 0, 2: 2, 3: 0})
    nu = density(f, mu)
    assert nu.total().as_fraction() == 1
    assert nu.leaf_values[1].is_exact_zero


# -- products -----------------------------------------------------------------------


def test_product_totals_and_rectangles():
    m1 = Measure(DepthSpace(2, 1), 5, {0: 1, 1: 2})
    m2 = Measure(DepthSpace(3, 1), 5, {0: Fraction(1, 5), 1: 0, 2: 1})
    prod = product([m1, m2])
    assert prod.total() == m1.total() * m2.total()
    r1 = ClopenSet.from_ball(Ball(2, 1, 1))
    r2 = ClopenSet.from_ball(Ball(3, 1, 0))
    assert prod.evaluate_rectangle([r1, r2]) == m1.evaluate(r1) * m2.evaluate(r2)
    assert prod.mu_norm_rectangle([r1, r2]) == m1.mu_norm(r1) * m2.mu_norm(r2)


def test_product_marginal():
    m1 = Measure(DepthSpace(2, 1), 5, {0: 1, 1: 3})
    m2 = Measure(DepthSpace(2, 1), 5, {0: Fraction(1, 2), 1: Fraction(1, 2)})
    prod = product([m1, m2])
    assert prod.marginal([0]).as_measure() == m1.scale(m2.total())


def test_product_budget():
    big = haar(DepthSpace(2, 4), 3)
    with pytest.raises(BudgetExceeded):
        product([big] * 6, budget=10 ** 6)


def test_product_prime_clash():
    with pytest.raises(PrimeClash):
        product([haar(SPACE, 3), haar(SPACE, 5)])


# -- convergence probe ---------------------------------------------------------------


def test_probe_flags_cauchy_sequence():
    # totals 1 + 3^j: partial-product differences gain valuation each step
    totals = [ScalarKs.exact(1 + Fraction(3) ** j, 3) for j in range(1, 13)]
    verdict = product_convergence_probe(totals, horizon=12)
    assert verdict.is_cauchy


def test_probe_flags_stalling_sequence():
    # a constant total of norm 1 but != 1 keeps differences at fixed valuation
    totals = [ScalarKs.exact(2, 3)] * 12
    verdict = product_convergence_probe(totals, horizon=12)
    assert not verdict.is_cauchy


# -- L^q norms -----------------------------------------------------------------------


def test_lq_norm_finite_q():
    eta = Measure(SPACE, 3, {0: 9, 1: 1, 2: 0, 3: 1})
    f = StepFunction.from_leaves(SPACE, 3, {0: 1, 1: 3, 2: 7, 3: 0})
    # leaf 0: |1| * |9|^(1/2) = 3^(-1); leaf 1: |3| * 1 = 3^(-1); leaf 2: weight 0
    assert lq_norm(f, LqWeight(eta, 2)) == NormValue(3, -1)


def test_lq_norm_infinite_q():
    eta = Measure(SPACE, 3, {0: Fraction(1, 3), 1: 1, 2: 0, 3: 3})
    f = StepFunction.constant(SPACE, 3, 1)
    # sup over q of N^(1/q): N>1 contributes N itself, 0<N<1 contributes 1
    assert lq_norm(f, LqWeight(eta, math.inf)) == NormValue(3, 1)


def test_lq_weight_validation():
    with pytest.raises(DomainError):
        LqWeight(haar(SPACE, 3), Fraction(1, 2))


# -- serialization --------------------------------------------------------------------


def test_measure_text_roundtrip():
    mu = Measure(SPACE, 3, {0: Fraction(-7, 5), 1: 2, 2: 0, 3: Fraction(1, 9)})
    text = measure_to_text(mu)
    assert "prime_p = 2" in text and "leaf 0 = -7/5" in text
    assert measure_from_text(text) == mu


def test_measure_text_rejects_floats_and_junk():
    good = measure_to_text(haar(SPACE, 3))
    with pytest.raises(ScenarioParseError):
        measure_from_text(good.replace("1/4", "0.25"))
    with pytest.raises(ScenarioParseError):
        measure_from_text("format = padicprob-measure/1\nbogus line\n")
    with pytest.raises(ScenarioParseError):
        measure_from_text("format = something-else/9\n")


# -- guards -----------------------------------------------------------------------


def test_space_guards():
    mu = haar(SPACE, 3)
    other = ClopenSet.from_ball(Ball(3, 0, 0))
    with pytest.raises(SpaceMismatch):
        mu.evaluate(other)
    f = StepFunction.constant(DepthSpace(2, 1), 3, 1)
    with pytest.raises(SpaceMismatch):
        integrate(f, mu)
