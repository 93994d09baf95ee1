import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicprob.clopen import Ball, ClopenSet, DepthSpace
from padicprob.errors import (BudgetExceeded, NotSubTuple, PairsOverlap,
                              PrimeClash, TimesNotDistinct, WitnessNotFound)
from padicprob.markov import (CylinderMeasure, HomogeneousKernel,
                              TransitionKernel, boundedness_criterion,
                              build_cylinder, chapman_check, char_functional,
                              convolution_step, functional_integral,
                              functional_integral_chain,
                              increment_independence, projection_consistency,
                              psi_factorization_check, unbounded_witness)
from padicprob.measure import Measure, ProductMeasure, haar
from padicprob.scalar import CyclotomicScalar, NormValue, ScalarKs

SPACE = DepthSpace(2, 2)
TIMES = tuple(range(6))

small_fracs = st.fractions(min_value=-9, max_value=9, max_denominator=9)


@st.composite
def measures(draw, space=SPACE, s=3):
    return Measure(space, s, {x: draw(small_fracs) for x in space.leaves()})


def probability(space, s, vals):
    vals = dict(vals)
    last = space.leaf_count - 1
    vals[last] = 1 - sum(Fraction(v) for x, v in vals.items() if x != last)
    return Measure(space, s, vals)


# -- convolution -----------------------------------------------------------------


@given(measures())
def test_point_mass_is_identity(mu):
    delta = Measure.point_mass(SPACE, 3, 0)
    assert convolution_step(mu, delta) == mu
    assert convolution_step(delta, mu) == mu


@given(measures(), measures())
def test_convolution_commutes(a, b):
    assert convolution_step(a, b) == convolution_step(b, a)


@given(measures())
def test_haar_absorbs_probability(mu):
    h = haar(SPACE, 3)
    out = convolution_step(h, mu)
    total = mu.total()
    expected = h.scale(total)
    assert out == expected


@given(measures(), measures(), measures())
@settings(max_examples=25)
def test_convolution_associative(a, b, c):
    lhs = convolution_step(convolution_step(a, b), c)
    rhs = convolution_step(a, convolution_step(b, c))
    assert lhs == rhs


def test_convolution_space_guard():
    with pytest.raises(Exception):
        convolution_step(haar(SPACE, 3), haar(DepthSpace(2, 1), 3))


# -- chapman -------------------------------------------------------------------


def test_chapman_passes_for_semigroup():
    step = Measure(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 3), 2: 1, 3: -2})
    k = TransitionKernel.from_step(step, TIMES)
    for triple in ((0, 1, 2), (0, 2, 5), (1, 3, 4)):
        assert chapman_check(k, *triple).ok


def test_chapman_detects_perturbation():
    step = probability(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: 0})
    k = TransitionKernel.from_step(step, TIMES)
    bad = k.perturb(0, 0, 2, leaf=1, delta=Fraction(1, 9))
    v = chapman_check(bad, 0, 1, 2)
    assert not v.ok
    assert v.worst_valuation == -2  # the injected 1/9 shows up directly
    assert "x1=0" in v.detail


def test_chapman_single_point_space():
    space = DepthSpace(2, 1)
    one_leaf = Measure(space, 3, {0: 1, 1: 0})
    k = TransitionKernel.from_step(one_leaf, TIMES)
    assert chapman_check(k, 0, 1, 2).ok


def test_chapman_requires_distinct_times():
    k = TransitionKernel.from_step(haar(SPACE, 3), TIMES)
    with pytest.raises(TimesNotDistinct):
        chapman_check(k, 0, 0, 1)


# -- cylinders -----------------------------------------------------------------


def test_one_step_cylinder_is_the_slice():
    step = probability(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: 0})
    k = TransitionKernel.from_step(step, TIMES)
    cyl = build_cylinder(k, 2, (0, 1))
    expected = k.slice(0, 2, 1)
    assert cyl.joint.as_measure() == expected


def test_cylinder_total_mass_for_normalized_kernel():
    step = probability(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: 0})
    k = TransitionKernel.from_step(step, TIMES)
    cyl = build_cylinder(k, 0, (0, 1, 2, 3))
    assert cyl.total() == 1


def test_cylinder_budget():
    k = TransitionKernel.from_step(haar(DepthSpace(2, 3), 5), TIMES)
    with pytest.raises(BudgetExceeded):
        build_cylinder(k, 0, TIMES, budget=100)


def test_cylinder_times_validation():
    k = TransitionKernel.from_step(haar(SPACE, 3), TIMES)
    with pytest.raises(TimesNotDistinct):
        build_cylinder(k, 0, (0, 1, 1))


def test_projection_consistency_and_guards():
    step = Measure(SPACE, 3, {0: Fraction(1, 2), 1: 2, 2: -1, 3: Fraction(1, 6)})
    k = TransitionKernel.from_step(step, TIMES)
    cyl = build_cylinder(k, 1, (0, 1, 2, 3))
    assert projection_consistency(k, cyl, (0, 1, 2, 3)).ok  # identity
    assert projection_consistency(k, cyl, (0, 1, 3)).ok     # drop interior
    assert projection_consistency(k, cyl, (0, 2, 3)).ok
    # dropping the final time needs a normalized kernel (slice totals = 1)
    norm_step = probability(SPACE, 3, {0: Fraction(1, 2), 1: 2, 2: -1})
    kn = TransitionKernel.from_step(norm_step, TIMES)
    cyl_n = build_cylinder(kn, 1, (0, 1, 2, 3))
    assert projection_consistency(kn, cyl_n, (0, 1, 2)).ok
    with pytest.raises(NotSubTuple):
        projection_consistency(k, cyl, (1, 2, 3))  # missing the anchor time
    with pytest.raises(NotSubTuple):
        projection_consistency(k, cyl, (0, 4))


# -- boundedness ----------------------------------------------------------------


def test_probability_kernel_has_zero_cq():
    step = haar(SPACE, 3)
    k = TransitionKernel.from_step(step, TIMES)
    rep = boundedness_criterion(k, 0, (0, 1, 2))
    assert rep.ok
    assert rep.c_q == pytest.approx(0.0)
    assert rep.bound_norm == NormValue.one(3)


def test_norm_s_slice_raises_cq():
    step = Measure(SPACE, 3, {0: Fraction(1, 3), 1: 1, 2: 0, 3: 0})
    k = TransitionKernel.from_step(step, TIMES)
    rep = boundedness_criterion(k, 0, (0, 1))
    assert rep.ok
    assert rep.c_q == pytest.approx(math.log(3))


def test_unbounded_witness_found():
    step = Measure(SPACE, 3, {0: Fraction(1, 3), 1: 1, 2: 1, 3: 1})
    k = TransitionKernel.from_step(step, list(range(25)))
    w = unbounded_witness(k, 0, 1000)
    assert float(w.norm) > 1000
    assert w.length == 7  # 3^7 = 2187 is the first power past 1000
    assert len(w.chain) == w.length + 1


def test_unbounded_witness_not_found_for_probability():
    k = TransitionKernel.from_step(haar(SPACE, 3), list(range(12)))
    with pytest.raises(WitnessNotFound):
        unbounded_witness(k, 0, 1000)


def test_witness_trivial_below_one():
    k = TransitionKernel.from_step(haar(SPACE, 3), list(range(12)))
    w = unbounded_witness(k, 0, Fraction(1, 2))
    assert w.length == 1  # norm 1 already exceeds 1/2


# -- functional integrals ---------------------------------------------------------


def test_functional_integral_of_one_is_total_mass():
    step = Measure(SPACE, 3, {0: 1, 1: Fraction(1, 2), 2: 2, 3: 0})
    k = TransitionKernel.from_step(step, TIMES)
    q = (0, 1, 2)
    cyl = build_cylinder(k, 0, q)
    val = functional_integral(lambda key: 1, k, 0, q)
    assert val == cyl.total()


def test_functional_integral_indicator_is_rectangle_mass():
    step = probability(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: 0})
    k = TransitionKernel.from_step(step, TIMES)
    q = (0, 1, 2)
    A = ClopenSet.from_ball(Ball(2, 1, 0))
    B = ClopenSet.from_ball(Ball(2, 2, 1))
    cyl = build_cylinder(k, 0, q)

    def f(key):
        return int(A.contains_leaf(key[0], SPACE) and B.contains_leaf(key[1], SPACE))

    assert functional_integral(f, k, 0, q) == cyl.joint.evaluate_rectangle([A, B])


def test_functional_integral_chain_reports_sequence():
    k = TransitionKernel.from_step(haar(SPACE, 3), TIMES)
    vals = functional_integral_chain(lambda key: 1, k, 0, [(0, 1), (0, 1, 2)])
    assert all(v == 1 for v in vals)


def test_last_coordinate_function_matches_marginal():
    step = Measure(SPACE, 3, {0: 1, 1: 2, 2: Fraction(1, 2), 3: -1})
    k = TransitionKernel.from_step(step, TIMES)
    q = (0, 1, 2)
    cyl = build_cylinder(k, 0, q)
    weights = {0: 1, 1: 5, 2: 0, 3: Fraction(2, 3)}
    val = functional_integral(lambda key: weights[key[-1]], k, 0, q)
    marg = cyl.joint.marginal([cyl.joint.arity - 1])
    expected = ScalarKs.exact(0, 3)
    for (x,), w in marg.values.items():
        expected = expected + w * ScalarKs.exact(weights[x], 3)
    assert val == expected


# -- characteristic functionals -----------------------------------------------------


def test_char_functional_at_zero_is_total():
    mu = Measure(SPACE, 5, {0: 1, 1: Fraction(1, 2), 2: 0, 3: 2})
    phi = char_functional(mu, 0)
    assert phi == CyclotomicScalar.from_scalar(mu.total(), 2, 2)


def test_char_functional_of_point_mass_is_root_of_unity():
    mu = Measure(SPACE, 5, {1: 1})
    phi = char_functional(mu, 1)
    # leaf 1 maps to 1/4, so the value is zeta_4
    assert phi == CyclotomicScalar.from_monomial(2, 2, 5, 1)


def test_char_functional_haar_vanishes():
    assert char_functional(haar(DepthSpace(2, 3), 5), 1).is_zero
    assert char_functional(haar(DepthSpace(3, 2), 5), 2).is_zero


def test_char_functional_prime_clash():
    with pytest.raises(PrimeClash):
        char_functional(Measure(SPACE, 2, {0: 1}), 1)


def test_psi_factorization_and_semigroup():
    step = probability(SPACE, 5, {0: Fraction(1, 2), 1: Fraction(1, 3), 2: 0})
    h = HomogeneousKernel(step)
    for gamma in (0, 1, 2, 3):
        assert psi_factorization_check(h, gamma, 0, 2, x1=3).ok
    assert h.semigroup_check(2, 3).ok


# -- increment independence -----------------------------------------------------------


def test_increments_factorize_for_semigroup():
    step = probability(SPACE, 3, {0: Fraction(1, 2), 1: Fraction(1, 4), 2: 0})
    k = TransitionKernel.from_step(step, TIMES)
    cyl = build_cylinder(k, 0, (0, 1, 2, 3))
    assert increment_independence(cyl, (0, 1), (1, 2)).ok
    assert increment_independence(cyl, (0, 2), (2, 3)).ok
    assert increment_independence(cyl, (0, 1), (2, 3)).ok


def test_coupled_joint_fails():
    space = DepthSpace(2, 1)
    half = ScalarKs.exact(Fraction(1, 2), 3)
    joint = ProductMeasure([space, space], 3, {(0, 0): half, (1, 0): half})
    cyl = CylinderMeasure((0, 1, 2), 0, joint)
    v = increment_independence(cyl, (0, 1), (1, 2))
    assert not v.ok


def test_overlapping_pairs_rejected():
    k = TransitionKernel.from_step(haar(SPACE, 3), TIMES)
    cyl = build_cylinder(k, 0, (0, 1, 2, 3))
    with pytest.raises(PairsOverlap):
        increment_independence(cyl, (0, 2), (1, 3))
    with pytest.raises(PairsOverlap):
        increment_independence(cyl, (0, 1), (0, 1))
