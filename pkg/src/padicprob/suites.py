"""The verification batteries behind `suite {measure,markov,poisson,all}`.

Each criterion is a standalone function returning a CriterionResult; the
CLI and the acceptance tests both run these, so a green suite and a green
test run certify the same thing.  All randomness flows through one seeded
Random instance, making reports reproducible.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from .clopen import Ball, ClopenSet, DepthSpace
from .errors import UnknownSuite, WitnessNotFound
from .markov import (CylinderMeasure, HomogeneousKernel, TransitionKernel,
                     boundedness_criterion, build_cylinder, chapman_check,
                     char_functional, increment_independence,
                     projection_consistency, psi_factorization_check,
                     unbounded_witness)
from .measure import Measure, ProductMeasure, haar, product
from .poisson import (Configuration, PoissonMeasureTruncated, config_distance,
                      levy_psi, levy_semigroup_check, moment_coefficients,
                      poisson_consistency, poisson_event_check, tuple_distance)
from .scalar import (NormValue, ScalarKs, exp_admissible_ord, exp_s,
                     factorial_valuation)

#: deviation valuations must clear precision minus this guard
GUARD = 4


@dataclass
class CriterionResult:
    cid: int
    name: str
    ok: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        return "criterion %2d %-28s %s  (%.2fs)%s" % (
            self.cid, self.name, "pass" if self.ok else "FAIL", self.elapsed,
            "" if self.ok or not self.detail else "  [" + self.detail + "]")


def _random_fraction(rng: random.Random, s: int = None) -> Fraction:
    num = rng.randint(-9, 9)
    den = rng.randint(1, 9)
    if s is not None:
        while den % s == 0:
            den = rng.randint(1, 9)
    return Fraction(num, den)


def _random_measure(rng: random.Random, space: DepthSpace, s: int) -> Measure:
    return Measure(space, s,
                   {x: _random_fraction(rng) for x in space.leaves()})


def _random_probability(rng: random.Random, space: DepthSpace, s: int) -> Measure:
    """Total mass exactly 1; norm-1 not enforced (not needed by callers)."""
    vals = {x: _random_fraction(rng, s) for x in space.leaves()}
    last = space.leaf_count - 1
    vals[last] = 1 - sum(v for x, v in vals.items() if x != last)
    return Measure(space, s, vals)


def _random_clopen(rng: random.Random, space: DepthSpace) -> ClopenSet:
    balls = [space.leaf_ball(x) for x in space.leaves() if rng.random() < 0.5]
    return ClopenSet(space.prime, balls)


# -- criterion 1: measure axioms ------------------------------------------------


def criterion_1(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    combos = [(2, 3), (2, 5), (2, 7), (3, 5), (3, 7), (5, 3), (5, 7)]
    max_depth = {2: 4, 3: 3, 5: 2}
    brute_leaf_cap = 9  # 2^9 subset sums keep the sweep inside the budget
    failures = []
    for i in range(100):
        p, s = combos[i % len(combos)]
        depth = rng.randint(1, max_depth[p])
        space = DepthSpace(p, depth)
        mu = _random_measure(rng, space, s)
        a_set = _random_clopen(rng, space)
        b_set = _random_clopen(rng, space).intersect(a_set.complement_in(space))
        union = a_set.union(b_set)
        if not mu.evaluate(union) == mu.evaluate(a_set) + mu.evaluate(b_set):
            failures.append("additivity at #%d" % i)
        na, nb = mu.mu_norm(a_set), mu.mu_norm(b_set)
        if mu.mu_norm(union) != (na if na >= nb else nb):
            failures.append("disjoint-union norm at #%d" % i)
        if space.leaf_count <= brute_leaf_cap:
            whole = space.whole()
            if mu.mu_norm(whole) != mu.mu_norm_bruteforce(whole):
                failures.append("brute-force norm at #%d" % i)
    ok = not failures
    return CriterionResult(1, "measure-axioms", ok,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_2(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    for i in range(30):
        p, s = [(2, 3), (3, 5), (5, 7)][i % 3]
        space = DepthSpace(p, rng.randint(1, 2))
        mu = _random_measure(rng, space, s)
        sup = NormValue.zero(s)
        for x in space.leaves():
            n = mu.n_mu(x)
            if n > sup:
                sup = n
        if sup != mu.mu_norm(space.whole()):
            failures.append("#%d" % i)
    return CriterionResult(2, "pointwise-norm-identity", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_3(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    spaces = [DepthSpace(2, 2), DepthSpace(3, 1), DepthSpace(2, 1)]
    s = 5
    for i in range(10):
        factors = [_random_measure(rng, sp, s) for sp in spaces]
        prod = product(factors)
        total = ScalarKs.exact(1, s)
        for m in factors:
            total = total * m.total()
        if not prod.total() == total:
            failures.append("total at #%d" % i)
        for j in range(10):
            rect = [_random_clopen(rng, sp) for sp in spaces]
            lhs = prod.mu_norm_rectangle(rect)
            rhs = NormValue.one(s)
            for m, a_set in zip(factors, rect):
                rhs = rhs * m.mu_norm(a_set)
            if lhs != rhs:
                failures.append("rectangle #%d.%d" % (i, j))
    return CriterionResult(3, "product-multiplicativity", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


# -- criterion 4: Chapman–Kolmogorov --------------------------------------------


def criterion_4(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    times = list(range(6))
    triples = [(a, b, c) for a in times for b in times for c in times
               if a < b < c]
    failures = []
    setups = [(2, 3)] * 14 + [(3, 5)] * 6
    for i, (p, s) in enumerate(setups):
        space = DepthSpace(p, 3)
        kernel = TransitionKernel.from_step(_random_measure(rng, space, s), times)
        for t1, z, t2 in triples:
            v = chapman_check(kernel, t1, z, t2)
            if not v.ok:
                failures.append("kernel #%d triple %r" % (i, (t1, z, t2)))
                break
    # a deliberately broken kernel must be caught
    space = DepthSpace(2, 3)
    good = TransitionKernel.from_step(_random_measure(rng, space, 3), times)
    bad = good.perturb(0, 0, 2, leaf=0, delta=1)
    if chapman_check(bad, 0, 1, 2).ok:
        failures.append("perturbed kernel not detected")
    return CriterionResult(4, "chapman-kolmogorov", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_5(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    q = (0, 1, 2, 3)
    for i in range(20):
        p, s = [(2, 3), (2, 5), (3, 5)][i % 3]
        space = DepthSpace(p, 2 if p == 2 else 1)
        kernel = TransitionKernel.from_step(_random_measure(rng, space, s), q)
        cyl = build_cylinder(kernel, rng.randrange(space.leaf_count), q)
        for drop in (1, 2):
            v = tuple(t for t in q if t != q[drop])
            if not projection_consistency(kernel, cyl, v).ok:
                failures.append("kernel #%d drop t=%d" % (i, q[drop]))
    return CriterionResult(5, "kolmogorov-consistency", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_6(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    q = (0, 1, 2)
    for i in range(5):
        space = DepthSpace(2, 2)
        kernel = TransitionKernel.from_step(_random_measure(rng, space, 3), q)
        rep = boundedness_criterion(kernel, 0, q)
        if not rep.ok:
            failures.append("bound violated at kernel #%d" % i)
    # growth witness: a slice carrying a leaf of s-adic norm s
    s = 3
    space = DepthSpace(2, 2)
    step = Measure(space, s, {0: Fraction(1, 3), 1: 1, 2: 2, 3: 1})
    cap = math.ceil(3 / math.log10(s)) * 3
    kernel = TransitionKernel.from_step(step, list(range(cap + 1)))
    try:
        w = unbounded_witness(kernel, 0, 10 ** 3, max_length=cap)
        if not float(w.norm) > 10 ** 3:
            failures.append("witness norm too small")
    except WitnessNotFound:
        failures.append("no witness within chain length %d" % cap)
    # and a probability kernel must yield none
    flat = TransitionKernel.from_step(haar(space, s), list(range(12)))
    try:
        unbounded_witness(flat, 0, 10 ** 3)
        failures.append("spurious witness for a norm-1 kernel")
    except WitnessNotFound:
        pass
    return CriterionResult(6, "boundedness", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


# -- criterion 7: exponential ----------------------------------------------------


def criterion_7(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    primes = [2, 3, 5, 7]
    for i in range(100):
        s = primes[i % 4]
        k = exp_admissible_ord(s) + rng.randint(0, 3)
        num = rng.choice([-1, 1]) * rng.randint(1, 20)
        den = rng.randint(1, 20)
        while den % s == 0:
            den = rng.randint(1, 20)
        x = ScalarKs.exact(Fraction(num, den) * Fraction(s) ** k, s)
        e = exp_s(x, precision=precision)
        if e.ord() != 0:
            failures.append("|Exp| != 1 at #%d" % i)
        if not (e - 1).ord() >= 1:
            failures.append("|Exp - 1| >= 1 at #%d" % i)
    for i in range(50):
        s = primes[i % 4]
        k = exp_admissible_ord(s)
        x = ScalarKs.exact(Fraction(rng.randint(1, 9), 1 + 2 * (s == 2)) * s ** k, s)
        y = ScalarKs.exact(Fraction(-rng.randint(1, 9)) * s ** (k + 1), s)
        lhs = exp_s(x + y, precision=precision)
        rhs = exp_s(x, precision=precision) * exp_s(y, precision=precision)
        if not lhs.agrees_to(rhs, precision - GUARD):
            failures.append("functional equation at #%d" % i)
    for s in primes:
        for n in range(1, 201):
            if not Fraction(factorial_valuation(n, s)) <= Fraction(n - 1, s - 1):
                failures.append("factorial bound at n=%d s=%d" % (n, s))
    return CriterionResult(7, "exponential", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_8(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    setups = [(DepthSpace(2, 3), 5), (DepthSpace(2, 2), 3), (DepthSpace(3, 2), 5)]
    for i, (space, s) in enumerate(setups):
        h = HomogeneousKernel(_random_measure(rng, space, s))
        for gamma in (0, 1, 2, 3):
            for t1, t2, x1 in ((0, 1, 0), (0, 2, 1), (1, 3, 2)):
                v = psi_factorization_check(h, gamma, t1, t2, x1 % space.leaf_count)
                if not v.ok:
                    failures.append("setup #%d gamma=%d (%d,%d)" % (i, gamma, t1, t2))
    for space, s, gamma in ((DepthSpace(2, 3), 5, 1), (DepthSpace(2, 3), 5, 3),
                            (DepthSpace(3, 2), 5, 1), (DepthSpace(3, 2), 7, 2)):
        phi = char_functional(haar(space, s), gamma)
        if not phi.is_zero:
            failures.append("haar phi != 0 at p=%d gamma=%d" % (space.prime, gamma))
    return CriterionResult(8, "characteristic-functionals", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_9(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    for j in range(9):
        for k in range(j + 1):
            t = moment_coefficients(k, j)
            if not t.agree:
                failures.append("a_{%d,%d}: %r" % (k, j, t))
    if moment_coefficients(2, 3).value != 6:
        failures.append("a_{2,3} != 6")
    for j in range(1, 9):
        if moment_coefficients(1, j).value != 1:
            failures.append("a_{1,%d} != 1" % j)
        if moment_coefficients(j, j).value != math.factorial(j):
            failures.append("a_{%d,%d} != %d!" % (j, j, j))
    return CriterionResult(9, "moment-coefficients", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def _poisson_fixture(precision: int) -> PoissonMeasureTruncated:
    space = DepthSpace(2, 2)
    s = 5
    base = Measure(space, s, {x: Fraction((2 * x + 1) * 5 ** 12, 3 ** (x + 1))
                              for x in space.leaves()})
    return PoissonMeasureTruncated(base, Ball(2, 0, 0), n_max=6,
                                   variant="tuples", precision=precision)


def criterion_10(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    pm = _poisson_fixture(precision)
    balls = [ClopenSet.from_ball(Ball(2, 2, r)) for r in (0, 2, 1)]
    min_val = precision - GUARD
    for n1 in range(5):
        for n2 in range(5 - n1):
            for n3 in range(5 - n1 - n2):
                events = list(zip(balls, (n1, n2, n3)))
                v = poisson_event_check(pm, events, min_valuation=min_val)
                if not v.ok:
                    failures.append("counts (%d,%d,%d) ord %s"
                                    % (n1, n2, n3, v.worst_valuation))
    v = poisson_consistency(pm, Ball(2, 1, 0), counts_cap=2,
                            min_valuation=min_val)
    if not v.ok:
        failures.append("restriction: %s" % v.detail)
    return CriterionResult(10, "poisson-identity", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_11(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    spaces = [DepthSpace(2, 4), DepthSpace(3, 2)]
    for i in range(10 ** 4):
        space = spaces[i % 2]
        n = rng.randint(2, 4)
        xs, ys, zs = (tuple(rng.sample(range(space.leaf_count), n))
                      for _ in range(3))
        dxz = tuple_distance(space, xs, zs)
        dxy = tuple_distance(space, xs, ys)
        dyz = tuple_distance(space, ys, zs)
        if dxz > max(dxy, dyz):
            failures.append("delta at #%d" % i)
        gx, gy, gz = (Configuration(space, t) for t in (xs, ys, zs))
        cxz = config_distance(gx, gz)
        cxy = config_distance(gx, gy)
        cyz = config_distance(gy, gz)
        if cxz > (cxy if cxy >= cyz else cyz):
            failures.append("config at #%d" % i)
        if len(failures) > 3:
            break
    return CriterionResult(11, "configuration-ultrametrics", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_12(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    s = 5
    space = DepthSpace(2, 3)
    jump = Measure(space, s,
                   {x: _random_fraction(rng, s) for x in range(1, space.leaf_count)})
    m0 = ScalarKs.exact(Fraction(7 * s, 3), s)
    rho = ScalarKs.exact(Fraction(2 * s, 7), s)
    psi0 = levy_psi(m0, jump, 0, precision=precision)
    if not psi0.is_exact_zero:
        failures.append("psi(0) != 0")
    psi = levy_psi(m0, jump, rho, precision=precision)
    times = list(range(1, 11))
    for i, t1 in enumerate(times):
        for t2 in times[i:]:
            v = levy_semigroup_check(psi, t1, t2, precision=precision,
                                     min_valuation=precision - GUARD)
            if not v.ok:
                failures.append("e(%d+%d) ord %s" % (t1, t2, v.worst_valuation))
    return CriterionResult(12, "levy-exponent", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


def criterion_13(rng: random.Random, precision: int) -> CriterionResult:
    start = time.monotonic()
    failures = []
    q = (0, 1, 2, 3)
    for i in range(10):
        space = DepthSpace(2, 2)
        kernel = TransitionKernel.from_step(_random_probability(rng, space, 3), q)
        cyl = build_cylinder(kernel, 0, q)
        for pair1, pair2 in (((0, 1), (1, 2)), ((1, 2), (2, 3)), ((0, 1), (2, 3))):
            if not increment_independence(cyl, pair1, pair2).ok:
                failures.append("kernel #%d pairs %r %r" % (i, pair1, pair2))
    # a coupled joint law (second increment copies the first) must fail
    space = DepthSpace(2, 1)
    s = 3
    half = ScalarKs.exact(Fraction(1, 2), s)
    values = {(0, 0): half, (1, 0): half}
    coupled = CylinderMeasure((0, 1, 2), 0,
                              ProductMeasure([space, space], s, values))
    if increment_independence(coupled, (0, 1), (1, 2)).ok:
        failures.append("coupled joint law not detected")
    return CriterionResult(13, "increment-independence", not failures,
                           "; ".join(failures[:3]), time.monotonic() - start)


_CRITERIA: Dict[int, Callable[[random.Random, int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
    13: criterion_13,
}

SUITES: Dict[str, Tuple[int, ...]] = {
    "measure": (1, 2, 3, 7),
    "markov": (4, 5, 6, 8, 13),
    "poisson": (9, 10, 11, 12),
    "all": tuple(range(1, 14)),
}


def run_criterion(cid: int, seed: int = 0, precision: int = 32) -> CriterionResult:
    return _CRITERIA[cid](random.Random(seed + cid * 1000003), precision)


def run_suite(name: str, seed: int = 0, precision: int = 32) -> List[CriterionResult]:
    if name not in SUITES:
        raise UnknownSuite("suite %r (expected one of %s)"
                           % (name, ", ".join(sorted(SUITES))))
    return [run_criterion(cid, seed=seed, precision=precision)
            for cid in SUITES[name]]
