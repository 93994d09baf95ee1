"""Poisson-type kernels, configuration ultrametrics, truncated Poisson laws,
moment coefficients, and the Lévy exponent.

The truncated Poisson measure keeps its n-point components up to a level
n_max and reports the valuation of the discarded tail so every comparison
carries a certified precision.  Two symmetrization variants are offered:
ordered tuples with the diagonal kept, and genuine point sets with the
diagonal excluded (its mass is reported instead of assumed zero).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from .clopen import Ball, ClopenSet, DepthSpace
from .errors import (BaseNotIdempotent, CoordinatesCollide, DomainError,
                     NotSubBall, RadiusViolation, SizeMismatch, SpaceMismatch,
                     TruncationExceeded)
from .markov import Verdict, convolution_step
from .measure import Measure
from .scalar import (DEFAULT_PRECISION, NormValue, ScalarKs,
                     exp_admissible_ord, exp_s, ord_q)


# -- Poisson transition --------------------------------------------------------


def idempotence_check(p: Measure) -> Verdict:
    """P * P = P, exact finite convolution."""
    square = convolution_step(p, p)
    worst, bad = math.inf, None
    for a in p.space.leaves():
        diff = square.leaf_values[a] - p.leaf_values[a]
        if not diff.is_exact_zero:
            d = diff.ord()
            if d < worst:
                worst, bad = d, a
    if bad is None:
        return Verdict(True)
    return Verdict(False, worst, "leaf %d" % bad)


def poisson_transition(rho: ScalarKs, dt, base: Measure, x: int,
                       a_set: ClopenSet,
                       precision: int = DEFAULT_PRECISION) -> ScalarKs:
    """Exp(-rho*dt) * base(A - x) for an idempotent normalized base."""
    if not isinstance(rho, ScalarKs):
        rho = ScalarKs.exact(rho, base.s)
    if not isinstance(dt, ScalarKs):
        dt = ScalarKs.exact(dt, base.s)
    whole = base.space.whole()
    if not (base.evaluate(whole) == 1
            and base.mu_norm(whole) == NormValue.one(base.s)
            and idempotence_check(base).ok):
        raise BaseNotIdempotent("base must satisfy P(X)=1, ||P||=1, P*P=P")
    factor = exp_s(-(rho * dt), precision=precision)
    return factor * base.evaluate(a_set.translate(x))


# -- configuration space -------------------------------------------------------


class Configuration:
    """A finite set of distinct leaf residues at a fixed prime and depth."""

    __slots__ = ("space", "points")

    def __init__(self, space: DepthSpace, points: Sequence[int]) -> None:
        pts = tuple(sorted(x % space.leaf_count for x in points))
        if len(set(pts)) != len(pts):
            raise CoordinatesCollide("configuration points repeat")
        self.space = space
        self.points = pts

    @property
    def size(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Configuration)
                and other.space == self.space and other.points == self.points)

    def __hash__(self) -> int:
        return hash((self.space, self.points))

    def __repr__(self) -> str:
        return "Configuration(p=%d, %r)" % (self.space.prime, self.points)


@lru_cache(maxsize=None)
def _leaf_distance_cached(prime: int, m: int, d: int) -> NormValue:
    if d == 0:
        return NormValue.zero(prime)
    return NormValue.from_ord(prime, ord_q(d, prime))


def leaf_distance(space: DepthSpace, x: int, y: int) -> NormValue:
    """p-adic distance between leaves: p^(-ord_p(x - y)), 0 on the diagonal."""
    m = space.leaf_count
    return _leaf_distance_cached(space.prime, m, (x - y) % m)


def number_map(gamma: Configuration, a_set: ClopenSet) -> int:
    """N_A(gamma): how many configuration points fall in A."""
    return sum(1 for x in gamma.points
               if a_set.contains_leaf(x, gamma.space))


def _check_tuple(space: DepthSpace, x: Sequence[int]) -> Tuple[int, ...]:
    pts = tuple(v % space.leaf_count for v in x)
    if len(set(pts)) != len(pts):
        raise CoordinatesCollide("tuple coordinates repeat")
    return pts


def tuple_sup_distance(space: DepthSpace, x: Sequence[int],
                       y: Sequence[int]) -> NormValue:
    """d^n: the coordinatewise maximum of leaf distances."""
    if len(x) != len(y):
        raise SizeMismatch("tuples of sizes %d and %d" % (len(x), len(y)))
    best = NormValue.zero(space.prime)
    for a, b in zip(x, y):
        d = leaf_distance(space, a, b)
        if d > best:
            best = d
    return best


def _diagonal_distance(space: DepthSpace, x: Tuple[int, ...]) -> NormValue:
    # nearest point with a coordinate collision differs in one pair, so the
    # distance to the non-distinct locus is the closest pair distance
    best = None
    for i, j in itertools.combinations(range(len(x)), 2):
        d = leaf_distance(space, x[i], x[j])
        if best is None or d < best:
            best = d
    if best is None:
        raise DomainError("delta^n needs tuples of size >= 2")
    return best


def tuple_distance(space: DepthSpace, x: Sequence[int],
                   y: Sequence[int]) -> Fraction:
    """delta^n(x,y) = d^n / max(d^n, d(x, diag), d(y, diag)), a value in [0,1].

    Returned as an exact rational (a power of p or 0).
    """
    xs = _check_tuple(space, x)
    ys = _check_tuple(space, y)
    d = tuple_sup_distance(space, xs, ys)
    if d.is_zero:
        return Fraction(0)
    denom = max(d, _diagonal_distance(space, xs), _diagonal_distance(space, ys))
    ratio = NormValue(space.prime, d.exponent - denom.exponent)
    return Fraction(space.prime) ** ratio.exponent


def config_distance(gamma: Configuration, gamma2: Configuration) -> NormValue:
    """d^(n): minimum of the sup distance over all matchings (n <= 4 exhaustive)."""
    if gamma.space != gamma2.space:
        raise SpaceMismatch("configurations on different spaces")
    if gamma.size != gamma2.size:
        raise SizeMismatch("configurations of sizes %d and %d"
                           % (gamma.size, gamma2.size))
    if gamma.size == 0:
        return NormValue.zero(gamma.space.prime)
    best = None
    for perm in itertools.permutations(gamma2.points):
        d = tuple_sup_distance(gamma.space, gamma.points, perm)
        if best is None or d < best:
            best = d
        if best.is_zero:
            break
    return best


# -- truncated Poisson measure -------------------------------------------------


class PoissonMeasureTruncated:
    """Exp(-m(K)) sum_{n<=n_max} (n-point component)/n! on a ball K.

    variant "tuples" keeps ordered tuples including the diagonal (the
    configuration components are the full n-fold products); variant
    "sets" works with genuine n-point subsets, excluding the diagonal,
    whose mass is exposed by diagonal_mass().
    """

    __slots__ = ("base", "region", "n_max", "variant", "precision",
                 "lam", "_leaf_info", "_class_cache")

    def __init__(self, base: Measure, region: Ball, n_max: int = 6,
                 variant: str = "tuples",
                 precision: int = DEFAULT_PRECISION) -> None:
        if variant not in ("tuples", "sets"):
            raise DomainError("variant must be 'tuples' or 'sets'")
        if region.prime != base.space.prime:
            raise NotSubBall("region prime differs from the base space")
        self.base = base
        self.region = region
        self.n_max = n_max
        self.variant = variant
        self.precision = precision
        region_set = ClopenSet.from_ball(region)
        for x in base.space.leaves():
            if not region_set.contains_leaf(x, base.space):
                if not base.leaf_values[x].is_exact_zero:
                    raise DomainError("base mass outside the region ball")
        self.lam = base.evaluate(region_set)
        if self.lam.ord() < exp_admissible_ord(base.s):
            raise RadiusViolation("|m(K)|_s outside the Exp convergence ball")
        self._leaf_info = tuple(
            (x, base.leaf_values[x])
            for x in region_set.leaf_residues(base.space)
            if not base.leaf_values[x].is_exact_zero)
        self._class_cache: Dict[Tuple, Dict] = {}

    @property
    def s(self) -> int:
        return self.base.s

    def exp_factor(self) -> ScalarKs:
        return exp_s(-self.lam, precision=self.precision)

    def tail_valuation(self) -> Fraction:
        """Certified lower bound on the valuation of the discarded tail.

        Every level-(n_max+1) term has ord >= (n_max+1) ord(lam) - ord((n_max+1)!),
        and the bound only grows with n.
        """
        n = self.n_max + 1
        d = self.lam.ord()
        return n * d - Fraction(n - 1, self.s - 1)

    def diagonal_mass(self, n: int) -> ScalarKs:
        """Mass of ordered n-tuples with a repeated coordinate: lam^n - n! e_n."""
        if n < 2:
            return ScalarKs.exact(0, self.s)
        # elementary symmetric polynomial of the leaf masses, degree n
        e = [ScalarKs.exact(1, self.s)] + [ScalarKs.exact(0, self.s)] * n
        for _, mass in self._leaf_info:
            for k in range(n, 0, -1):
                e[k] = e[k] + e[k - 1] * mass
        distinct = e[n] * math.factorial(n)
        return self.lam ** n - distinct

    def _classify(self, regions: Tuple[ClopenSet, ...]) -> List[Tuple[int, object, int]]:
        rest_idx = len(regions)
        info = []
        for x, mass in self._leaf_info:
            cls = rest_idx
            for i, b in enumerate(regions):
                if b.contains_leaf(x, self.base.space):
                    cls = i
                    break
            info.append((x, mass, cls))
        return info

    def class_masses(self, regions: Sequence[ClopenSet]) -> Dict[Tuple[int, ...], ScalarKs]:
        """Total measure of each count class over the given disjoint regions.

        Key: (n_1, ..., n_r, n_rest).  Computed by one enumeration of all
        ordered tuples up to n_max (diagonal skipped in the set variant)
        and cached per partition.
        """
        regions = tuple(regions)
        if regions in self._class_cache:
            return self._class_cache[regions]
        for a, b in itertools.combinations(regions, 2):
            if not a.intersect(b).is_empty:
                raise DomainError("count regions must be pairwise disjoint")
        info = self._classify(regions)
        r = len(regions)
        acc: Dict[Tuple[int, ...], ScalarKs] = {}
        counts = [0] * (r + 1)
        skip_diag = self.variant == "sets"
        used = set()

        def record(prod: ScalarKs) -> None:
            key = tuple(counts)
            if key in acc:
                acc[key] = acc[key] + prod
            else:
                acc[key] = prod

        def rec(level: int, prod: ScalarKs) -> None:
            record(prod)
            if level == self.n_max:
                return
            for x, mass, cls in info:
                if skip_diag and x in used:
                    continue
                counts[cls] += 1
                if skip_diag:
                    used.add(x)
                rec(level + 1, prod * mass)
                counts[cls] -= 1
                if skip_diag:
                    used.discard(x)

        rec(0, ScalarKs.exact(1, self.s))
        factor = self.exp_factor()
        out: Dict[Tuple[int, ...], ScalarKs] = {}
        for key, raw in acc.items():
            n = sum(key)
            out[key] = factor * raw / math.factorial(n)
        self._class_cache[regions] = out
        return out

    def config_mass(self, points: Sequence[int]) -> ScalarKs:
        """Set-variant mass of one n-point configuration: Exp(-lam) prod m({x})."""
        if self.variant != "sets":
            raise DomainError("config_mass is defined for the set variant")
        gamma = Configuration(self.base.space, points)
        if gamma.size > self.n_max:
            raise TruncationExceeded("%d points beyond n_max=%d"
                                     % (gamma.size, self.n_max))
        prod = self.exp_factor()
        for x in gamma.points:
            prod = prod * self.base.leaf_values[x]
        return prod

    def restrict(self, sub: Ball) -> "PoissonMeasureTruncated":
        """The directly built law on a sub-ball (base masses outside zeroed)."""
        if sub.prime != self.region.prime or not self.region.contains(sub):
            raise NotSubBall("%s is not inside %s"
                             % (sub.notation(), self.region.notation()))
        sub_set = ClopenSet.from_ball(sub)
        vals = {x: v for x, v in self.base.leaf_values.items()
                if sub_set.contains_leaf(x, self.base.space)}
        return PoissonMeasureTruncated(
            Measure(self.base.space, self.s, vals), sub, self.n_max,
            self.variant, self.precision)


def poisson_measure_event(pm: PoissonMeasureTruncated,
                          events: Sequence[Tuple[ClopenSet, int]]) -> ScalarKs:
    """P({gamma: card(gamma & B_i) = n_i for all i}) from the tuple expansion."""
    regions = tuple(b for b, _ in events)
    wanted = tuple(n for _, n in events)
    if any(n < 0 for n in wanted):
        raise DomainError("counts must be nonnegative")
    if sum(wanted) > pm.n_max:
        raise TruncationExceeded("sum of counts %d beyond n_max=%d"
                                 % (sum(wanted), pm.n_max))
    table = pm.class_masses(regions)
    total = ScalarKs.exact(0, pm.s)
    for key, mass in table.items():
        if key[:-1] == wanted:
            total = total + mass
    return total


def poisson_event_closed_form(pm: PoissonMeasureTruncated,
                              events: Sequence[Tuple[ClopenSet, int]]) -> ScalarKs:
    """prod_i m(B_i)^(n_i) Exp(-m(B_i)) / n_i!."""
    out = ScalarKs.exact(1, pm.s)
    for b, n in events:
        mb = pm.base.evaluate(b)
        out = out * mb ** n * exp_s(-mb, pm.s, precision=pm.precision) \
            / math.factorial(n)
    return out


def poisson_event_check(pm: PoissonMeasureTruncated,
                        events: Sequence[Tuple[ClopenSet, int]],
                        min_valuation=None) -> Verdict:
    """Expansion vs closed form; passes when the deviation ord clears the bar."""
    if min_valuation is None:
        min_valuation = pm.tail_valuation()
    lhs = poisson_measure_event(pm, events)
    rhs = poisson_event_closed_form(pm, events)
    diff = lhs - rhs
    if diff.is_exact_zero:
        return Verdict(True)
    d = diff.ord()
    return Verdict(d >= min_valuation, d,
                   "needed ord >= %s" % (min_valuation,))


def poisson_consistency(pm: PoissonMeasureTruncated, sub: Ball,
                        counts_cap: int = 2,
                        min_valuation=None) -> Verdict:
    """Count events inside a sub-ball agree between restriction and rebuild.

    Discarding points outside the sub-ball leaves the counts inside it
    unchanged, so the two constructions must agree to the certified
    precision on every count vector over the sub-ball's child partition.
    """
    rebuilt = pm.restrict(sub)
    if min_valuation is None:
        min_valuation = min(pm.tail_valuation(), rebuilt.tail_valuation())
    space = pm.base.space
    if sub.level < space.depth:
        children = [ClopenSet.from_ball(b) for b in sub.children(sub.level + 1)]
    else:
        children = [ClopenSet.from_ball(sub)]
    worst, bad = math.inf, None
    for counts in itertools.product(range(counts_cap + 1), repeat=len(children)):
        if sum(counts) > min(pm.n_max, counts_cap + 1):
            continue
        events = list(zip(children, counts))
        diff = poisson_measure_event(pm, events) \
            - poisson_measure_event(rebuilt, events)
        if not diff.is_exact_zero:
            d = diff.ord()
            if d < worst:
                worst, bad = d, counts
    if bad is None:
        return Verdict(True)
    return Verdict(worst >= min_valuation, worst, "counts %r" % (bad,))


# -- moment coefficients -------------------------------------------------------


@dataclass(frozen=True)
class MomentTriple:
    """a_{k,j} computed three independent ways."""

    recurrence: int
    composition: int
    surjections: int

    @property
    def agree(self) -> bool:
        return self.recurrence == self.composition == self.surjections

    @property
    def value(self) -> int:
        if not self.agree:
            raise DomainError("moment coefficient routes disagree: %r" % (self,))
        return self.recurrence


def _a_recurrence(k: int, j: int, cache: Dict[Tuple[int, int], int]) -> int:
    if (k, j) in cache:
        return cache[(k, j)]
    if k == 0:
        # no parts: only the empty sum reaches j = 0
        val = 1 if j == 0 else 0
    else:
        val = k ** j - sum(math.comb(k, t) * _a_recurrence(k - t, j, cache)
                           for t in range(1, k + 1))
    cache[(k, j)] = val
    return val


def _a_composition(k: int, j: int) -> int:
    if k == 0:
        return 1 if j == 0 else 0
    total = 0
    fj = math.factorial(j)
    for cut in itertools.combinations(range(1, j), k - 1):
        parts = [b - a for a, b in zip((0,) + cut, cut + (j,))]
        denom = 1
        for part in parts:
            denom *= math.factorial(part)
        total += fj // denom
    return total


def _a_surjections(k: int, j: int) -> int:
    if k == 0:
        return 1 if j == 0 else 0
    count = 0

    # DFS over the block-usage profile, carrying the number of labeled
    # assignments along each path; pruned when a surjection is out of reach
    def walk(i: int, used: int, ways: int) -> None:
        nonlocal count
        if k - used > j - i:
            return
        if i == j:
            if used == k:
                count += ways
            return
        if used:
            walk(i + 1, used, ways * used)
        if used < k:
            walk(i + 1, used + 1, ways * (k - used))

    walk(0, 0, 1)
    return count


def moment_coefficients(k: int, j: int) -> MomentTriple:
    """The surjection numbers a_{k,j}, cross-checked by three routes."""
    if not 0 <= k <= j:
        raise DomainError("need 0 <= k <= j")
    return MomentTriple(_a_recurrence(k, j, {}), _a_composition(k, j),
                        _a_surjections(k, j))


# -- Lévy exponent -------------------------------------------------------------


def levy_psi(m0, jump: Measure, rho,
             precision: int = DEFAULT_PRECISION) -> ScalarKs:
    """psi(rho) = rho*m0 + sum_l [1 - Exp(-rho*l)] jump({l}), leaves as integers."""
    s = jump.s
    if not isinstance(m0, ScalarKs):
        m0 = ScalarKs.exact(m0, s)
    if not isinstance(rho, ScalarKs):
        rho = ScalarKs.exact(rho, s)
    if not jump.leaf_values[0].is_exact_zero:
        raise DomainError("jump measure must vanish at 0")
    psi = rho * m0
    one = ScalarKs.exact(1, s)
    for l, w in jump.leaf_values.items():
        if w.is_exact_zero:
            continue
        psi = psi + (one - exp_s(-(rho * l), precision=precision)) * w
    return psi


def levy_semigroup_check(psi: ScalarKs, t1: int, t2: int,
                         precision: int = DEFAULT_PRECISION,
                         min_valuation=None) -> Verdict:
    """e(t) = Exp(-t psi): multiplicativity e(t1+t2) = e(t1) e(t2)."""
    if min_valuation is None:
        min_valuation = precision - 4
    if psi.is_exact_zero:
        return Verdict(True)

    def e(t: int) -> ScalarKs:
        arg = psi * (-t)
        if arg.is_exact_zero:
            return ScalarKs.exact(1, psi.s)
        return exp_s(arg, precision=precision)

    diff = e(t1 + t2) - e(t1) * e(t2)
    if diff.is_exact_zero:
        return Verdict(True)
    d = diff.ord()
    return Verdict(d >= min_valuation, d,
                   "needed ord >= %s" % (min_valuation,))
