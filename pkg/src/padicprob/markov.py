"""Transition kernels on the leaf group Z/p^N and their verifications.

Kernels map an ordered pair of time labels and a starting leaf to a
measure on the leaf group.  The workhorse construction is the convolution
semigroup generated by a single step measure; explicit slice tables are
supported so that deliberately broken kernels can be checked too.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, Mapping, Sequence, Tuple

from .clopen import Ball, ClopenSet, DepthSpace
from .errors import (BudgetExceeded, DomainError, NotSubTuple, PairsOverlap,
                     PrimeClash, SpaceMismatch, TimesNotDistinct,
                     WitnessNotFound)
from .measure import Measure, ProductMeasure
from .scalar import (CyclotomicScalar, NormValue, RootOfUnityExponent,
                     ScalarKs, cyclo_embed)


class Verdict:
    """Outcome of a check: pass/fail plus the worst deviation valuation."""

    __slots__ = ("ok", "worst_valuation", "detail")

    def __init__(self, ok: bool, worst_valuation=math.inf, detail: str = "") -> None:
        self.ok = ok
        self.worst_valuation = worst_valuation
        self.detail = detail

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        tag = "pass" if self.ok else "FAIL"
        return "Verdict(%s, worst ord %s%s)" % (
            self.tag_detail(), self.worst_valuation,
            "" if not self.detail else "; " + self.detail)

    def tag_detail(self) -> str:
        return "pass" if self.ok else "FAIL"


def convolution_step(p_t: Measure, p_1: Measure) -> Measure:
    """One convolution: result({a}) = sum_y p_t({y}) p_1({a - y})."""
    if p_t.space != p_1.space or p_t.s != p_1.s:
        raise SpaceMismatch("convolution needs a shared leaf group")
    space = p_t.space
    m = space.leaf_count
    zero = ScalarKs.exact(0, p_t.s)
    out = {a: zero for a in space.leaves()}
    for y, w in p_t.leaf_values.items():
        if w.is_exact_zero:
            continue
        for u, v in p_1.leaf_values.items():
            if v.is_exact_zero:
                continue
            a = (y + u) % m
            out[a] = out[a] + w * v
    return Measure(space, p_t.s, out)


class TransitionKernel:
    """P(t1, x1, t2, .) for time labels from a finite set, t1 < t2."""

    __slots__ = ("space", "s", "times", "_slice_fn", "translation_invariant")

    def __init__(self, space: DepthSpace, s: int, times: Sequence,
                 slice_fn: Callable, translation_invariant: bool = False) -> None:
        self.space = space
        self.s = s
        self.times = tuple(times)
        if len(set(self.times)) != len(self.times):
            raise TimesNotDistinct("time labels repeat")
        self._slice_fn = slice_fn
        self.translation_invariant = translation_invariant

    @classmethod
    def from_step(cls, step: Measure, times: Sequence) -> "TransitionKernel":
        """The convolution semigroup: P(t1, x1, t2, A) = step^*(t2-t1) (A - x1)."""
        powers: Dict[int, Measure] = {1: step}

        def power(n: int) -> Measure:
            if n not in powers:
                powers[n] = convolution_step(power(n - 1), step)
            return powers[n]

        def slice_fn(t1, x1, t2):
            gap = t2 - t1
            if not isinstance(gap, int) or gap < 1:
                raise DomainError("semigroup kernel needs integer t2 - t1 >= 1")
            return power(gap).translate(x1)

        return cls(step.space, step.s, times, slice_fn, translation_invariant=True)

    @classmethod
    def from_slices(cls, space: DepthSpace, s: int, times: Sequence,
                    slices: Mapping[Tuple, Measure]) -> "TransitionKernel":
        """Explicit table keyed by (t1, x1, t2)."""
        def slice_fn(t1, x1, t2):
            try:
                return slices[(t1, x1, t2)]
            except KeyError:
                raise DomainError("no slice for (%r, %r, %r)" % (t1, x1, t2))

        return cls(space, s, times, slice_fn)

    def slice(self, t1, x1, t2) -> Measure:
        if t1 == t2:
            raise TimesNotDistinct("t1 and t2 coincide")
        return self._slice_fn(t1, x1, t2)

    def perturb(self, t1, x1, t2, leaf: int, delta) -> "TransitionKernel":
        """A copy with one leaf value of one slice shifted; breaks semigroup laws."""
        base_fn = self._slice_fn

        def slice_fn(a, x, b):
            mu = base_fn(a, x, b)
            if (a, x, b) == (t1, x1, t2):
                vals = dict(mu.leaf_values)
                vals[leaf] = vals[leaf] + delta
                mu = Measure(mu.space, mu.s, vals)
            return mu

        return TransitionKernel(self.space, self.s, self.times, slice_fn,
                                translation_invariant=False)


def chapman_check(kernel: TransitionKernel, t1, z, t2) -> Verdict:
    """Composition test: P(t1,x1,t2,A) = sum_y P(t1,x1,z,{y}) P(z,y,t2,A).

    Checked for every starting leaf and every ball up to the space depth;
    translation-invariant kernels only need the starting leaf 0.
    """
    if len({t1, z, t2}) != 3:
        raise TimesNotDistinct("chapman times must be pairwise distinct")
    space = kernel.space
    starts = [0] if kernel.translation_invariant else list(space.leaves())
    worst = math.inf
    bad = None
    for x1 in starts:
        left = kernel.slice(t1, x1, t2)
        first = kernel.slice(t1, x1, z)
        # assemble the right side as a measure once, then compare per ball
        zero = ScalarKs.exact(0, kernel.s)
        right_leaves = {a: zero for a in space.leaves()}
        for y, w in first.leaf_values.items():
            if w.is_exact_zero:
                continue
            second = kernel.slice(z, y, t2)
            for a, v in second.leaf_values.items():
                right_leaves[a] = right_leaves[a] + w * v
        right = Measure(space, kernel.s, right_leaves)
        for level in range(space.depth + 1):
            for r in range(space.prime ** level):
                A = ClopenSet.from_ball(Ball(space.prime, level, r))
                diff = left.evaluate(A) - right.evaluate(A)
                if not diff.is_exact_zero:
                    d = diff.ord()
                    if d < worst:
                        worst, bad = d, (x1, A)
    if bad is None:
        return Verdict(True)
    return Verdict(False, worst,
                   "x1=%d, ball %s" % (bad[0], bad[1].notation()))


class CylinderMeasure:
    """The joint law of the chain at times q[1:], anchored at (q[0], x0)."""

    __slots__ = ("times", "anchor", "joint")

    def __init__(self, times: Sequence, anchor: int, joint: ProductMeasure) -> None:
        self.times = tuple(times)
        self.anchor = anchor
        self.joint = joint

    @property
    def space(self) -> DepthSpace:
        return self.joint.spaces[0]

    def total(self) -> ScalarKs:
        return self.joint.total()


def build_cylinder(kernel: TransitionKernel, x0: int, q: Sequence,
                   budget: int = 10 ** 6) -> CylinderMeasure:
    """Chain product: joint({(x1..xn)}) = prod_k P(t_{k-1}, x_{k-1}, t_k, {x_k})."""
    q = tuple(q)
    if len(set(q)) != len(q):
        raise TimesNotDistinct("cylinder times repeat")
    if len(q) < 2:
        raise DomainError("a cylinder needs at least two time labels")
    space = kernel.space
    n = len(q) - 1
    if space.leaf_count ** n > budget:
        raise BudgetExceeded("cylinder leaf space of size %d^%d"
                             % (space.leaf_count, n))
    values: Dict[Tuple[int, ...], ScalarKs] = {}
    one = ScalarKs.exact(1, kernel.s)
    slices_from: Dict[Tuple, Measure] = {}

    def get_slice(t1, x1, t2):
        key = (t1, x1, t2)
        if key not in slices_from:
            slices_from[key] = kernel.slice(t1, x1, t2)
        return slices_from[key]

    def walk(k: int, prev: int, weight: ScalarKs, prefix: Tuple[int, ...]):
        if k > n:
            values[prefix] = weight
            return
        mu = get_slice(q[k - 1], prev, q[k])
        for x, v in mu.leaf_values.items():
            w = weight * v
            if w.is_exact_zero and k < n:
                # whole sub-tree is zero; record it wholesale
                for rest in itertools.product(space.leaves(), repeat=n - k):
                    values[prefix + (x,) + rest] = w
                continue
            walk(k + 1, x, w, prefix + (x,))

    walk(1, x0, one, ())
    joint = ProductMeasure([space] * n, kernel.s, values)
    return CylinderMeasure(q, x0, joint)


def projection_consistency(kernel: TransitionKernel, cyl: CylinderMeasure,
                           v: Sequence, budget: int = 10 ** 6) -> Verdict:
    """Marginalizing onto the sub-tuple v equals the directly built cylinder."""
    v = tuple(v)
    q = cyl.times
    if not v or v[0] != q[0]:
        raise NotSubTuple("sub-tuple must start at the anchor time")
    positions = []
    j = 0
    for t in v:
        while j < len(q) and q[j] != t:
            j += 1
        if j == len(q):
            raise NotSubTuple("%r is not a sub-tuple of %r" % (v, q))
        positions.append(j)
        j += 1
    if len(v) < 2:
        raise DomainError("projection target needs at least one chain time")
    keep = [p - 1 for p in positions[1:]]  # joint coordinates exclude the anchor
    projected = cyl.joint.marginal(keep)
    direct = build_cylinder(kernel, cyl.anchor, v, budget=budget).joint
    worst = math.inf
    bad = None
    for key, val in projected.values.items():
        diff = val - direct.values[key]
        if not diff.is_exact_zero:
            d = diff.ord()
            if d < worst:
                worst, bad = d, key
    if bad is None:
        return Verdict(True)
    return Verdict(False, worst, "leaf tuple %r" % (bad,))


class BoundednessReport:
    """C_q together with the rectangle sweep verifying |mu^q(E)| <= exp(C_q)."""

    __slots__ = ("c_q", "bound_norm", "ok", "rectangles_checked", "worst_excess")

    def __init__(self, c_q, bound_norm, ok, rectangles_checked, worst_excess):
        self.c_q = c_q
        self.bound_norm = bound_norm
        self.ok = ok
        self.rectangles_checked = rectangles_checked
        self.worst_excess = worst_excess

    def __bool__(self) -> bool:
        return self.ok


def boundedness_criterion(kernel: TransitionKernel, x0: int, q: Sequence,
                          rectangle_depth: int = 2,
                          budget: int = 10 ** 6) -> BoundednessReport:
    """C_q = sum_k ln(sup_x ||slice_k||); checks the bound on ball rectangles.

    The bound itself is verified exactly in the value group s^Z; the float
    C_q is only reported for readability.
    """
    q = tuple(q)
    space = kernel.space
    s = kernel.s
    bound = NormValue.one(s)
    for k in range(1, len(q)):
        starts = [0] if kernel.translation_invariant else list(space.leaves())
        sup = NormValue.zero(s)
        for x in starts:
            n = kernel.slice(q[k - 1], x, q[k]).mu_norm(space.whole())
            if n > sup:
                sup = n
        bound = bound * sup
    c_q = -math.inf if bound.is_zero else float(bound.exponent) * math.log(s)
    cyl = build_cylinder(kernel, x0, q, budget=budget)
    depth = min(rectangle_depth, space.depth)
    axis = [ClopenSet.from_ball(Ball(space.prime, lvl, r))
            for lvl in range(depth + 1) for r in range(space.prime ** lvl)]
    ok = True
    checked = 0
    worst_excess = None
    for rect in itertools.product(axis, repeat=cyl.joint.arity):
        checked += 1
        val = cyl.joint.evaluate_rectangle(rect)
        if val.is_exact_zero:
            continue
        n = val.norm()
        if n > bound:
            ok = False
            if worst_excess is None or n > worst_excess:
                worst_excess = n
    return BoundednessReport(c_q, bound, ok, checked, worst_excess)


class Witness:
    """A nested singleton chain whose measure norm exceeds the target."""

    __slots__ = ("chain", "norm", "length")

    def __init__(self, chain, norm, length):
        self.chain = chain
        self.norm = norm
        self.length = length


def unbounded_witness(kernel: TransitionKernel, x0: int, target,
                      max_length: int = None) -> Witness:
    """Greedy leaf chain maximizing the per-step singleton norm.

    Walks consecutive time pairs of the kernel, at each step picking the
    leaf with the largest |P({y})|.  The product of singleton norms is a
    lower bound for the cylinder-set norm, so exceeding the target
    certifies unboundedness growth; failure to exceed it within the
    budget raises WitnessNotFound (greedy is exact for product chains).
    """
    times = kernel.times
    steps = len(times) - 1
    if max_length is not None:
        steps = min(steps, max_length)
    def exceeds(n: NormValue) -> bool:
        if isinstance(target, NormValue):
            return n > target
        return not n.is_zero and float(n) > float(target)

    prod = NormValue.one(kernel.s)
    chain = [x0]
    x = x0
    for k in range(steps):
        mu = kernel.slice(times[k], x, times[k + 1])
        best_leaf, best = None, NormValue.zero(kernel.s)
        for y, v in mu.leaf_values.items():
            n = v.norm()
            if best_leaf is None or n > best:
                best_leaf, best = y, n
        prod = prod * best
        chain.append(best_leaf)
        x = best_leaf
        if exceeds(prod):
            return Witness(tuple(chain), prod, k + 1)
    raise WitnessNotFound(
        "greedy chain norm %r never exceeded %r within %d steps"
        % (prod, target, steps))


def functional_integral(F, kernel: TransitionKernel, x0: int, q: Sequence,
                        budget: int = 10 ** 6) -> ScalarKs:
    """J_q(F) = sum over leaf tuples of F(tuple) * joint({tuple})."""
    cyl = build_cylinder(kernel, x0, q, budget=budget)
    total = ScalarKs.exact(0, kernel.s)
    lookup = F.__getitem__ if isinstance(F, dict) else F
    for key, w in cyl.joint.values.items():
        if w.is_exact_zero:
            continue
        f = lookup(key)
        if not isinstance(f, ScalarKs):
            f = ScalarKs.exact(f, kernel.s)
        total = total + f * w
    return total


def functional_integral_chain(F, kernel: TransitionKernel, x0: int,
                              tuples: Sequence[Sequence],
                              budget: int = 10 ** 6):
    """The J_q values along a caller-supplied chain of growing tuples.

    No limit is asserted; the sequence is simply reported.
    """
    return [functional_integral(F, kernel, x0, q, budget=budget)
            for q in tuples]


# -- characteristic functionals -----------------------------------------------


def char_functional(mu: Measure, gamma: int) -> CyclotomicScalar:
    """phi(gamma) = sum_x chi(gamma * x * p^(-N)) mu({x}) in Q_s(zeta_{p^N}).

    Leaf residues are read as the fractions x p^(-N) so that depth-N
    structure meets order-p^N characters; gamma = 0 gives the total mass.
    """
    p = mu.space.prime
    if mu.s == p:
        raise PrimeClash("cyclotomic order p^N collides with the value prime")
    k = mu.space.depth
    m = mu.space.leaf_count
    out = CyclotomicScalar.zero(p, k, mu.s)
    for x, w in mu.leaf_values.items():
        if w.is_exact_zero:
            continue
        e = RootOfUnityExponent(p, Fraction(gamma * x, m))
        out = out + cyclo_embed(e, p, k, mu.s).scale(w)
    return out


class HomogeneousKernel:
    """A convolution semigroup presented through its time-indexed family."""

    __slots__ = ("step", "space", "s", "_powers")

    def __init__(self, step: Measure) -> None:
        self.step = step
        self.space = step.space
        self.s = step.s
        self._powers: Dict[int, Measure] = {1: step}

    def at(self, t: int) -> Measure:
        if not isinstance(t, int) or t < 0:
            raise DomainError("homogeneous family defined for integer t >= 0")
        if t == 0:
            # the convolution identity
            return Measure.point_mass(self.space, self.s, 0)
        if t not in self._powers:
            self._powers[t] = convolution_step(self.at(t - 1), self.step)
        return self._powers[t]

    def slice(self, t1, x1, t2) -> Measure:
        if t2 <= t1:
            raise DomainError("need t2 > t1")
        return self.at(t2 - t1).translate(x1)

    def semigroup_check(self, t1: int, t2: int) -> Verdict:
        """P(t1+t2, A) = sum_y P(t1,{y}) P(t2, A-y), exact."""
        direct = self.at(t1 + t2)
        composed = convolution_step(self.at(t1), self.at(t2))
        worst, bad = math.inf, None
        for a in self.space.leaves():
            diff = direct.leaf_values[a] - composed.leaf_values[a]
            if not diff.is_exact_zero:
                d = diff.ord()
                if d < worst:
                    worst, bad = d, a
        if bad is None:
            return Verdict(True)
        return Verdict(False, worst, "leaf %d" % bad)

    def psi(self, t: int, gamma: int) -> CyclotomicScalar:
        return char_functional(self.at(t), gamma)

    def as_kernel(self, times: Sequence) -> TransitionKernel:
        return TransitionKernel(self.space, self.s, times, self.slice,
                                translation_invariant=True)


def psi_factorization_check(h: HomogeneousKernel, gamma: int,
                            t1: int, t2: int, x1: int = 0) -> Verdict:
    """phi(t1,x1,t2) = psi(t2-t1) chi(x1) and psi(t1+t2) = psi(t1) psi(t2)."""
    if t2 <= t1:
        raise DomainError("need t2 > t1")
    p, k = h.space.prime, h.space.depth
    phi = char_functional(h.slice(t1, x1, t2), gamma)
    psi = h.psi(t2 - t1, gamma)
    chi = cyclo_embed(RootOfUnityExponent(p, Fraction(gamma * x1, h.space.leaf_count)),
                      p, k, h.s)
    if not phi == psi * chi:
        return Verdict(False, detail="phi != psi * chi at gamma=%d" % gamma)
    lhs = h.psi(t1 + t2, gamma)
    rhs = h.psi(t1, gamma) * h.psi(t2, gamma)
    if not lhs == rhs:
        return Verdict(False, detail="psi(t1+t2) != psi(t1) psi(t2) at gamma=%d" % gamma)
    return Verdict(True)


# -- increment independence ---------------------------------------------------


def increment_independence(cyl: CylinderMeasure,
                           pair1: Tuple, pair2: Tuple) -> Verdict:
    """Factorization of two increment events over non-overlapping intervals.

    Each pair names two time labels of the cylinder; increments are read
    off the leaf group.  The second interval must start no earlier than
    the first ends (intervals sharing only the common endpoint are fine);
    interleaved intervals are not implemented here.
    """
    q = cyl.times
    try:
        i1, j1 = q.index(pair1[0]), q.index(pair1[1])
        i2, j2 = q.index(pair2[0]), q.index(pair2[1])
    except ValueError:
        raise DomainError("increment endpoints must be cylinder times")
    if not (i1 < j1 and i2 < j2):
        raise DomainError("increment intervals must run forward")
    if i2 < j1:
        if (i1, j1) == (i2, j2):
            raise PairsOverlap("the two intervals coincide")
        raise PairsOverlap(
            "interleaved intervals are outside the implemented case; "
            "only intervals meeting in at most the shared endpoint are handled")
    space = cyl.space
    m = space.leaf_count
    s = cyl.joint.s
    zero = ScalarKs.exact(0, s)

    def coord(key: Tuple[int, ...], idx: int) -> int:
        return cyl.anchor if idx == 0 else key[idx - 1]

    table: Dict[Tuple[int, int], ScalarKs] = {}
    for key, w in cyl.joint.values.items():
        if w.is_exact_zero:
            continue
        u = (coord(key, j1) - coord(key, i1)) % m
        v = (coord(key, j2) - coord(key, i2)) % m
        table[(u, v)] = table.get((u, v), zero) + w
    marg1 = {u: zero for u in range(m)}
    marg2 = {v: zero for v in range(m)}
    for (u, v), w in table.items():
        marg1[u] = marg1[u] + w
        marg2[v] = marg2[v] + w
    worst, bad = math.inf, None
    for u in range(m):
        for v in range(m):
            diff = table.get((u, v), zero) - marg1[u] * marg2[v]
            if not diff.is_exact_zero:
                d = diff.ord()
                if d < worst:
                    worst, bad = d, (u, v)
    if bad is None:
        return Verdict(True)
    return Verdict(False, worst, "increment pair %r" % (bad,))
