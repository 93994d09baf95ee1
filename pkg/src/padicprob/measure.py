"""K_s-valued measures on the depth-N ball ring.

A measure is determined by its leaf values; evaluation on any clopen set
is the sum over its leaves, which makes additivity structural.  The
measure norm ||A|| collapses ultrametrically to the max of the leaf norms
(the brute-force sup over all ring subsets is kept as a test oracle).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from .clopen import Ball, ClopenSet, DepthSpace
from .errors import (BudgetExceeded, DomainError, NormNotOne, PrimeClash,
                     ScenarioParseError, SpaceMismatch)
from .scalar import NormValue, ScalarKs


def _as_scalar(value, s: int) -> ScalarKs:
    if isinstance(value, ScalarKs):
        if value.s != s:
            raise PrimeClash("scalar prime %d, measure prime %d" % (value.s, s))
        return value
    return ScalarKs.exact(value, s)


class Measure:
    """Additive K_s-valued set function on the depth-N ball ring of Z_p."""

    __slots__ = ("space", "s", "leaf_values")

    def __init__(self, space: DepthSpace, s: int,
                 leaf_values: Mapping[int, object]) -> None:
        if s == space.prime:
            # allowed in general, but Haar-type constructions reject it;
            # the ring itself carries no constraint
            pass
        self.space = space
        self.s = s
        zero = ScalarKs.exact(0, s)
        values: Dict[int, ScalarKs] = {}
        for x in space.leaves():
            v = leaf_values.get(x)
            values[x] = zero if v is None else _as_scalar(v, s)
        self.leaf_values = values

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, space: DepthSpace, s: int) -> "Measure":
        return cls(space, s, {})

    @classmethod
    def point_mass(cls, space: DepthSpace, s: int, x: int) -> "Measure":
        return cls(space, s, {x % space.leaf_count: 1})

    # -- evaluation ---------------------------------------------------------

    def _check_set(self, A: ClopenSet) -> None:
        A.check_depth(self.space)

    def evaluate(self, A: ClopenSet) -> ScalarKs:
        self._check_set(A)
        total = ScalarKs.exact(0, self.s)
        for x in A.leaf_residues(self.space):
            total = total + self.leaf_values[x]
        return total

    def evaluate_ball(self, b: Ball) -> ScalarKs:
        return self.evaluate(ClopenSet.from_ball(b))

    def total(self) -> ScalarKs:
        return self.evaluate(self.space.whole())

    def mu_norm(self, A: ClopenSet) -> NormValue:
        """||A||_mu = sup |mu(B)| over ring subsets B of A = max leaf norm."""
        self._check_set(A)
        best = NormValue.zero(self.s)
        for x in A.leaf_residues(self.space):
            n = self.leaf_values[x].norm()
            if n > best:
                best = n
        return best

    def n_mu(self, x: int) -> NormValue:
        """Pointwise norm N_mu(x): at finite depth, the norm of the leaf of x."""
        return self.leaf_values[x % self.space.leaf_count].norm()

    def mu_norm_bruteforce(self, A: ClopenSet) -> NormValue:
        """Independent oracle: sup over ALL subsets of A's leaves of |sum|.

        Exponential in the leaf count; only for small spaces.
        """
        self._check_set(A)
        leaves = list(A.leaf_residues(self.space))
        if len(leaves) > 16:
            raise BudgetExceeded("brute-force norm over %d leaves" % len(leaves))
        best = NormValue.zero(self.s)
        for r in range(1, len(leaves) + 1):
            for combo in itertools.combinations(leaves, r):
                total = ScalarKs.exact(0, self.s)
                for x in combo:
                    total = total + self.leaf_values[x]
                n = total.norm()
                if n > best:
                    best = n
        return best

    # -- derived measures ----------------------------------------------------

    def translate(self, x: int) -> "Measure":
        """Pushforward under y -> y + x: value at leaf a is mu({a - x})."""
        m = self.space.leaf_count
        return Measure(self.space, self.s,
                       {a: self.leaf_values[(a - x) % m] for a in self.space.leaves()})

    def scale(self, c) -> "Measure":
        c = _as_scalar(c, self.s)
        return Measure(self.space, self.s,
                       {x: v * c for x, v in self.leaf_values.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, Measure) and other.space == self.space
                and other.s == self.s
                and all(other.leaf_values[x] == self.leaf_values[x]
                        for x in self.space.leaves()))

    __hash__ = None

    def __repr__(self) -> str:
        return "Measure(p=%d, N=%d, s=%d)" % (
            self.space.prime, self.space.depth, self.s)


def haar(space: DepthSpace, s: int) -> Measure:
    """The translation-invariant probability measure: every leaf gets p^(-N)."""
    if s == space.prime:
        raise PrimeClash("Haar needs s != p so that |p^(-n)|_s = 1")
    w = Fraction(1, space.leaf_count)
    return Measure(space, s, {x: w for x in space.leaves()})


class StepFunction:
    """A finite K_s-linear combination of indicators of a clopen partition."""

    __slots__ = ("space", "s", "pieces")

    def __init__(self, space: DepthSpace, s: int,
                 pieces: Iterable[Tuple[ClopenSet, object]]) -> None:
        self.space = space
        self.s = s
        norm_pieces = []
        seen = set()
        for A, v in pieces:
            A.check_depth(space)
            leaves = set(A.leaf_residues(space))
            if leaves & seen:
                raise DomainError("step-function pieces overlap")
            seen |= leaves
            norm_pieces.append((A, _as_scalar(v, s)))
        if seen != set(space.leaves()):
            raise DomainError("step-function pieces must partition the space")
        self.pieces = tuple(norm_pieces)

    @classmethod
    def constant(cls, space: DepthSpace, s: int, value) -> "StepFunction":
        return cls(space, s, [(space.whole(), value)])

    @classmethod
    def indicator(cls, space: DepthSpace, s: int, A: ClopenSet) -> "StepFunction":
        rest = A.complement_in(space)
        pieces = [(A, 1)] if rest.is_empty else [(A, 1), (rest, 0)]
        if A.is_empty:
            pieces = [(rest, 0)]
        return cls(space, s, pieces)

    @classmethod
    def from_leaves(cls, space: DepthSpace, s: int,
                    values: Mapping[int, object]) -> "StepFunction":
        return cls(space, s,
                   [(ClopenSet.from_ball(space.leaf_ball(x)), values.get(x, 0))
                    for x in space.leaves()])

    def value_at(self, x: int) -> ScalarKs:
        for A, v in self.pieces:
            if A.contains_leaf(x, self.space):
                return v
        raise DomainError("leaf %d not covered" % x)


def integrate(f: StepFunction, mu: Measure) -> ScalarKs:
    """sum f(piece) * mu(piece); bounded by max |f| |mu(piece)| ultrametrically."""
    if f.space != mu.space or f.s != mu.s:
        raise SpaceMismatch("step function and measure live on different spaces")
    total = ScalarKs.exact(0, mu.s)
    for A, v in f.pieces:
        total = total + v * mu.evaluate(A)
    return total


class ExtendedMeasure:
    """A measure extended by one atom outside the space (probability trick)."""

    __slots__ = ("base", "atom")

    def __init__(self, base: Measure, atom: ScalarKs) -> None:
        self.base = base
        self.atom = atom

    def total(self) -> ScalarKs:
        return self.base.total() + self.atom

    def norm(self) -> NormValue:
        n = self.base.mu_norm(self.base.space.whole())
        a = self.atom.norm()
        return n if n >= a else a


def normalize_probability(mu: Measure) -> ExtendedMeasure:
    """Adjoin an atom of weight 1 - mu(X); needs ||X||_mu = 1."""
    if mu.mu_norm(mu.space.whole()) != NormValue.one(mu.s):
        raise NormNotOne("probability normalization needs ||X||_mu = 1")
    atom = ScalarKs.exact(1, mu.s) - mu.total()
    return ExtendedMeasure(mu, atom)


def density(f: StepFunction, mu: Measure) -> Measure:
    """The measure f d(mu): leaf value f(leaf) * mu(leaf)."""
    if f.space != mu.space or f.s != mu.s:
        raise SpaceMismatch("density needs a shared space")
    return Measure(mu.space, mu.s,
                   {x: f.value_at(x) * mu.leaf_values[x]
                    for x in mu.space.leaves()})


class ProductMeasure:
    """A measure on a finite product of leaf spaces, stored leaf-tuple-wise."""

    __slots__ = ("spaces", "s", "values")

    def __init__(self, spaces: Sequence[DepthSpace], s: int,
                 values: Mapping[Tuple[int, ...], object]) -> None:
        self.spaces = tuple(spaces)
        self.s = s
        zero = ScalarKs.exact(0, s)
        full: Dict[Tuple[int, ...], ScalarKs] = {}
        for key in itertools.product(*(sp.leaves() for sp in self.spaces)):
            v = values.get(key)
            full[key] = zero if v is None else _as_scalar(v, s)
        self.values = full

    @property
    def arity(self) -> int:
        return len(self.spaces)

    def tuple_count(self) -> int:
        n = 1
        for sp in self.spaces:
            n *= sp.leaf_count
        return n

    def evaluate_rectangle(self, sets: Sequence[ClopenSet]) -> ScalarKs:
        if len(sets) != self.arity:
            raise SpaceMismatch("rectangle arity %d, product arity %d"
                                % (len(sets), self.arity))
        axes = [list(A.leaf_residues(sp)) for A, sp in zip(sets, self.spaces)]
        total = ScalarKs.exact(0, self.s)
        for key in itertools.product(*axes):
            total = total + self.values[key]
        return total

    def mu_norm_rectangle(self, sets: Sequence[ClopenSet]) -> NormValue:
        axes = [list(A.leaf_residues(sp)) for A, sp in zip(sets, self.spaces)]
        best = NormValue.zero(self.s)
        for key in itertools.product(*axes):
            n = self.values[key].norm()
            if n > best:
                best = n
        return best

    def total(self) -> ScalarKs:
        total = ScalarKs.exact(0, self.s)
        for v in self.values.values():
            total = total + v
        return total

    def marginal(self, keep: Sequence[int]) -> "ProductMeasure":
        """Pushforward under the projection onto the kept coordinates."""
        keep = tuple(keep)
        out: Dict[Tuple[int, ...], ScalarKs] = {}
        for key, v in self.values.items():
            sub = tuple(key[i] for i in keep)
            out[sub] = out.get(sub, ScalarKs.exact(0, self.s)) + v
        return ProductMeasure([self.spaces[i] for i in keep], self.s, out)

    def as_measure(self) -> Measure:
        if self.arity != 1:
            raise SpaceMismatch("only 1-fold products collapse to a Measure")
        return Measure(self.spaces[0], self.s,
                       {k[0]: v for k, v in self.values.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, ProductMeasure) and other.spaces == self.spaces
                and other.s == self.s
                and all(other.values[k] == v for k, v in self.values.items()))

    __hash__ = None


def product(measures: Sequence[Measure],
            budget: int = 10 ** 6) -> ProductMeasure:
    """The product measure: leaf-tuple value is the product of factor values."""
    if not measures:
        raise DomainError("empty product")
    s = measures[0].s
    for m in measures:
        if m.s != s:
            raise PrimeClash("product factors over different value primes")
    size = 1
    for m in measures:
        size *= m.space.leaf_count
    if size > budget:
        raise BudgetExceeded("product leaf space of size %d" % size)
    values = {}
    for key in itertools.product(*(m.space.leaves() for m in measures)):
        v = ScalarKs.exact(1, s)
        for m, x in zip(measures, key):
            v = v * m.leaf_values[x]
        values[key] = v
    return ProductMeasure([m.space for m in measures], s, values)


class ConvergenceVerdict:
    """Finite-horizon probe result; explicitly heuristic."""

    __slots__ = ("kind", "detail")

    def __init__(self, kind: str, detail: str) -> None:
        self.kind = kind  # "cauchy-to-L" or "diverging-witness"
        self.detail = detail

    @property
    def is_cauchy(self) -> bool:
        return self.kind == "cauchy-to-L"

    def __repr__(self) -> str:
        return "ConvergenceVerdict(%s: %s)" % (self.kind, self.detail)


def product_convergence_probe(totals: Sequence[ScalarKs],
                              horizon: int) -> ConvergenceVerdict:
    """Heuristic s-adic Cauchy probe on partial products of measure totals.

    The paper-level convergence statements concern infinite products; here
    we only watch the valuations of successive partial-product differences
    up to the horizon and report whether they climb.
    """
    if horizon < 2:
        raise DomainError("horizon must be >= 2")
    seq = list(totals)
    if not seq:
        raise DomainError("no totals given")
    s = seq[0].s
    partial = ScalarKs.exact(1, s)
    diffs = []
    for j in range(horizon):
        t = seq[j % len(seq)]
        nxt = partial * t
        d = nxt - partial
        diffs.append(math.inf if d.is_exact_zero else d.ord())
        partial = nxt
    if all(d == math.inf for d in diffs):
        return ConvergenceVerdict("cauchy-to-L", "all partial differences vanish")
    head = min(diffs[: horizon // 2])
    tail = min(diffs[horizon // 2:])
    if tail == math.inf or tail >= head + max(1, horizon // 4):
        return ConvergenceVerdict(
            "cauchy-to-L",
            "difference valuations climb from %s to %s" % (head, tail))
    return ConvergenceVerdict(
        "diverging-witness",
        "difference valuations stall near %s over the horizon" % tail)


class LqWeight:
    """The weight N_eta(.)^(1/q) attached to a base measure eta."""

    __slots__ = ("eta", "q")

    def __init__(self, eta: Measure, q) -> None:
        if q != math.inf and Fraction(q) < 1:
            raise DomainError("q must be >= 1 or infinity")
        self.eta = eta
        self.q = q


def lq_norm(f: StepFunction, weight: LqWeight) -> NormValue:
    """sup_t |f(t)|_s N_eta(t)^(1/q); for q = infinity the sup over finite q."""
    eta = weight.eta
    if f.space != eta.space or f.s != eta.s:
        raise SpaceMismatch("function and weight live on different spaces")
    best = NormValue.zero(f.s)
    for x in f.space.leaves():
        v = f.value_at(x).norm()
        n = eta.n_mu(x)
        if weight.q == math.inf:
            # sup over 1 <= q < infinity of n^(1/q): n at q=1 when n > 1,
            # the limit 1 when 0 < n < 1, and 0 when n = 0
            if n.is_zero:
                w = NormValue.zero(f.s)
            elif n > NormValue.one(f.s):
                w = v * n
            else:
                w = v
        else:
            w = v * n.root(weight.q)
        if w > best:
            best = w
    return best


# -- serialization -----------------------------------------------------------

_FORMAT_TAG = "padicprob-measure/1"


def measure_to_text(mu: Measure) -> str:
    lines = ["format = %s" % _FORMAT_TAG,
             "prime_p = %d" % mu.space.prime,
             "prime_s = %d" % mu.s,
             "depth = %d" % mu.space.depth]
    for x in mu.space.leaves():
        v = mu.leaf_values[x]
        f = v.as_fraction()
        lines.append("leaf %d = %d/%d" % (x, f.numerator, f.denominator))
    return "\n".join(lines) + "\n"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "." in text:
        raise ScenarioParseError("decimal floats are not accepted: %r" % text)
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def measure_from_text(text: str) -> Measure:
    header = {}
    leaves = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioParseError("expected key = value", line=lineno, column=1)
        key, val = (part.strip() for part in line.split("=", 1))
        if key.startswith("leaf "):
            leaves[int(key[5:])] = parse_rational(val)
        else:
            header[key] = val
    if header.get("format") != _FORMAT_TAG:
        raise ScenarioParseError("unknown measure format %r" % header.get("format"))
    space = DepthSpace(int(header["prime_p"]), int(header["depth"]))
    return Measure(space, int(header["prime_s"]), leaves)
