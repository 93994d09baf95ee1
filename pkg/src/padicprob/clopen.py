"""The covering ring of clopen subsets of Z_p at finite depth.

Balls are residue classes a + p^n Z_p; a clopen set is a canonical finite
disjoint union of balls.  Two balls are either disjoint or nested, which
every algorithm here exploits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple

from .errors import DepthExceeded, DomainError, ScenarioParseError, SpaceMismatch
from .scalar import _require_prime


@dataclass(frozen=True)
class DepthSpace:
    """Z_p truncated at refinement depth N: p^N leaves partition the space."""

    prime: int
    depth: int

    def __post_init__(self) -> None:
        _require_prime(self.prime)
        if self.depth < 1:
            raise DomainError("depth must be >= 1")

    @property
    def leaf_count(self) -> int:
        return self.prime ** self.depth

    def leaves(self) -> range:
        return range(self.leaf_count)

    def leaf_ball(self, x: int) -> "Ball":
        return Ball(self.prime, self.depth, x % self.leaf_count)

    def whole(self) -> "ClopenSet":
        return ClopenSet(self.prime, (Ball(self.prime, 0, 0),))

    def empty(self) -> "ClopenSet":
        return ClopenSet(self.prime, ())


@dataclass(frozen=True)
class Ball:
    """The ball residue + p^level Z_p."""

    prime: int
    level: int
    residue: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise DomainError("negative ball level")
        if not 0 <= self.residue < self.prime ** self.level:
            raise DomainError("residue %d not reduced mod %d^%d"
                              % (self.residue, self.prime, self.level))

    def contains(self, other: "Ball") -> bool:
        return (other.level >= self.level
                and other.residue % self.prime ** self.level == self.residue)

    def intersect(self, other: "Ball"):
        """Dichotomy: the deeper ball when nested, None when disjoint."""
        if self.contains(other):
            return other
        if other.contains(self):
            return self
        return None

    def children(self, to_level: int) -> Tuple["Ball", ...]:
        if to_level < self.level:
            raise DomainError("target level above the ball level")
        step = self.prime ** self.level
        return tuple(Ball(self.prime, to_level, self.residue + k * step)
                     for k in range(self.prime ** (to_level - self.level)))

    def leaf_residues(self, depth: int) -> range:
        step = self.prime ** self.level
        return range(self.residue, self.prime ** depth, step)

    def translate(self, x: int) -> "Ball":
        """The ball shifted by -x: (a - x) + p^level Z_p."""
        m = self.prime ** self.level
        return Ball(self.prime, self.level, (self.residue - x) % m)

    def notation(self) -> str:
        return "%d+%d^%d" % (self.residue, self.prime, self.level)


_BALL_RE = re.compile(r"^\s*(\d+)\+(\d+)\^(\d+)\s*$")


def parse_ball(text: str, prime: int = None) -> Ball:
    """Parse the textual notation "a+p^n", e.g. "3+2^2" for 3 + 4 Z_2."""
    m = _BALL_RE.match(text)
    if not m:
        raise ScenarioParseError("bad ball notation %r (expected a+p^n)" % text)
    a, p, n = (int(g) for g in m.groups())
    if prime is not None and p != prime:
        raise ScenarioParseError("ball prime %d differs from space prime %d"
                                 % (p, prime))
    return Ball(p, n, a % p ** n)


def _canonicalize(prime: int, balls: Iterable[Ball]) -> Tuple[Ball, ...]:
    # drop balls nested inside coarser ones
    kept = []
    for b in sorted(set(balls), key=lambda b: (b.level, b.residue)):
        if not any(k.contains(b) for k in kept):
            kept.append(b)
    # merge complete sibling families into their parent, deepest first
    changed = True
    while changed:
        changed = False
        by_parent = {}
        for b in kept:
            if b.level == 0:
                continue
            parent = Ball(prime, b.level - 1, b.residue % prime ** (b.level - 1))
            by_parent.setdefault(parent, []).append(b)
        for parent, sibs in by_parent.items():
            if len(sibs) == prime:
                for b in sibs:
                    kept.remove(b)
                kept.append(parent)
                changed = True
    return tuple(sorted(kept, key=lambda b: (b.level, b.residue)))


class ClopenSet:
    """A canonical finite disjoint union of balls of one prime."""

    __slots__ = ("prime", "balls")

    def __init__(self, prime: int, balls: Iterable[Ball]) -> None:
        balls = tuple(balls)
        for b in balls:
            if b.prime != prime:
                raise SpaceMismatch("ball prime %d in a %d-adic set" % (b.prime, prime))
        self.prime = prime
        self.balls = _canonicalize(prime, balls)

    @classmethod
    def from_ball(cls, b: Ball) -> "ClopenSet":
        return cls(b.prime, (b,))

    @property
    def is_empty(self) -> bool:
        return not self.balls

    def max_level(self) -> int:
        return max((b.level for b in self.balls), default=0)

    def check_depth(self, space: DepthSpace) -> None:
        if self.prime != space.prime:
            raise SpaceMismatch("set prime %d, space prime %d"
                                % (self.prime, space.prime))
        if self.max_level() > space.depth:
            raise DepthExceeded("ball level %d beyond depth %d"
                                % (self.max_level(), space.depth))

    def leaf_residues(self, space: DepthSpace) -> Iterator[int]:
        self.check_depth(space)
        for b in self.balls:
            yield from b.leaf_residues(space.depth)

    def contains_leaf(self, x: int, space: DepthSpace) -> bool:
        self.check_depth(space)
        return any(x % self.prime ** b.level == b.residue for b in self.balls)

    # -- ring operations -------------------------------------------------

    def _check(self, other: "ClopenSet") -> None:
        if not isinstance(other, ClopenSet) or other.prime != self.prime:
            raise SpaceMismatch("clopen sets over different primes")

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        out = []
        for a in self.balls:
            for b in other.balls:
                c = a.intersect(b)
                if c is not None:
                    out.append(c)
        return ClopenSet(self.prime, out)

    def union(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        return ClopenSet(self.prime, self.balls + other.balls)

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        pieces = list(self.balls)
        for b in other.balls:
            nxt = []
            for a in pieces:
                nxt.extend(_ball_minus_ball(a, b))
            pieces = nxt
        return ClopenSet(self.prime, pieces)

    def complement_in(self, space: DepthSpace) -> "ClopenSet":
        self.check_depth(space)
        return space.whole().difference(self)

    def translate(self, x: int) -> "ClopenSet":
        """The set A - x, ball by ball."""
        return ClopenSet(self.prime, (b.translate(x) for b in self.balls))

    def __eq__(self, other) -> bool:
        return (isinstance(other, ClopenSet) and other.prime == self.prime
                and other.balls == self.balls)

    def __hash__(self) -> int:
        return hash((self.prime, self.balls))

    def notation(self) -> str:
        return " ".join(b.notation() for b in self.balls) if self.balls else "(empty)"

    def __repr__(self) -> str:
        return "ClopenSet[%s]" % self.notation()


def _ball_minus_ball(a: Ball, b: Ball) -> Tuple[Ball, ...]:
    if b.contains(a):
        return ()
    if not a.contains(b):
        return (a,)
    # b sits strictly inside a: peel off the p-1 siblings of b's ancestor
    # at every level between a.level+1 and b.level
    out = []
    p = a.prime
    for level in range(a.level + 1, b.level + 1):
        anchor = b.residue % p ** level
        parent_res = anchor % p ** (level - 1)
        step = p ** (level - 1)
        for k in range(p):
            r = parent_res + k * step
            if r != anchor:
                out.append(Ball(p, level, r))
    return tuple(out)


def refine(b: Ball, to_level: int, space: DepthSpace) -> Tuple[Ball, ...]:
    """The p^(m - level) children of b partitioning it at level m <= depth."""
    if to_level > space.depth:
        raise DepthExceeded("level %d beyond depth %d" % (to_level, space.depth))
    if b.prime != space.prime:
        raise SpaceMismatch("ball prime %d, space prime %d" % (b.prime, space.prime))
    return b.children(to_level)
