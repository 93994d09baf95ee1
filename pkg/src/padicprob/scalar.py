"""Exact p-adic and s-adic scalar arithmetic.

Values of measures live in a field K_s containing Q_s.  Two payloads are
supported: exact rationals (``fractions.Fraction``) and truncated s-adic
expansions carrying an explicit precision.  Mixed arithmetic coerces
toward the truncated side; exact operands never lose precision among
themselves.

Also here: the q-adic valuation, the p-adic fractional part, Legendre's
factorial valuation, the non-Archimedean exponential, additive characters
built from the fractional part, and arithmetic in the cyclotomic ring
Q_s(zeta_{p^k}) used by character sums.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DomainError, OrderMismatch, RadiusViolation

RationalLike = Union[int, Fraction]

#: default number of significant s-adic digits for truncated values
DEFAULT_PRECISION = 32

_INF = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _require_prime(q: int) -> None:
    if not _is_prime(q):
        raise DomainError("%r is not a prime" % (q,))


def ord_q(y: RationalLike, q: int):
    """q-adic valuation of a rational; ord(0) = +inf."""
    _require_prime(q)
    y = Fraction(y)
    if y == 0:
        return _INF
    v = 0
    num = y.numerator
    while num % q == 0:
        num //= q
        v += 1
    den = y.denominator
    while den % q == 0:
        den //= q
        v -= 1
    return v


def frac_part(y: RationalLike, p: int) -> Fraction:
    """p-adic fractional part: the element of Z[1/p] in [0,1) with |y - {y}|_p <= 1."""
    _require_prime(p)
    y = Fraction(y)
    v = ord_q(y, p)
    if v is _INF or v >= 0:
        return Fraction(0)
    k = -int(v)
    pk = p ** k
    b = y.denominator // pk  # prime to p
    c = (y.numerator * pow(b, -1, pk)) % pk
    return Fraction(c, pk)


def factorial_valuation(n: int, s: int) -> int:
    """ord_s(n!) by Legendre's sum; satisfies s^ord <= s^((n-1)/(s-1)) for n >= 1."""
    _require_prime(s)
    if n < 0:
        raise DomainError("factorial of a negative integer")
    total = 0
    power = s
    while power <= n:
        total += n // power
        power *= s
    return total


class NormValue:
    """An element of s^Z united with 0: the value group of |.|_s.

    Stored as the exponent (a Fraction, to allow the 1/q powers of L^q
    norms) or as the zero marker.  Never a float.
    """

    __slots__ = ("base", "exponent")

    def __init__(self, base: int, exponent) -> None:
        self.base = base
        self.exponent = None if exponent is None else Fraction(exponent)

    @classmethod
    def zero(cls, base: int) -> "NormValue":
        return cls(base, None)

    @classmethod
    def one(cls, base: int) -> "NormValue":
        return cls(base, 0)

    @classmethod
    def from_ord(cls, base: int, valuation) -> "NormValue":
        """|x| = base^(-ord x); ord = +inf gives the zero norm."""
        if valuation is _INF:
            return cls.zero(base)
        return cls(base, -valuation)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def _check(self, other: "NormValue") -> None:
        if not isinstance(other, NormValue) or other.base != self.base:
            raise DomainError("norm values have different bases")

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormValue):
            return NotImplemented
        return self.base == other.base and self.exponent == other.exponent

    def __hash__(self) -> int:
        return hash((self.base, self.exponent))

    def __lt__(self, other: "NormValue") -> bool:
        self._check(other)
        if self.is_zero:
            return not other.is_zero
        if other.is_zero:
            return False
        return self.exponent < other.exponent

    def __le__(self, other: "NormValue") -> bool:
        return self == other or self < other

    def __gt__(self, other: "NormValue") -> bool:
        return not self <= other

    def __ge__(self, other: "NormValue") -> bool:
        return not self < other

    def __mul__(self, other: "NormValue") -> "NormValue":
        self._check(other)
        if self.is_zero or other.is_zero:
            return NormValue.zero(self.base)
        return NormValue(self.base, self.exponent + other.exponent)

    def root(self, q) -> "NormValue":
        """The q-th root (exponent divided by q), for L^q weights."""
        if self.is_zero:
            return self
        return NormValue(self.base, self.exponent / Fraction(q))

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        return float(self.base) ** float(self.exponent)

    def __repr__(self) -> str:
        if self.is_zero:
            return "NormValue(0)"
        return "NormValue(%d^%s)" % (self.base, self.exponent)


def _unit_mod(num: int, den: int, s: int, prec: int) -> int:
    """num/den mod s^prec for den prime to s."""
    m = s ** prec
    return (num * pow(den, -1, m)) % m


class ScalarKs:
    """An element of K_s: exact rational or truncated s-adic expansion.

    Truncated values are stored as unit * s^val with the unit known modulo
    s^prec (prec significant digits).  The zero-to-precision marker has
    unit 0 and prec 0 and means ord >= val.
    """

    __slots__ = ("s", "_frac", "_val", "_unit", "_prec")

    def __init__(self) -> None:
        raise TypeError("use ScalarKs.exact / ScalarKs.truncated")

    # -- constructors ---------------------------------------------------

    @classmethod
    def _make(cls, s, frac, val, unit, prec) -> "ScalarKs":
        self = object.__new__(cls)
        self.s = s
        self._frac = frac
        self._val = val
        self._unit = unit
        self._prec = prec
        return self

    @classmethod
    def exact(cls, value: RationalLike, s: int) -> "ScalarKs":
        _require_prime(s)
        return cls._make(s, Fraction(value), None, None, None)

    @classmethod
    def truncated(cls, value: RationalLike, s: int,
                  precision: int = DEFAULT_PRECISION) -> "ScalarKs":
        """Truncate a rational to `precision` significant s-adic digits."""
        return cls.exact(value, s).truncate(precision)

    @classmethod
    def zero_to_precision(cls, s: int, abs_precision: int) -> "ScalarKs":
        """The marker for a value known to satisfy ord_s >= abs_precision."""
        _require_prime(s)
        return cls._make(s, None, abs_precision, 0, 0)

    # -- predicates and views -------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self._frac is not None

    @property
    def is_exact_zero(self) -> bool:
        return self._frac is not None and self._frac == 0

    @property
    def is_zero_marker(self) -> bool:
        return self._frac is None and self._unit == 0

    def as_fraction(self) -> Fraction:
        if not self.is_exact:
            raise DomainError("truncated value has no exact rational form")
        return self._frac

    @property
    def precision(self):
        """Significant-digit count for truncated payloads, +inf for exact."""
        return _INF if self.is_exact else self._prec

    def abs_precision(self):
        """The value is known modulo s^abs_precision (+inf for exact)."""
        if self.is_exact:
            return _INF
        return self._val + self._prec

    def ord(self):
        """s-adic valuation.  Exact for exact and truncated-nonzero payloads;
        for the zero marker only the bound ord >= val is known and the
        bound itself is returned."""
        if self.is_exact:
            return ord_q(self._frac, self.s)
        return self._val

    def ord_known_exactly(self) -> bool:
        return not self.is_zero_marker

    def ord_at_least(self, k) -> bool:
        """Certified lower bound check: ord_s(self) >= k."""
        return self.ord() >= k

    def norm(self) -> NormValue:
        if self.is_zero_marker:
            raise DomainError("norm of a value known only to precision")
        return NormValue.from_ord(self.s, self.ord())

    def digits(self) -> Sequence[int]:
        """Significant s-adic digits, least significant first."""
        if self.is_exact:
            raise DomainError("exact payloads are not stored as digits")
        out, u = [], self._unit
        for _ in range(self._prec):
            out.append(u % self.s)
            u //= self.s
        return out

    # -- conversions -----------------------------------------------------

    def truncate(self, precision: int = DEFAULT_PRECISION) -> "ScalarKs":
        """Truncated view at `precision` significant digits."""
        if precision < 1:
            raise DomainError("precision must be >= 1")
        if self.is_exact:
            f = self._frac
            if f == 0:
                return ScalarKs.zero_to_precision(self.s, precision)
            v = int(ord_q(f, self.s))
            scaled = f / Fraction(self.s) ** v
            unit = _unit_mod(scaled.numerator, scaled.denominator, self.s, precision)
            return ScalarKs._make(self.s, None, v, unit, precision)
        if self.is_zero_marker or precision >= self._prec:
            return self
        m = self.s ** precision
        u = self._unit % m
        if u == 0:
            return ScalarKs.zero_to_precision(self.s, self._val + precision)
        return ScalarKs._make(self.s, None, self._val, u, precision)

    def _as_pair(self):
        """(exact Fraction representative, absolute precision)."""
        if self.is_exact:
            return self._frac, _INF
        if self.is_zero_marker:
            return Fraction(0), self._val
        return Fraction(self._unit) * Fraction(self.s) ** self._val, self._val + self._prec

    @classmethod
    def _from_pair(cls, s: int, value: Fraction, abs_prec) -> "ScalarKs":
        if abs_prec is _INF:
            return cls.exact(value, s)
        abs_prec = int(abs_prec)
        if value == 0:
            return cls.zero_to_precision(s, abs_prec)
        v = int(ord_q(value, s))
        if v >= abs_prec:
            return cls.zero_to_precision(s, abs_prec)
        scaled = value / Fraction(s) ** v
        unit = _unit_mod(scaled.numerator, scaled.denominator, s, abs_prec - v)
        if unit == 0:
            return cls.zero_to_precision(s, abs_prec)
        return cls._make(s, None, v, unit, abs_prec - v)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "ScalarKs":
        if isinstance(other, ScalarKs):
            if other.s != self.s:
                raise DomainError("mixed primes %d and %d" % (self.s, other.s))
            return other
        if isinstance(other, (int, Fraction)):
            return ScalarKs.exact(other, self.s)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return ScalarKs.exact(self._frac + other._frac, self.s)
        a, pa = self._as_pair()
        b, pb = other._as_pair()
        return ScalarKs._from_pair(self.s, a + b, min(pa, pb))

    __radd__ = __add__

    def __neg__(self):
        if self.is_exact:
            return ScalarKs.exact(-self._frac, self.s)
        if self.is_zero_marker:
            return self
        return ScalarKs._make(self.s, None, self._val,
                              (self.s ** self._prec) - self._unit
                              if self._unit else 0, self._prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return ScalarKs.exact(self._frac * other._frac, self.s)
        if self.is_exact_zero or other.is_exact_zero:
            return ScalarKs.exact(0, self.s)
        # relative precision of the product is the min of the factors'
        rel = min(self.precision, other.precision)
        if self.is_zero_marker or other.is_zero_marker:
            va = self.ord()
            vb = other.ord()
            return ScalarKs.zero_to_precision(self.s, int(va + vb))
        a, _ = self._as_pair()
        b, _ = other._as_pair()
        value = a * b
        v = int(ord_q(value, self.s))
        return ScalarKs._from_pair(self.s, value, v + int(rel))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_exact:
            if other._frac == 0:
                raise ZeroDivisionError("division by zero in K_s")
            if self.is_exact:
                return ScalarKs.exact(self._frac / other._frac, self.s)
            return self * ScalarKs.exact(1 / other._frac, self.s)
        if other.is_zero_marker:
            raise DomainError("division by a value known only to precision")
        rel = min(self.precision, other.precision)
        if self.is_exact_zero:
            return ScalarKs.exact(0, self.s)
        if self.is_zero_marker:
            return ScalarKs.zero_to_precision(self.s, int(self.ord() - other.ord()))
        a, _ = self._as_pair()
        b, _ = other._as_pair()
        value = a / b
        v = int(ord_q(value, self.s))
        return ScalarKs._from_pair(self.s, value, v + int(rel))

    def __rtruediv__(self, other):
        return ScalarKs.exact(other, self.s) / self

    def __pow__(self, n: int):
        if n < 0:
            return (ScalarKs.exact(1, self.s) / self) ** (-n)
        out = ScalarKs.exact(1, self.s)
        for _ in range(n):
            out = out * self
        return out

    # -- comparison --------------------------------------------------------

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact and other.is_exact:
            return self._frac == other._frac
        diff = self - other
        return diff.is_exact_zero or diff.is_zero_marker

    def __hash__(self):
        if self.is_exact:
            return hash((self.s, self._frac))
        raise TypeError("truncated scalars are unhashable")

    def agrees_to(self, other, k) -> bool:
        """True when ord_s(self - other) >= k (certified)."""
        diff = self - self._coerce(other)
        if diff.is_exact_zero:
            return True
        return diff.ord() >= k

    def __repr__(self) -> str:
        if self.is_exact:
            return "ScalarKs(%s, s=%d)" % (self._frac, self.s)
        if self.is_zero_marker:
            return "ScalarKs(O(%d^%d))" % (self.s, self._val)
        return "ScalarKs(%d*%d^%d + O(%d^%d))" % (
            self._unit, self.s, self._val, self.s, self._val + self._prec)


def exp_admissible_ord(s: int) -> int:
    """Minimal valuation for which Exp converges: 1 for s >= 3, 2 for s = 2."""
    return 2 if s == 2 else 1


def exp_s(x, s: int = None, precision: int = DEFAULT_PRECISION) -> ScalarKs:
    """The non-Archimedean exponential sum_{n>=0} x^n / n!.

    Requires |x|_s < s^(1/(1-s)); integer-quantized this means
    ord_s(x) >= 1 for s >= 3 and ord_2(x) >= 2.  The result is truncated
    with error < s^(-precision); its unit digit is 1, so |Exp(x)|_s = 1.
    """
    if isinstance(x, ScalarKs):
        if s is not None and s != x.s:
            raise DomainError("prime mismatch in exp_s")
        s = x.s
    else:
        if s is None:
            raise DomainError("exp_s of a plain rational needs the prime s")
        x = ScalarKs.exact(x, s)
    if x.is_exact_zero:
        return ScalarKs.exact(1, s)
    d = x.ord()
    if x.is_zero_marker and d < precision:
        raise DomainError("exp_s argument known to insufficient precision")
    if d < exp_admissible_ord(s):
        raise RadiusViolation(
            "ord_%d = %s violates the Exp convergence bound (need >= %d)"
            % (s, d, exp_admissible_ord(s)))
    total = ScalarKs.exact(1, s)
    term = total
    n = 0
    # every term from n on has ord >= n*d - (n-1)/(s-1), which is
    # increasing for admissible d; stop once that certified bound clears
    # the target precision
    while n * d - Fraction(n - 1, s - 1) < precision:
        n += 1
        term = term * x / n
        total = total + term
    return total.truncate(precision)


class RootOfUnityExponent:
    """A p-power root of unity stored by its exponent in Z[1/p]/Z.

    The character value zeta_{p^k}^m is stored as the fraction m/p^k in
    [0,1); exponent 0 is the value 1.
    """

    __slots__ = ("p", "exponent")

    def __init__(self, p: int, exponent: RationalLike) -> None:
        _require_prime(p)
        e = Fraction(exponent) % 1
        k = 0
        den = e.denominator
        while den % p == 0:
            den //= p
            k += 1
        if den != 1:
            raise DomainError("exponent denominator must be a power of %d" % p)
        self.p = p
        self.exponent = e

    @property
    def order_exponent(self) -> int:
        """The k with zeta of order p^k (0 for the trivial character value)."""
        k, den = 0, self.exponent.denominator
        while den > 1:
            den //= self.p
            k += 1
        return k

    def combine(self, other: "RootOfUnityExponent") -> "RootOfUnityExponent":
        """Group law: multiply the root-of-unity values (add exponents mod 1)."""
        if other.p != self.p:
            raise OrderMismatch("different primes %d and %d" % (self.p, other.p))
        return RootOfUnityExponent(self.p, self.exponent + other.exponent)

    __add__ = combine

    def __eq__(self, other) -> bool:
        return (isinstance(other, RootOfUnityExponent)
                and other.p == self.p and other.exponent == self.exponent)

    def __hash__(self) -> int:
        return hash((self.p, self.exponent))

    def __repr__(self) -> str:
        return "RootOfUnityExponent(p=%d, %s)" % (self.p, self.exponent)


def character(y: RationalLike, p: int) -> RootOfUnityExponent:
    """The additive character value at y: exponent {y}_p, value 1 when |y|_p <= 1."""
    return RootOfUnityExponent(p, frac_part(y, p))


def _euler_phi_p_power(p: int, k: int) -> int:
    return 1 if k == 0 else p ** k - p ** (k - 1)


class CyclotomicScalar:
    """An element of K_s(zeta_{p^k}) over the power basis 1, zeta, ..., zeta^(phi-1).

    Multiplication reduces modulo the p^k-th cyclotomic polynomial
    1 + x^(p^(k-1)) + ... + x^((p-1)p^(k-1)).
    """

    __slots__ = ("p", "k", "s", "coeffs")

    def __init__(self, p: int, k: int, s: int,
                 coeffs: Iterable[ScalarKs]) -> None:
        _require_prime(p)
        _require_prime(s)
        phi = _euler_phi_p_power(p, k)
        coeffs = tuple(coeffs)
        if len(coeffs) != phi:
            raise DomainError("expected %d coefficients, got %d" % (phi, len(coeffs)))
        self.p, self.k, self.s = p, k, s
        self.coeffs = coeffs

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, p: int, k: int, s: int) -> "CyclotomicScalar":
        phi = _euler_phi_p_power(p, k)
        z = ScalarKs.exact(0, s)
        return cls(p, k, s, (z,) * phi)

    @classmethod
    def one(cls, p: int, k: int, s: int) -> "CyclotomicScalar":
        return cls.from_monomial(p, k, s, 0)

    @classmethod
    def from_monomial(cls, p: int, k: int, s: int, m: int) -> "CyclotomicScalar":
        """zeta_{p^k}^m reduced into the power basis."""
        out = cls.zero(p, k, s)
        return out._add_monomial(m, ScalarKs.exact(1, s))

    @classmethod
    def from_scalar(cls, value: ScalarKs, p: int, k: int) -> "CyclotomicScalar":
        out = list(cls.zero(p, k, value.s).coeffs)
        out[0] = value
        return cls(p, k, value.s, out)

    def _add_monomial(self, m: int, c: ScalarKs) -> "CyclotomicScalar":
        """self + c * zeta^m with zeta^m reduced modulo the cyclotomic polynomial."""
        p, k = self.p, self.k
        coeffs = list(self.coeffs)
        if k == 0:
            coeffs[0] = coeffs[0] + c
            return CyclotomicScalar(p, k, self.s, coeffs)
        m %= p ** k
        half = p ** (k - 1)
        q, r = divmod(m, half)
        if q <= p - 2:
            coeffs[m] = coeffs[m] + c
        else:
            # zeta^((p-1)p^(k-1)+r) = -(zeta^r + zeta^(p^(k-1)+r) + ...)
            for i in range(p - 1):
                j = i * half + r
                coeffs[j] = coeffs[j] - c
        return CyclotomicScalar(p, k, self.s, coeffs)

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "CyclotomicScalar") -> None:
        if (other.p, other.k, other.s) != (self.p, self.k, self.s):
            raise OrderMismatch("cyclotomic components do not match")

    def __add__(self, other: "CyclotomicScalar") -> "CyclotomicScalar":
        self._check(other)
        return CyclotomicScalar(
            self.p, self.k, self.s,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CyclotomicScalar":
        return CyclotomicScalar(self.p, self.k, self.s,
                                tuple(-a for a in self.coeffs))

    def __sub__(self, other: "CyclotomicScalar") -> "CyclotomicScalar":
        return self + (-other)

    def scale(self, c) -> "CyclotomicScalar":
        if not isinstance(c, ScalarKs):
            c = ScalarKs.exact(c, self.s)
        return CyclotomicScalar(self.p, self.k, self.s,
                                tuple(a * c for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (ScalarKs, int, Fraction)):
            return self.scale(other)
        self._check(other)
        out = CyclotomicScalar.zero(self.p, self.k, self.s)
        for i, a in enumerate(self.coeffs):
            if a.is_exact_zero:
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_exact_zero:
                    continue
                out = out._add_monomial(i + j, a * b)
        return out

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, CyclotomicScalar):
            return NotImplemented
        self._check(other)
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __repr__(self) -> str:
        return "CyclotomicScalar(p=%d, k=%d, %r)" % (self.p, self.k, self.coeffs)


def cyclo_embed(e: RootOfUnityExponent, p: int, k: int, s: int) -> CyclotomicScalar:
    """Embed a root-of-unity exponent into the order-p^k cyclotomic ring."""
    if e.p != p:
        raise OrderMismatch("character prime %d does not divide order %d^%d"
                            % (e.p, p, k))
    j = e.order_exponent
    if j > k:
        raise OrderMismatch("order p^%d does not divide p^%d" % (j, k))
    m = int(e.exponent * p ** k)  # exponent has denominator p^j | p^k
    return CyclotomicScalar.from_monomial(p, k, s, m)
