"""Exact and certified-precision numerical kernel.

Two kinds of numbers flow through the package:

* exact rationals -- plain ``fractions.Fraction`` (aliased ``ExactRational``),
  always in lowest terms with positive denominator;
* ``ApproxReal`` -- an interval enclosure of a real number together with the
  precision it was requested at.  The true value is guaranteed to lie inside
  the enclosure.  Arithmetic is outward-rounded interval arithmetic (mpmath's
  interval context); series truncations contribute explicit remainder
  intervals, so the error bound is rigorous, not estimated.

The transcendental evaluations provided here are the digamma function at
positive rationals (upward recurrence past a threshold, then the Stirling-type
asymptotic series whose remainder is bounded by the first omitted term),
integer zeta values (Euler-Maclaurin with the same first-omitted-term bound),
and logarithms (delegated to interval arithmetic).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import mpmath
from mpmath import bernfrac

from .errors import ArgumentTooSmall, NonPositiveArgument, ZeroArgument

ExactRational = Fraction

#: guard bits added on top of the requested precision for all interval work
GUARD_BITS = 32

# One process-wide interval context.  Precision is raised temporarily around
# each computation; enclosures stay valid whatever the rounding precision is.
_iv = mpmath.MPIntervalContext()
_iv.prec = 64

_mp = mpmath.mp  # plain context, used only to format midpoints/radii


class _workprec:
    """Temporarily raise the interval context precision."""

    def __init__(self, bits: int):
        self.bits = max(bits, 64)

    def __enter__(self):
        self.saved = _iv.prec
        if _iv.prec < self.bits:
            _iv.prec = self.bits
        return _iv

    def __exit__(self, *exc):
        _iv.prec = self.saved
        return False


def _iv_from_fraction(q: Fraction):
    return _iv.mpf(q.numerator) / _iv.mpf(q.denominator)


def _to_interval(x):
    if isinstance(x, ApproxReal):
        return x.ival
    if isinstance(x, Fraction):
        return _iv_from_fraction(x)
    if isinstance(x, int):
        return _iv.mpf(x)
    raise TypeError(f"cannot mix ApproxReal with {type(x)!r}")


def _raw_endpoints(ival):
    """The two endpoint mpf values of an interval, exactly (no rounding)."""
    lo_raw, hi_raw = ival._mpi_
    return _mp.make_mpf(lo_raw), _mp.make_mpf(hi_raw)


def _endpoint_fraction(endpoint) -> Fraction:
    """Exact rational value of an interval endpoint (zero-width ivmpf or mpf)."""
    raw = endpoint._mpf_ if hasattr(endpoint, "_mpf_") else endpoint._mpi_[0]
    sign, man, exp, _ = raw
    man = int(man)
    if sign:
        man = -man
    return Fraction(man) * Fraction(2) ** exp


@dataclass(frozen=True)
class ApproxReal:
    """A certified enclosure of a real number.

    ``ival`` is an interval containing the true value; ``precision_bits`` is
    the precision the value was requested at (the enclosure is usually much
    tighter than 2**-precision_bits unless a series truncation dominates).
    """

    ival: object
    precision_bits: int

    # -- accessors -----------------------------------------------------------
    @property
    def value(self):
        """Midpoint of the enclosure as an mpmath float."""
        lo, hi = _raw_endpoints(self.ival)
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            return (lo + hi) / 2

    @property
    def error_bound(self):
        """Half-width of the enclosure (absolute, same units as value).

        Rounded up by one working-precision ulp so it never understates."""
        lo, hi = _raw_endpoints(self.ival)
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            rad = abs(hi - lo) / 2
            return rad * (1 + mpmath.mpf(2) ** (-(self.precision_bits + GUARD_BITS - 2)))

    @property
    def lo(self):
        return _raw_endpoints(self.ival)[0]

    @property
    def hi(self):
        return _raw_endpoints(self.ival)[1]

    def __float__(self):
        return float(self.value)

    def contains(self, x) -> bool:
        if hasattr(x, "_mpf_"):
            sign, man, exp, _ = x._mpf_
            q = Fraction(-int(man) if sign else int(man)) * Fraction(2) ** exp
        else:
            q = Fraction(x)
        lo, hi = _raw_endpoints(self.ival)
        return _endpoint_fraction(lo) <= q <= _endpoint_fraction(hi)

    def encloses(self, other: "ApproxReal") -> bool:
        """True if the other enclosure lies entirely inside this one."""
        return self.ival.a <= other.ival.a and other.ival.b <= self.ival.b

    def __repr__(self):
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            return f"{mpmath.nstr(self.value, 20)} ± {mpmath.nstr(self.error_bound, 3)}"

    def str_with_error(self, digits: int = 20) -> str:
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            return f"{mpmath.nstr(self.value, digits)} ± {mpmath.nstr(self.error_bound, 3)}"

    def value_str(self, digits: int | None = None) -> str:
        """Decimal midpoint at (by default) the full requested precision."""
        if digits is None:
            digits = int(self.precision_bits * 0.30103) + 2
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            return mpmath.nstr(self.value, digits)

    def error_str(self) -> str:
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            return mpmath.nstr(self.error_bound, 3)

    # -- arithmetic ----------------------------------------------------------
    def _wp(self, other=None) -> int:
        p = self.precision_bits
        if isinstance(other, ApproxReal):
            p = max(p, other.precision_bits)
        return p + GUARD_BITS

    def _bin(self, other, op):
        with _workprec(self._wp(other)):
            return ApproxReal(op(self.ival, _to_interval(other)),
                              self.precision_bits if not isinstance(other, ApproxReal)
                              else max(self.precision_bits, other.precision_bits))

    def __add__(self, other):
        return self._bin(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._bin(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._bin(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._bin(other, lambda a, b: b / a)

    def __neg__(self):
        with _workprec(self._wp()):
            return ApproxReal(-self.ival, self.precision_bits)

    def __abs__(self):
        with _workprec(self._wp()):
            return ApproxReal(abs(self.ival), self.precision_bits)

    @staticmethod
    def from_fraction(q: Fraction, precision_bits: int) -> "ApproxReal":
        with _workprec(precision_bits + GUARD_BITS):
            return ApproxReal(_iv_from_fraction(Fraction(q)), precision_bits)

    @staticmethod
    def exact_int(n: int, precision_bits: int) -> "ApproxReal":
        with _workprec(precision_bits + GUARD_BITS):
            return ApproxReal(_iv.mpf(n), precision_bits)


def log_of(x, precision_bits: int) -> ApproxReal:
    """Certified natural logarithm of a positive int, Fraction or ApproxReal."""
    with _workprec(precision_bits + GUARD_BITS):
        ival = _to_interval(x if not isinstance(x, ApproxReal) else x)
        if ival.a <= 0:
            raise NonPositiveArgument(f"log of non-positive value {x}")
        return ApproxReal(_iv.log(ival), precision_bits)


def log2_constant(precision_bits: int) -> ApproxReal:
    return log_of(2, precision_bits)


# ---------------------------------------------------------------------------
# integer / prime utilities
# ---------------------------------------------------------------------------

def lcm_upto(m: int) -> int:
    """lcm[1, 2, ..., m]; lcm of the empty tail for m = 1 is 1."""
    if m < 1:
        raise NonPositiveArgument("lcm_upto requires m >= 1")
    v = 1
    for i in range(2, m + 1):
        v = v * i // gcd(v, i)
    return v


_SIEVE = bytearray(b"\x00\x00\x01")   # primality flags up to its length - 1
_SIEVE_LIMIT = 2


def _extend_sieve(n: int) -> None:
    global _SIEVE, _SIEVE_LIMIT
    if n <= _SIEVE_LIMIT:
        return
    n = max(n, 2 * _SIEVE_LIMIT, 1024)
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p:: p] = b"\x00" * len(range(p * p, n + 1, p))
    _SIEVE = sieve
    _SIEVE_LIMIT = n


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    _extend_sieve(n)
    return [p for p in range(2, n + 1) if _SIEVE[p]]


def primes_in(lo, hi) -> list[int]:
    """Ascending primes p with lo < p <= hi (half-open on the left)."""
    if hi < 0:
        raise NonPositiveArgument("primes_in requires hi >= 0")
    hi_int = int(hi)
    if Fraction(hi_int) > Fraction(hi):
        hi_int -= 1
    if hi_int < 2:
        return []
    _extend_sieve(hi_int)
    lo_f = Fraction(lo)
    return [p for p in range(2, hi_int + 1) if _SIEVE[p] and p > lo_f]


def primes_in_sqrt_range(lower_sq: int, hi: int) -> list[int]:
    """Ascending primes p with p*p > lower_sq and p <= hi, all exact."""
    if hi < 2:
        return []
    _extend_sieve(hi)
    return [p for p in range(2, hi + 1) if _SIEVE[p] and p * p > lower_sq]


def p_adic_valuation(x: Fraction, p: int) -> int:
    """v_p(x) for a nonzero rational x."""
    if x == 0:
        raise ZeroArgument("p-adic valuation of 0 is undefined here")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# digamma and zeta with certified remainders
# ---------------------------------------------------------------------------

_BERN: list[tuple[int, int]] = []


def _bern_coeffs(count: int) -> list[tuple[int, int]]:
    # (numerator, denominator) of B_{2k}/(2k) for k = 1..count
    while len(_BERN) < count:
        k = len(_BERN) + 1
        p, q = bernfrac(2 * k)
        g = gcd(p, q * 2 * k)
        _BERN.append((p // g, q * 2 * k // g))
    return _BERN[:count]


#: smallest argument at which the asymptotic series is applied
DIGAMMA_SHIFT_THRESHOLD = 16
#: base number of asymptotic terms; extended adaptively for high precision
DIGAMMA_BASE_TERMS = 8

_digamma_cache: dict[tuple[int, int, int], ApproxReal] = {}


def digamma(x: Fraction, precision_bits: int = 128) -> ApproxReal:
    """psi(x) for rational x > 0 with a certified absolute error bound.

    Upward recurrence psi(x+1) = psi(x) + 1/x shifts the argument above
    DIGAMMA_SHIFT_THRESHOLD (scaled up with precision); the asymptotic series
    psi(z) = log z - 1/(2z) - sum B_{2k}/(2k z^{2k}) is then truncated once
    the next term drops below the target, and that first omitted term bounds
    the remainder (the series envelopes its limit for real z > 0).
    """
    x = Fraction(x)
    if x <= 0:
        raise NonPositiveArgument(f"digamma requires x > 0, got {x}")
    key = (x.numerator, x.denominator, precision_bits)
    hit = _digamma_cache.get(key)
    if hit is not None:
        return hit

    wp = precision_bits + GUARD_BITS
    threshold = max(DIGAMMA_SHIFT_THRESHOLD, wp // 8)
    num, den = x.numerator, x.denominator

    # recurrence part, summed exactly: sum of den/(num + m*den) while below
    # threshold; one rational, converted to an interval once
    shift_sum = Fraction(0)
    n0 = num
    while n0 < threshold * den:
        shift_sum += Fraction(den, n0)
        n0 += den

    with _workprec(wp):
        z = _iv.mpf(n0) / _iv.mpf(den)
        res = _iv.log(z) - 1 / (2 * z)
        z2 = z * z
        zpow = z2
        target = _iv.mpf(2) ** (-(wp - 8))
        plus_minus = _iv.mpf([-1, 1])
        coeffs = _bern_coeffs(max(DIGAMMA_BASE_TERMS, 8) + 4)
        k = 0
        while True:
            if k >= len(coeffs) - 1:
                coeffs = _bern_coeffs(len(coeffs) * 2)
            p, q = coeffs[k]
            res -= _iv.mpf(p) / (_iv.mpf(q) * zpow)
            zpow *= z2
            pn, qn = coeffs[k + 1]
            nxt = abs(_iv.mpf(pn)) / (_iv.mpf(qn) * zpow)
            k += 1
            if (bool(nxt.b < target.a) and k >= DIGAMMA_BASE_TERMS) or k > 4 * wp:
                res += nxt * plus_minus
                break
        if shift_sum:
            res -= _iv_from_fraction(shift_sum)
        out = ApproxReal(res, precision_bits)
    _digamma_cache[key] = out
    return out


_zeta_cache: dict[tuple[int, int], ApproxReal] = {}


def zeta_value(i: int, precision_bits: int = 128) -> ApproxReal:
    """zeta(i) for integer i >= 2, Euler-Maclaurin with certified remainder.

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_k B_{2k}/(2k)! (s)_{2k-1} N^(1-s-2k) + R,
    |R| bounded by the first omitted term (enveloping for real s > 0).
    """
    if i < 2:
        raise ArgumentTooSmall("zeta_value requires i >= 2")
    key = (i, precision_bits)
    hit = _zeta_cache.get(key)
    if hit is not None:
        return hit

    wp = precision_bits + GUARD_BITS
    N = max(16, wp // 4)
    with _workprec(wp):
        s = i
        acc = _iv.mpf(0)
        for n in range(1, N):
            acc += _iv.mpf(1) / _iv.mpf(n) ** s
        Nint = _iv.mpf(N)
        acc += Nint ** (1 - s) / (s - 1) + Nint ** (-s) / 2
        # Bernoulli tail: term_k = B_{2k}/(2k)! * (s)_{2k-1} * N^{1-s-2k}
        target = _iv.mpf(2) ** (-(wp - 8))
        plus_minus = _iv.mpf([-1, 1])
        # exact rational term prefactors, evaluated incrementally
        poch = Fraction(s)            # (s)_{2k-1} for k=1 is s
        fact = Fraction(2)            # (2k)! for k=1
        k = 1
        while True:
            bp, bq = bernfrac(2 * k)
            coef = Fraction(bp, bq) / fact * poch
            term = _iv_from_fraction(coef) * Nint ** (1 - s - 2 * k)
            acc += term
            # next term as remainder bound
            poch_next = poch * (s + 2 * k - 1) * (s + 2 * k)
            fact_next = fact * (2 * k + 1) * (2 * k + 2)
            bp2, bq2 = bernfrac(2 * k + 2)
            coef2 = abs(Fraction(bp2, bq2)) / fact_next * poch_next
            nxt = abs(_iv_from_fraction(coef2) * Nint ** (1 - s - 2 * k - 2))
            if bool(nxt.b < target.a) or k > 2 * wp:
                acc += nxt * plus_minus
                break
            poch, fact, k = poch_next, fact_next, k + 1
        out = ApproxReal(acc, precision_bits)
    _zeta_cache[key] = out
    return out
