"""Tests for the exact/certified numerical kernel."""

import math
import random
from fractions import Fraction as Q

import mpmath
import pytest

from zetaspan.errors import ArgumentTooSmall, NonPositiveArgument, ZeroArgument
from zetaspan.exact import (ApproxReal, digamma, lcm_upto, log_of,
                            p_adic_valuation, primes_in, primes_in_sqrt_range,
                            zeta_value)


def test_lcm_upto_small():
    assert lcm_upto(1) == 1
    assert lcm_upto(6) == 60


def test_lcm_upto_oracle():
    # iterated gcd/lcm fold
    expect = 1
    for i in range(2, 21):
        expect = expect * i // math.gcd(expect, i)
    assert lcm_upto(20) == expect == 232792560


def test_lcm_requires_positive():
    with pytest.raises(NonPositiveArgument):
        lcm_upto(0)


def _sieve_oracle(n):
    flags = [True] * (n + 1)
    flags[0] = flags[1] = False
    for p in range(2, int(n ** 0.5) + 1):
        if flags[p]:
            for m in range(p * p, n + 1, p):
                flags[m] = False
    return [p for p in range(2, n + 1) if flags[p]]


def test_primes_in_examples():
    assert primes_in(2.4, 10) == [3, 5, 7]
    assert primes_in(10, 10) == []


def test_primes_in_sqrt600_count():
    # oracle-computed: pi(600) - pi(isqrt(600)) = 109 - 9 = 100
    oracle = [p for p in _sieve_oracle(600) if p * p > 600]
    got = primes_in_sqrt_range(600, 600)
    assert got == oracle
    assert len(got) == 100


def test_p_adic_examples():
    assert p_adic_valuation(Q(12), 2) == 2
    assert p_adic_valuation(Q(4, 9), 3) == -2
    assert p_adic_valuation(Q(7), 5) == 0
    with pytest.raises(ZeroArgument):
        p_adic_valuation(Q(0), 3)


def test_p_adic_multiplicativity_and_lcm_valuation():
    rng = random.Random(4)
    for _ in range(100):
        x = Q(rng.randint(1, 500), rng.randint(1, 500)) * rng.choice([1, -1])
        y = Q(rng.randint(1, 500), rng.randint(1, 500))
        for p in (2, 3, 5, 7):
            assert p_adic_valuation(x * y, p) == p_adic_valuation(x, p) + p_adic_valuation(y, p)
    for m in (2, 10, 30, 100):
        D = Q(lcm_upto(m))
        for p in (2, 3, 5, 7, 11):
            if p <= m:
                assert p_adic_valuation(D, p) == int(math.log(m) / math.log(p))


def _euler_gamma_bracket(N=200_000):
    """Elementary-series enclosure of the Euler-Mascheroni constant.

    gamma = sum_{k>=1} (1/k - log(1+1/k)); the tail after N lies in
    (1/(2(N+1)) - 1/(6 N^2), 1/(2N)).  Float summation via fsum; the slop
    covers per-term rounding generously.
    """
    terms = [1.0 / k - math.log1p(1.0 / k) for k in range(1, N + 1)]
    partial = math.fsum(terms)
    slop = 5e-12
    lo = partial + 1.0 / (2 * (N + 1)) - 1.0 / (6 * N * N) - slop
    hi = partial + 1.0 / (2 * N) + slop
    return lo, hi


def test_digamma_at_one_vs_gamma_series_oracle():
    lo, hi = _euler_gamma_bracket()
    d = digamma(Q(1), 128)
    v = float(d.value)
    assert -hi <= v <= -lo
    assert float(d.error_bound) < 1e-35
    # the first digits of the example
    assert abs(v - (-0.5772156649)) < 1e-9


def test_digamma_half_identity():
    # psi(1/2) = -gamma - 2 log 2, gamma from the same series oracle
    lo, hi = _euler_gamma_bracket()
    d = digamma(Q(1, 2), 128)
    v = float(d.value)
    assert -hi - 2 * math.log(2) - 1e-10 <= v <= -lo - 2 * math.log(2) + 1e-10
    assert abs(v - (-1.9635100260)) < 1e-9


def test_digamma_reference_combination():
    combo = (digamma(Q(1, 5)) - digamma(Q(1, 6)) + digamma(Q(2, 5)) - digamma(Q(1, 3))
             + digamma(Q(3, 5)) - digamma(Q(1, 2)) + digamma(Q(4, 5)) - digamma(Q(3, 4)))
    assert abs(float(combo.value) - 2.157479) < 1e-5


def test_digamma_requires_positive():
    with pytest.raises(NonPositiveArgument):
        digamma(Q(0))
    with pytest.raises(NonPositiveArgument):
        digamma(Q(-3, 2))


def test_digamma_recurrence_property():
    rng = random.Random(7)
    for _ in range(100):
        x = Q(rng.randint(1, 3000), rng.randint(1, 300))
        if x >= 10:
            x = x % 10 + Q(1, 7)
        a = digamma(x + 1, 96)
        b = digamma(x, 96)
        gap = a - b - ApproxReal.from_fraction(Q(1) / x, 96)
        assert float(abs(gap).hi) <= float(a.error_bound) + float(b.error_bound) + 1e-25


def test_zeta_values_vs_independent_oracles():
    # zeta(2) = pi^2/6 with pi from interval arithmetic
    z2 = zeta_value(2, 128)
    with mpmath.workprec(200):
        assert abs(float(z2.value - mpmath.pi ** 2 / 6)) < 1e-35
    # zeta(3) by the accelerated alternating series 5/2 sum (-1)^(n-1)/(n^3 C(2n,n))
    z3 = zeta_value(3, 128)
    acc = Q(0)
    binom = 2  # C(2,1)
    for n in range(1, 40):
        acc += Q((-1) ** (n - 1), n ** 3 * binom)
        binom = binom * (2 * n + 1) * (2 * n + 2) // ((n + 1) * (n + 1))
    # alternating: truncation error below the first omitted term
    tail = Q(1, 40 ** 3 * binom)
    est = Q(5, 2) * acc
    assert abs(float(z3.value) - float(est)) < float(Q(5, 2) * tail) + 1e-30


def test_zeta_60_tail_bound():
    from zetaspan.exact import _endpoint_fraction
    z = zeta_value(60, 128)
    assert z.contains(Q(1)) is False
    assert Q(1) < _endpoint_fraction(z.ival.a)
    assert _endpoint_fraction(z.ival.b) < 1 + 2 * Q(2) ** -60


def test_zeta_requires_two():
    with pytest.raises(ArgumentTooSmall):
        zeta_value(1)


def test_approxreal_interval_arithmetic_contains_truth():
    rng = random.Random(9)
    for _ in range(50):
        a = Q(rng.randint(-50, 50), rng.randint(1, 50))
        b = Q(rng.randint(1, 50), rng.randint(1, 50))
        A = ApproxReal.from_fraction(a, 64)
        B = ApproxReal.from_fraction(b, 64)
        assert (A + B).contains(a + b)
        assert (A - B).contains(a - b)
        assert (A * B).contains(a * b)
        assert (A / B).contains(a / b)


def test_enclosures_nest_at_higher_precision():
    # same pipeline at 64 and 128 bits: the tighter enclosure nests inside
    def pipeline(prec):
        return (digamma(Q(2, 5), prec) - digamma(Q(1, 3), prec)) * 3 \
            + zeta_value(3, prec) / 7
    low, high = pipeline(64), pipeline(128)
    assert low.encloses(high)
    assert float(high.error_bound) < float(low.error_bound)


def test_log_of_exact_and_positive_only():
    l2 = log_of(2, 128)
    assert abs(float(l2.value) - math.log(2)) < 1e-15
    # a float approximation of log 2 is ~1e-17 off, far outside the certified
    # window, so membership must be rejected; a 200-bit value lies inside
    assert not l2.contains(math.log(2))
    with mpmath.workprec(200):
        assert l2.contains(mpmath.log(2))
    with pytest.raises(NonPositiveArgument):
        log_of(Q(0), 64)
