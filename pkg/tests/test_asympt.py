"""Tests for the growth-constant computations."""

import math
from fractions import Fraction as Q

import numpy as np
import pytest

from zetaspan.asympt import (adjust, alpha_closed_form, alpha_via_maximization,
                             beta_formula, growth_constants, saddle_polynomial)
from zetaspan.errors import NoSignChange
from zetaspan.exact import ApproxReal
from zetaspan.params import ParamSet, PRESETS, default_r
from zetaspan.stepphi import varpi_for_params

SMALL = ParamSet(5, (1, 1, 2, 2), s=4, r=1, include_numerator_bricks=True)


def test_saddle_polynomial_leading_coefficient():
    # leading terms cancel; the next coefficient is 2r - sum(M-2d)
    p = SMALL
    poly = saddle_polynomial(p)
    assert poly[-1] == 0
    assert poly[-2] == 2 * p.r - p.sum_m2d


def test_alpha_closed_form_small_cross_validates():
    x0, alpha = alpha_closed_form(SMALL, 128)
    assert float(x0.lo) > 0
    amax = alpha_via_maximization(SMALL, 64)
    assert abs(float(alpha.value) - float(amax.value)) <= 1e-6 * abs(float(alpha.value))


def test_alpha_closed_form_large_cross_validates():
    # the 76-delta instance: 77-variable maximisation against the root form
    p = PRESETS["m444-numerator"]
    _, alpha = alpha_closed_form(p, 96)
    amax = alpha_via_maximization(p, 64)
    assert abs(float(alpha.value) - float(amax.value)) <= 1e-6 * abs(float(alpha.value))


def test_alpha_closed_form_no_sign_change():
    # M=1, delta=(0), r=1: (3+X)(1+X)^2 - X(2+X)^2 = X^2 + 3X + 3 has no
    # positive root, so the bracket [0, 2r+M] shows no sign change
    from zetaspan.asympt import _poly_sign
    p = ParamSet(1, (0,), r=1)
    poly = saddle_polynomial(p)
    assert poly == [3, 3, 1, 0]    # X^2 + 3X + 3 with the cancelled top term
    assert _poly_sign(poly, Q(0)) > 0 and _poly_sign(poly, Q(3)) > 0
    with pytest.raises(NoSignChange):
        alpha_closed_form(p, 64)


def test_bisection_brackets_exact_sign_change():
    from zetaspan.asympt import _poly_sign
    from zetaspan.exact import _endpoint_fraction
    poly = saddle_polynomial(SMALL)
    x0, _ = alpha_closed_form(SMALL, 96)
    lo = _endpoint_fraction(x0.ival.a)
    hi = _endpoint_fraction(x0.ival.b)
    assert 0 < lo <= hi
    assert _poly_sign(poly, lo) != _poly_sign(poly, hi) or lo == hi


def test_beta_formula_degenerate_r0():
    # r = 0 reduces beta to log2 * (s/J) * sum(M-2d)
    p = ParamSet(6, (0, 1), s=4, r=0)
    b = beta_formula(p, 128)
    expect = math.log(2) * 2 * 10
    assert abs(float(b.value) - expect) < 1e-12


def test_adjust_zero_deltas_recovers_plain_lcm_shift():
    p = ParamSet(6, (0,) * 2, s=4, r=2)
    w = ApproxReal.exact_int(0, 128)
    alpha = ApproxReal.exact_int(-5, 128)
    beta = ApproxReal.exact_int(7, 128)
    ah, bh = adjust(alpha, beta, p, w)
    # alpha_hat = alpha + s*M since every M_j = M
    assert float((ah - alpha).value) == p.s * p.M
    assert float((bh - beta).value) == p.s * p.M


def test_adjust_matches_explicit_formula_numbers():
    p = PRESETS["m444-numerator"]
    w = ApproxReal.exact_int(0, 64)
    alpha = ApproxReal.exact_int(0, 64)
    beta = ApproxReal.exact_int(0, 64)
    ah, _ = adjust(alpha, beta, p, w)
    assert float(ah.value) == sum(max(442, 444 - d) for d in p.deltas) == 33597


def test_F_corner_convention_and_maximizer_interior():
    # the coupled density is 0 at the all-ones corner by convention
    def F_value(z, r, M, deltas, e):
        z = np.asarray(z, dtype=float)
        if np.all(z == 1.0):
            return 0.0
        z0, zz = z[0], z[1:]
        P = z0 * np.prod(zz ** e)
        return (z0 ** r * (1 - z0) ** M
                * np.prod(zz ** (e * (r + np.asarray(deltas)))
                          * (1 - zz) ** (e * (M - 2 * np.asarray(deltas))))
                / (1 - P) ** (2 * r + M))
    p = SMALL
    assert F_value(np.ones(1 + p.J), p.r, p.M, p.deltas, 1) == 0.0
    a = alpha_via_maximization(p, 64)
    assert math.isfinite(float(a.value))


def test_growth_constants_certified_flag():
    p = ParamSet(6, (0, 1), s=8, r=2)
    w = varpi_for_params(p, 96)
    g = growth_constants(p, w, 96)
    assert g.x0 is None and not g.alpha_certified
    g2 = growth_constants(SMALL, varpi_for_params(SMALL, 96), 96)
    assert g2.x0 is not None and g2.alpha_certified


def test_beta_trend_toward_5log2():
    # M=6, deltas=(0,1): beta(s)/(5 s log2) -> 1 from above as s grows
    vals = []
    for s in (100, 1000, 10_000):
        p = ParamSet(6, (0, 1), s=s, r=default_r(s))
        b = beta_formula(p, 64)
        vals.append(float(b.value) / (5 * s * math.log(2)))
    assert vals[0] > vals[1] > vals[2] > 1
