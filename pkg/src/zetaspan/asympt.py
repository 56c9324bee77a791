"""Growth constants of the linear forms and their adjusted versions.

alpha is the exponential decay rate of the linear forms, beta the growth
rate of their coefficients.  When every denominator factor appears once
(s = J), alpha has a closed form through the unique positive root x0 of the
saddle-point polynomial

    (2r+M+X)(r+X) prod_j (r+delta_j+X)  -  X (r+M+X) prod_j (r+M-delta_j+X),

located here by bisection with exact integer-polynomial sign evaluations.
For general s the decay rate comes from maximising a product of beta-type
densities over the unit cube (numeric, multistart; not certified).

beta always has the closed formula

    beta = (2r+M) log(r + M/2) - M log(M/2) + log2 * (s/J) * sum_j (M - 2 delta_j).

The criterion consumes the adjusted values
alpha_hat = alpha - (s/J) varpi + (s/J) sum_j max(M-2 delta_1, M-delta_j),
and the same shift for beta_hat (lcm growth is e^m, the prime factor grows
like e^(varpi n)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParams, NoSignChange, NonConvergence
from .exact import ApproxReal, GUARD_BITS, _iv, _workprec, log_of
from .params import ParamSet, require_valid


@dataclass
class GrowthConstants:
    alpha: ApproxReal
    beta: ApproxReal
    varpi: ApproxReal
    alpha_hat: ApproxReal
    beta_hat: ApproxReal
    x0: ApproxReal | None = None
    alpha_certified: bool = True


def _poly_mul(A: list[int], B: list[int]) -> list[int]:
    C = [0] * (len(A) + len(B) - 1)
    for i, a in enumerate(A):
        if a:
            for j, b in enumerate(B):
                C[i + j] += a * b
    return C


def saddle_polynomial(p: ParamSet) -> list[int]:
    """Integer coefficients (ascending) of the saddle-point polynomial."""
    if p.r is None:
        raise InvalidParams("r required")
    r, M = p.r, p.M
    P1 = _poly_mul([2 * r + M, 1], [r, 1])
    for d in p.deltas:
        P1 = _poly_mul(P1, [r + d, 1])
    P2 = _poly_mul([0, 1], [r + M, 1])
    for d in p.deltas:
        P2 = _poly_mul(P2, [r + M - d, 1])
    n = max(len(P1), len(P2))
    P1 += [0] * (n - len(P1))
    P2 += [0] * (n - len(P2))
    return [a - b for a, b in zip(P1, P2)]


def _poly_sign(coeffs: list[int], x: Fraction) -> int:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return (acc > 0) - (acc < 0)


def alpha_closed_form(p: ParamSet, precision_bits: int = 128) -> tuple[ApproxReal, ApproxReal]:
    """(x0, alpha) via the saddle-point root; requires s == J.

    x0 is isolated by exact bisection on [0, 2r+M] (error NoSignChange when
    the bracket endpoints agree in sign, which signals parameters violating
    the degree condition).  alpha is assembled from certified logarithms.
    """
    require_valid(p)
    if p.s is not None and p.s != p.J:
        raise InvalidParams("closed form requires per-factor exponent s/J = 1")
    if p.r is None:
        raise InvalidParams("r required")
    r, M = p.r, p.M
    poly = saddle_polynomial(p)
    lo, hi = Fraction(0), Fraction(2 * r + M)
    s_lo, s_hi = _poly_sign(poly, lo), _poly_sign(poly, hi)
    if s_lo == 0:
        raise NoSignChange("polynomial vanishes at 0")
    if s_lo * s_hi >= 0:
        raise NoSignChange(f"no sign change on [0, {2 * r + M}]")
    bits_needed = precision_bits + 16 + (2 * r + M).bit_length()
    for _ in range(bits_needed):
        mid = (lo + hi) / 2
        s_mid = _poly_sign(poly, mid)
        if s_mid == 0:
            lo = hi = mid
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid

    wp = precision_bits + GUARD_BITS
    with _workprec(wp):
        lo_iv = _iv.mpf(lo.numerator) / _iv.mpf(lo.denominator)
        hi_iv = _iv.mpf(hi.numerator) / _iv.mpf(hi.denominator)
        x0_iv = lo_iv + (hi_iv - lo_iv) * _iv.mpf([0, 1])   # hull of [lo, hi]
        acc = _iv.mpf(0)
        for d in p.deltas:
            acc += (M - 2 * d) * _iv.log(_iv.mpf(M - 2 * d))
        acc += (2 * r + M) * _iv.log(2 * r + M + x0_iv)
        acc += r * _iv.log(r + x0_iv)
        acc -= (r + M) * _iv.log(r + M + x0_iv)
        for d in p.deltas:
            acc += (r + d) * _iv.log(r + d + x0_iv)
            acc -= (r + M - d) * _iv.log(r + M - d + x0_iv)
        return ApproxReal(x0_iv, precision_bits), ApproxReal(acc, precision_bits)


def _logF_and_grad(z: np.ndarray, r: int, M: int, deltas, e: int):
    """log of the maximised density and its gradient, reduced variables.

    z[0] is the numerator variable (exponents r and M); z[1+j] the shared
    value of the s/J copies in group j (exponents r+delta_j, M-2 delta_j);
    the coupling is through the product z0 * prod z_j^e.
    """
    z0 = z[0]
    zz = z[1:]
    logP = np.log(z0) + e * np.sum(np.log(zz))
    P = np.exp(logP)
    W = -np.expm1(logP)           # 1 - P, accurate near P ~ 1
    f = (r * np.log(z0) + M * np.log1p(-z0)
         + e * np.sum((r + np.asarray(deltas)) * np.log(zz)
                      + (M - 2 * np.asarray(deltas)) * np.log1p(-zz))
         - (2 * r + M) * np.log(W))
    g = np.empty_like(z)
    g[0] = r / z0 - M / (1 - z0) + (2 * r + M) * (P / z0) / W
    g[1:] = (e * (r + np.asarray(deltas)) / zz
             - e * (M - 2 * np.asarray(deltas)) / (1 - zz)
             + (2 * r + M) * e * (P / zz) / W)
    return f, g


def alpha_via_maximization(p: ParamSet, precision_bits: int = 128,
                           starts: int = 8, seed: int = 12345) -> ApproxReal:
    """alpha = (2r+M)log(2r+M) - M log M + log max F by damped ascent.

    Multistart L-BFGS on the symmetry-reduced problem (one variable per
    delta group).  The result is labelled non-certified: its error bound is
    a heuristic spread estimate, not an enclosure.
    """
    require_valid(p)
    if p.s is None or p.r is None:
        raise InvalidParams("s and r required")
    r, M, e = p.r, p.M, p.exponent
    deltas = np.asarray(p.deltas, dtype=float)
    dim = 1 + p.J
    rng = np.random.default_rng(seed)
    eps = 1e-12
    best = None
    results = []
    for trial in range(starts):
        if trial == 0:
            x0 = np.full(dim, 0.5)
        elif trial == 1:
            # beta-density modes ignoring the coupling term
            x0 = np.empty(dim)
            x0[0] = r / (r + M) if r else 0.5
            x0[1:] = (r + deltas) / (r + M - deltas)
            x0 = np.clip(x0, 0.05, 0.95)
        else:
            x0 = rng.uniform(0.05, 0.95, dim)
        res = minimize(lambda z: tuple(-v for v in _logF_and_grad(z, r, M, p.deltas, e)),
                       x0, jac=True, method="L-BFGS-B",
                       bounds=[(eps, 1 - eps)] * dim,
                       options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12})
        if np.isfinite(res.fun):
            results.append((-res.fun, res.x))
            if best is None or -res.fun > best[0]:
                best = (-res.fun, res.x)
    if best is None:
        raise NonConvergence("all maximisation starts failed")
    top = sorted((v for v, _ in results), reverse=True)
    spread = abs(top[0] - top[min(2, len(top) - 1)]) if len(top) > 1 else 0.0
    log_max_F = best[0]
    with _workprec(precision_bits + GUARD_BITS):
        val = ((2 * r + M) * _iv.log(_iv.mpf(2 * r + M)) - M * _iv.log(_iv.mpf(M))
               + _iv.mpf(log_max_F))
        slack = max(spread, 1e-9 * (1 + abs(log_max_F)))
        val += _iv.mpf([-slack, slack])
        return ApproxReal(val, precision_bits)


def beta_formula(p: ParamSet, precision_bits: int = 128) -> ApproxReal:
    """(2r+M) log(r+M/2) - M log(M/2) + log2 * (s/J) * sum (M - 2 delta_j).

    Accepts r = 0, where it degenerates to the pure log2 term."""
    if p.s is None or p.r is None:
        raise InvalidParams("s and r required")
    if p.r < 0 or p.s % p.J:
        raise InvalidParams("r >= 0 and J | s required")
    r, M, e = p.r, p.M, p.exponent
    with _workprec(precision_bits + GUARD_BITS):
        half_M = Fraction(M, 2)
        b = ((2 * r + M) * log_of(Fraction(r) + half_M, precision_bits).ival
             - M * log_of(half_M, precision_bits).ival
             + _iv.log(_iv.mpf(2)) * (e * p.sum_m2d))
        return ApproxReal(b, precision_bits)


def adjust(alpha: ApproxReal, beta: ApproxReal, p: ParamSet,
           varpi: ApproxReal) -> tuple[ApproxReal, ApproxReal]:
    """alpha_hat, beta_hat: subtract (s/J) varpi, add (s/J) sum_j M_j."""
    e = p.exponent
    shift = sum(p.M_j)
    alpha_hat = alpha - varpi * e + e * shift
    beta_hat = beta - varpi * e + e * shift
    return alpha_hat, beta_hat


def growth_constants(p: ParamSet, varpi: ApproxReal,
                     precision_bits: int = 128) -> GrowthConstants:
    """Bundle alpha (closed form when s == J, else numeric), beta and the
    adjusted pair."""
    x0 = None
    certified = True
    if p.s is not None and p.s == p.J:
        x0, alpha = alpha_closed_form(p, precision_bits)
    else:
        alpha = alpha_via_maximization(p, precision_bits)
        certified = False
    beta = beta_formula(p, precision_bits)
    alpha_hat, beta_hat = adjust(alpha, beta, p, varpi)
    return GrowthConstants(alpha=alpha, beta=beta, varpi=varpi,
                           alpha_hat=alpha_hat, beta_hat=beta_hat,
                           x0=x0, alpha_certified=certified)
