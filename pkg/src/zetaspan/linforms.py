"""Rational-function linear forms in odd zeta values, exactly.

The rational function attached to (M, deltas, s, r) at level n is a product
of elementary factors ("bricks"):

* one linear factor 2t + Mn;
* 2r numerator factors (t + a)_n / n!  (rising factorials of length n);
* per delta_j, a reciprocal rising factorial
  ((M-2 delta_j) n)! / (t + delta_j n)_{(M-2 delta_j) n + 1}
  raised to the power s/J.

Everything downstream is exact rational arithmetic: the partial-fraction
coefficients a[i][k] fall out of truncated power-series expansions of the
brick product around each pole -k (order s); the linear-form coefficients
rho_i are row sums of the table and rho_0 a weighted triple sum; the common
prime factor Phi_n is a product of primes p with exponent phi(n/p).
The integrality of Phi_n^{-s/J} D^{s-i} a[i][k] and of the rho's against the
corresponding lcm products, the coefficient symmetry under k -> Mn - k, and
the support law are all verified by exact computation, never numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import random

from .errors import InvalidParams, PreconditionViolation, SymmetryViolation
from .exact import (ApproxReal, GUARD_BITS, _iv, _iv_from_fraction, _workprec,
                    lcm_upto, primes_in_sqrt_range, p_adic_valuation, zeta_value)
from .params import ParamSet, require_valid
from .stepphi import arc_system, phi_terms

LINEAR = "linear"
NUM_POCH = "num_poch"      # (t + a)_m / m!
DEN_POCH = "den_poch"      # (b - a)! / (t + a)_{b - a + 1}


@dataclass(frozen=True)
class Brick:
    kind: str
    a: int = 0          # offset (num) / start (den); unused for linear
    b: int = 0          # length m (num) / end (den)
    exponent: int = 1


@dataclass(frozen=True)
class RationalFunctionInstance:
    params: ParamSet
    n: int
    bricks: tuple[Brick, ...]
    normalization: Fraction = Fraction(1)   # bricks carry all normalisation

    @property
    def pole_range(self) -> range:
        d1 = self.params.deltas[0]
        return range(d1 * self.n, (self.params.M - d1) * self.n + 1)


@dataclass
class PartialFractionTable:
    n: int
    s: int
    M: int
    delta1: int
    entries: dict[int, dict[int, Fraction]]   # i -> {k: a[i][k]}, zeros omitted

    def a(self, i: int, k: int) -> Fraction:
        return self.entries.get(i, {}).get(k, Fraction(0))

    def serialize(self) -> str:
        lines = []
        for i in sorted(self.entries):
            for k in sorted(self.entries[i]):
                c = self.entries[i][k]
                lines.append(f"{i}\t{k}\t{c.numerator}\t{c.denominator}")
        return "\n".join(lines) + "\n"


@dataclass
class LinearFormValue:
    rho: dict[int, Fraction]          # 0 and odd i in [3, s-1]
    S: ApproxReal | None = None
    Phi: int | None = None


def build_instance(p: ParamSet, n: int) -> RationalFunctionInstance:
    """Brick decomposition of the rational function at level n."""
    require_valid(p)
    if p.s is None or p.r is None:
        raise InvalidParams("build_instance requires s and r")
    if n < 1:
        raise InvalidParams("n >= 1 required")
    M, r, e = p.M, p.r, p.exponent
    bricks: list[Brick] = [Brick(LINEAR)]
    for nu in range(r):
        bricks.append(Brick(NUM_POCH, a=-(r - nu) * n, b=n))
        bricks.append(Brick(NUM_POCH, a=(M + nu) * n + 1, b=n))
    for d in p.deltas:
        bricks.append(Brick(DEN_POCH, a=d * n, b=(M - d) * n, exponent=e))
    return RationalFunctionInstance(p, n, tuple(bricks))


def evaluate_instance(inst: RationalFunctionInstance, t: Fraction) -> Fraction:
    """Exact value of the rational function at a non-pole rational t."""
    n, M = inst.n, inst.params.M
    val = Fraction(1)
    for br in inst.bricks:
        if br.kind == LINEAR:
            val *= 2 * t + M * n
        elif br.kind == NUM_POCH:
            x = Fraction(1)
            for l in range(br.b):
                x *= t + br.a + l
            val *= x / _factorial(br.b)
        else:
            x = Fraction(1)
            for l in range(br.b - br.a + 1):
                x *= t + br.a + l
            val *= (Fraction(_factorial(br.b - br.a)) / x) ** br.exponent
    return val * inst.normalization


_fact_cache: list[int] = [1, 1]


def _factorial(k: int) -> int:
    while len(_fact_cache) <= k:
        _fact_cache.append(_fact_cache[-1] * len(_fact_cache))
    return _fact_cache[k]


# ---------------------------------------------------------------------------
# truncated power series around a pole (exact rationals)
# ---------------------------------------------------------------------------

def _series_mul(A: list[Fraction], B: list[Fraction], L: int) -> list[Fraction]:
    C = [Fraction(0)] * min(L, len(A) + len(B) - 1)
    for i, a in enumerate(A):
        if not a:
            continue
        lim = min(len(B), L - i)
        for j in range(lim):
            C[i + j] += a * B[j]
    return C


def _series_pow(A: list[Fraction], e: int, L: int) -> list[Fraction]:
    out = [Fraction(1)]
    for _ in range(e):
        out = _series_mul(out, A, L)
    return out


def _poly_prod_series(cs: list[int], L: int) -> list[Fraction]:
    """Coefficients of prod_l (u + c_l) in u, truncated to length L."""
    e = [Fraction(0)] * L
    e[0] = Fraction(1)
    top = 0
    for c in cs:
        top = min(top + 1, L - 1)
        for d in range(top, 0, -1):
            e[d] = e[d] * c + e[d - 1]
        e[0] *= c
    return e


def _inv_prod_series(cs: list[int], L: int) -> list[Fraction]:
    """Coefficients of prod_l 1/(u + c_l), c_l != 0, truncated to length L.

    Power sums of the 1/c_l feed Newton's identities for the complete
    homogeneous symmetric functions h_d:  prod 1/(1 + u/c_l) =
    sum_d (-u)^d h_d; the overall 1/prod(c_l) factors out.
    """
    P = [Fraction(0)] * L
    for c in cs:
        x = Fraction(1, c)
        xt = x
        for t in range(1, L):
            P[t] += xt
            xt *= x
    h = [Fraction(1)] + [Fraction(0)] * (L - 1)
    for d in range(1, L):
        acc = Fraction(0)
        for t in range(1, d + 1):
            acc += P[t] * h[d - t]
        h[d] = acc / d
    pc = 1
    for c in cs:
        pc *= c
    return [(-1) ** d * h[d] / pc for d in range(L)]


def _pole_series(inst: RationalFunctionInstance, k: int) -> list[Fraction]:
    """Taylor coefficients (length s) of R(t) * (t+k)^s at t = -k."""
    p, n = inst.params, inst.n
    M, s = p.M, p.s
    L = s
    nfact = _factorial(n)
    total = [Fraction(M * n - 2 * k), Fraction(2)][:L] if L > 1 else [Fraction(M * n - 2 * k)]
    for br in inst.bricks:
        if br.kind == LINEAR:
            continue
        if br.kind == NUM_POCH:
            cs = [br.a + l - k for l in range(br.b)]
            ser = [c / nfact for c in _poly_prod_series(cs, L)]
        else:
            span = br.b - br.a
            lstar = k - br.a
            cs = [br.a + l - k for l in range(span + 1)]
            if 0 <= lstar <= span:
                del cs[lstar]
                ser = _inv_prod_series(cs, L)
            else:
                ser = [Fraction(0)] + _inv_prod_series(cs, L)[: L - 1]
            f = _factorial(span)
            ser = [c * f for c in ser]
            if br.exponent != 1:
                ser = _series_pow(ser, br.exponent, L)
        total = _series_mul(total, ser, L)
    while len(total) < L:
        total.append(Fraction(0))
    return total


def partial_fractions(inst: RationalFunctionInstance,
                      jobs: int = 1) -> PartialFractionTable:
    """Exact coefficients a[i][k] with R(t) = sum a[i][k]/(t+k)^i.

    a[i][k] is the coefficient of (t+k)^(s-i) in the expansion of
    R(t)(t+k)^s around -k; each pole is independent (parallelisable).
    """
    p, n = inst.params, inst.n
    if inst.params.degree_at(n) > -2:
        raise InvalidParams("degree <= -2 required for a pure pole expansion")
    ks = list(inst.pole_range)
    if jobs > 1:
        from multiprocessing import Pool
        with Pool(jobs) as pool:
            rows = pool.starmap(_pole_series, [(inst, k) for k in ks], chunksize=8)
    else:
        rows = [_pole_series(inst, k) for k in ks]
    entries: dict[int, dict[int, Fraction]] = {}
    for k, coeffs in zip(ks, rows):
        for i in range(1, p.s + 1):
            c = coeffs[p.s - i]
            if c:
                entries.setdefault(i, {})[k] = c
    return PartialFractionTable(n=n, s=p.s, M=p.M, delta1=p.deltas[0], entries=entries)


def rho_coefficients(table: PartialFractionTable) -> LinearFormValue:
    """Row sums rho_i and the constant term rho_0, with vanishing checks."""
    rho: dict[int, Fraction] = {}
    for i in range(1, table.s + 1):
        v = sum(table.entries.get(i, {}).values(), Fraction(0))
        if (i % 2 == 0 or i == 1) and v != 0:
            raise SymmetryViolation(f"rho_{i} = {v} != 0")
        if i % 2 and i >= 3:
            rho[i] = v
    rho0 = Fraction(0)
    for i, row in table.entries.items():
        H = Fraction(0)
        prev_k = 0
        for k in sorted(row):
            for l in range(prev_k + 1, k + 1):
                H += Fraction(1, l ** i)
            prev_k = k
            rho0 -= row[k] * H
    rho[0] = rho0
    return LinearFormValue(rho=rho)


# ---------------------------------------------------------------------------
# the series S_n and its certified tail
# ---------------------------------------------------------------------------

def _term_ratio_polys(inst: RationalFunctionInstance) -> tuple[list[int], list[int]]:
    """Integer polynomials (P, Q) in nu with R(nu+1)/R(nu) = P(nu)/Q(nu)."""
    p, n = inst.params, inst.n
    M, r, e = p.M, p.r, p.exponent

    def mul(A, B):
        C = [0] * (len(A) + len(B) - 1)
        for i, a in enumerate(A):
            for j, b in enumerate(B):
                C[i + j] += a * b
        return C

    P = [M * n + 2, 2]                       # 2(nu+1) + Mn
    P = mul(P, [0, 1])                       # nu
    P = mul(P, [M * n + r * n + 1, 1])       # nu + Mn + rn + 1
    Q = [M * n, 2]                           # 2 nu + Mn
    Q = mul(Q, [-r * n, 1])                  # nu - rn
    Q = mul(Q, [M * n + 1, 1])               # nu + Mn + 1
    for d in p.deltas:
        for _ in range(e):
            P = mul(P, [d * n, 1])                       # nu + d n
            Q = mul(Q, [(M - d) * n + 1, 1])             # nu + (M-d) n + 1
    return P, Q


def _poly_eval(coeffs: list[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _shift_nonneg(coeffs: list[int], N: int) -> bool:
    """True if the polynomial has all coefficients >= 0 after x -> x + N,
    hence is >= 0 on [N, infinity)."""
    c = list(coeffs)
    deg = len(c) - 1
    for i in range(deg):            # synthetic Taylor shift by N
        for j in range(deg - 1, i - 1, -1):
            c[j] += N * c[j + 1]
    return all(x >= 0 for x in c)


def series_Sn(inst: RationalFunctionInstance, precision_bits: int = 128) -> ApproxReal:
    """sum over nu >= 1 of R(nu), with a certified tail bound.

    R vanishes at nu = 1..rn, so summation starts at rn+1; terms update by
    the exact one-step ratio.  The tail after N is bounded by 2 R(N) N once
    R(nu) nu^2 is certified non-increasing on [N, inf) (an exact polynomial
    non-negativity check after a Taylor shift).
    """
    p, n = inst.params, inst.n
    if inst.params.degree_at(n) > -2:
        raise InvalidParams("series requires degree <= -2")
    r = p.r
    start = r * n + 1
    term = evaluate_instance(inst, Fraction(start))
    Pnum, Qden = _term_ratio_polys(inst)
    # Delta(nu) = nu^2 Q(nu) - (nu+1)^2 P(nu) >= 0  <=>  R(nu) nu^2 non-increasing
    delta = [0, 0] + Qden
    delta.extend([0] * (len(Pnum) + 2 - len(delta)))
    for i, c in enumerate(Pnum):     # subtract (nu^2 + 2nu + 1) P
        delta[i + 2] -= c
        delta[i + 1] -= 2 * c
        delta[i] -= c

    wp = precision_bits + GUARD_BITS
    target = Fraction(1, 1 << (wp - 8))

    acc = Fraction(0)
    nu = start
    N_floor = max(4 * (2 * r + p.M) * n, start + 1)
    bound = None
    while True:
        acc += term
        term *= Fraction(_poly_eval(Pnum, nu), _poly_eval(Qden, nu))
        nu += 1
        if nu >= N_floor:
            bound = 2 * term * nu
            if bound < target:
                break
    while not _shift_nonneg(delta, nu):
        # defensive: extend until the monotonicity certificate holds
        acc += term
        term *= Fraction(_poly_eval(Pnum, nu), _poly_eval(Qden, nu))
        nu += 1
        bound = 2 * term * nu
    with _workprec(wp):
        total = _iv_from_fraction(acc) + _iv_from_fraction(bound) * _iv.mpf([0, 1])
        return ApproxReal(total, precision_bits)


# ---------------------------------------------------------------------------
# the common prime factor Phi_n
# ---------------------------------------------------------------------------

def phi_factor(p: ParamSet, n: int) -> int:
    """Product over primes sqrt(base*n) < p <= (M - 2 delta_1) n of
    p^(phi(n/p)); base is M, or 2r+M when numerator bricks contribute."""
    if n < 1:
        raise InvalidParams("n >= 1 required")
    base = (2 * p.r + p.M) if p.include_numerator_bricks else p.M
    hi = (p.M - 2 * p.deltas[0]) * n
    sys = arc_system(phi_terms(p))
    out = 1
    for prime in primes_in_sqrt_range(base * n, hi):
        e = sys.value_at(Fraction(n % prime, prime))
        if e:
            out *= prime ** e
    return out


# ---------------------------------------------------------------------------
# exact verification of the arithmetic guarantees
# ---------------------------------------------------------------------------

@dataclass
class ArithmeticReport:
    n: int
    ok: bool
    Phi: int
    checks: dict[str, bool]
    failures: list[str] = field(default_factory=list)
    consistency_gap: ApproxReal | None = None

    def summary(self) -> str:
        lines = [f"n={self.n}  Phi_n={self.Phi}  overall={'PASS' if self.ok else 'FAIL'}"]
        for name, good in self.checks.items():
            lines.append(f"  {name}: {'pass' if good else 'FAIL'}")
        lines.extend(f"  ! {f}" for f in self.failures)
        return "\n".join(lines)


def _offending_prime(x: Fraction) -> str:
    d = x.denominator
    f = 2
    while f * f <= d:
        if d % f == 0:
            return f"v_{f} = {p_adic_valuation(x, f)}"
        f += 1
    return f"v_{d} = {p_adic_valuation(x, d)}"


def verify_arithmetic(p: ParamSet, n: int,
                      table: PartialFractionTable | None = None,
                      forms: LinearFormValue | None = None) -> ArithmeticReport:
    """Exact integrality, symmetry and support checks at level n (n > s^2)."""
    require_valid(p)
    if n <= p.s * p.s:
        raise PreconditionViolation(f"n = {n} <= s^2 = {p.s * p.s}")
    inst = build_instance(p, n)
    if table is None:
        table = partial_fractions(inst)
    if forms is None:
        forms = rho_coefficients(table)

    e = p.exponent
    Phi = phi_factor(p, n)
    D = lcm_upto((p.M - 2 * p.deltas[0]) * n)
    Dpowers = {i: D ** (p.s - i) for i in range(1, p.s + 1)}
    PhiE = Fraction(Phi) ** e
    checks: dict[str, bool] = {}
    failures: list[str] = []

    ok = True
    for i in range(1, p.s + 1):
        for k, c in table.entries.get(i, {}).items():
            if (c * Dpowers[i] / PhiE).denominator != 1:
                ok = False
                failures.append(f"a[{i}][{k}] not integral: {_offending_prime(c * Dpowers[i] / PhiE)}")
    checks["entry integrality (Phi^-e D^(s-i) a)"] = ok

    sym = True
    Mn = p.M * n
    for i in range(1, p.s + 1):
        row = table.entries.get(i, {})
        for k, c in row.items():
            if row.get(Mn - k, Fraction(0)) != (-1) ** (i + 1) * c:
                sym = False
                failures.append(f"symmetry broken at (i={i}, k={k})")
    checks["symmetry a[i][k] = (-1)^(i+1) a[i][Mn-k]"] = sym

    supp = True
    for i in range(1, p.s + 1):
        js = p.j_star(i)
        lo, hi = p.deltas[js - 1] * n, (p.M - p.deltas[js - 1]) * n
        for k in table.entries.get(i, {}):
            if not lo <= k <= hi:
                supp = False
                failures.append(f"support broken at (i={i}, k={k}); expected [{lo},{hi}]")
    checks["support a[i][k] = 0 outside [delta_j* n, (M-delta_j*) n]"] = supp

    rho_ok = True
    for i in range(3, p.s, 2):
        val = forms.rho.get(i, Fraction(0)) * Dpowers[i] / PhiE
        if val.denominator != 1:
            rho_ok = False
            failures.append(f"rho_{i} not integral: {_offending_prime(val)}")
    checks["rho_i integrality (Phi^-e D^(s-i) rho_i)"] = rho_ok

    prodD = Fraction(1)
    for mj in p.M_j:
        prodD *= Fraction(lcm_upto(mj * n)) ** e
    val0 = forms.rho[0] * prodD / PhiE
    rho0_ok = val0.denominator == 1
    if not rho0_ok:
        failures.append(f"rho_0 not integral: {_offending_prime(val0)}")
    checks["rho_0 integrality (Phi^-e prod D_{Mj n}^e rho_0)"] = rho0_ok

    all_ok = all(checks.values())
    return ArithmeticReport(n=n, ok=all_ok, Phi=Phi, checks=checks, failures=failures)


def linear_form_consistency(p: ParamSet, n: int, precision_bits: int = 128,
                        table: PartialFractionTable | None = None) -> tuple[ApproxReal, ApproxReal]:
    """Return (gap, allowance): |S_n - rho_0 - sum rho_i zeta(i)| as an
    enclosure, and the combined error allowance it must stay below."""
    inst = build_instance(p, n)
    if table is None:
        table = partial_fractions(inst)
    forms = rho_coefficients(table)
    S = series_Sn(inst, precision_bits)
    # error budget: coefficients of magnitude 2^b magnify both the zeta
    # enclosure width and the context rounding by 2^b, so work b bits higher
    boost = max((max(abs(c.numerator).bit_length() - c.denominator.bit_length(), 0)
                 for c in forms.rho.values()), default=0)
    with _workprec(precision_bits + boost + GUARD_BITS):
        combo = _iv_from_fraction(forms.rho[0])
        for i, c in forms.rho.items():
            if i == 0 or c == 0:
                continue
            z = zeta_value(i, precision_bits + boost)
            combo += _iv_from_fraction(c) * z.ival
        diff = S.ival - combo
        gap = abs(diff)
        allowance = _iv.mpf(S.ival.delta) + _iv.mpf(combo.delta)
        return (ApproxReal(gap, precision_bits),
                ApproxReal(allowance, precision_bits))


# ---------------------------------------------------------------------------
# randomized exact checks of the two brick integrality properties
# ---------------------------------------------------------------------------

@dataclass
class BrickCheckReport:
    trials: int
    seed: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _num_brick_coeff(a: int, m: int, k: int, lam: int) -> Fraction:
    """(1/lam!) d^lam/dt^lam [(t+a)_m / m!] at t = -k."""
    if lam >= m + 1:
        return Fraction(0) if lam > m else Fraction(1, _factorial(m))
    cs = [a + l - k for l in range(m)]
    ser = _poly_prod_series(cs, lam + 1)
    return ser[lam] / _factorial(m)


def _den_brick_coeff(a: int, b: int, k: int, lam: int) -> Fraction:
    """(1/lam!) d^lam/dt^lam [G(t)(t+k)] at t = -k for
    G = (b-a)!/(t+a)_{b-a+1}."""
    span = b - a
    L = lam + 1
    cs = [a + l - k for l in range(span + 1)]
    if a <= k <= b:
        del cs[k - a]
        ser = _inv_prod_series(cs, L) if cs else [Fraction(1)] + [Fraction(0)] * lam
    else:
        ser = [Fraction(0)] + _inv_prod_series(cs, L)[: L - 1]
    return ser[lam] * _factorial(span) if lam < len(ser) else Fraction(0)


def brick_integrality_checks(trials: int, seed: int = 42) -> BrickCheckReport:
    """Randomised exact verification of the two brick integrality properties.

    Numerator bricks: D_m^lam * (1/lam!) F^(lam)(-k) is an integer for any
    integer k.  Denominator bricks: the same for (G(t)(t+k))^(lam) with
    k in [0, m], plus the p-adic lower bound
    v_p >= -lam + floor((b-a)/p) - floor((k-a)/p) - floor((b-k)/p)
    for primes p > sqrt(m).
    """
    if trials < 1:
        raise InvalidParams("trials >= 1")
    rng = random.Random(seed)
    report = BrickCheckReport(trials=trials, seed=seed)
    for t in range(trials):
        # numerator brick
        m = rng.randint(0, 8)
        a = rng.randint(-12, 12)
        k = rng.randint(-12, 12)
        lam = rng.randint(0, 6)
        Dm = lcm_upto(max(m, 1))
        val = _num_brick_coeff(a, m, k, lam) * Dm ** lam
        if val.denominator != 1:
            report.violations.append(f"trial {t}: numerator brick (a={a},m={m},k={k},lam={lam})")
        # denominator brick
        m2 = rng.randint(1, 14)
        a2 = rng.randint(0, m2)
        b2 = rng.randint(a2, m2)
        k2 = rng.randint(0, m2)
        lam2 = rng.randint(0, 6)
        Dm2 = lcm_upto(m2)
        coeff = _den_brick_coeff(a2, b2, k2, lam2)
        if (coeff * Dm2 ** lam2).denominator != 1:
            report.violations.append(
                f"trial {t}: denominator brick integrality (a={a2},b={b2},m={m2},k={k2},lam={lam2})")
        if coeff != 0:
            primes = [q for q in primes_in_sqrt_range(m2, 50)]
            p_ = rng.choice(primes)
            lower = -lam2 + (b2 - a2) // p_ - _floor_div(k2 - a2, p_) - _floor_div(b2 - k2, p_)
            if p_adic_valuation(coeff, p_) < lower:
                report.violations.append(
                    f"trial {t}: denominator brick p-adic bound (p={p_},a={a2},b={b2},k={k2},lam={lam2})")
    return report


def _floor_div(a: int, b: int) -> int:
    return a // b
