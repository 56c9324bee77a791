"""The integer step function phi and its digamma-weighted integral varpi.

phi(x) is the minimum over y in [0,1) of a signed sum of floor terms
sign * floor(a*x + c*y) with c in {-1, 0, +1}.  The terms always come in
balanced (+y, -y) pairs, and the identity

    floor(u) + floor(v) = floor(u + v) - [frac(u) + frac(v) >= 1]

turns each same-sign pair s*(floor(a1*x + y) + floor(a2*x - y)) into

    s*floor((a1 + a2)*x) - s + s * [y in arc],

where the arc is the closed circular arc on R/Z running upward from
frac(-a1*x) to frac(a2*x).  The minimum over y of a weighted sum of arc
indicators is found exactly by an integer sweep over the arc endpoints
(all endpoints share the denominator of x).  This reduction is what makes
large parameter sets tractable; a brute-force candidate evaluator with the
same contract is kept for cross-checking.

A StepFunction records phi on [0,1) by exact rational breakpoints.  Its true
breakpoints are a subset of {k/q} where q ranges over differences of the
event speeds (an arc-start can only cross an arc-end where their positions
collide, and collisions of positions frac(u*x), frac(w*x) happen at rational
x with denominator dividing |u - w|).  Values are sampled at interval
midpoints, which can never be collision points; the function value exactly
at a grid point may differ on a measure-zero set and is kept separately.

varpi is the integral of phi against d(psi) minus the integral of phi/x^2
over (0, 1/cutoff]; both have closed forms over the intervals of the step
function, evaluated with certified digamma enclosures and exact rationals.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DivergentIntegral, InvalidParams
from .exact import ApproxReal, _workprec, _iv, _iv_from_fraction, GUARD_BITS, digamma
from .params import ParamSet, validate


@dataclass(frozen=True)
class FloorTerm:
    """sign * weight * floor(x_slope * x + y_coeff * y)."""
    x_slope: int
    y_coeff: int      # -1, 0 or +1
    sign: int         # +1 or -1
    weight: int = 1   # multiplicity; > 1 only for the pure floor(x) term


def phi_terms(p: ParamSet) -> list[FloorTerm]:
    """The floor-term list defining phi for this parameter set.

    Per delta: +floor((M-2d)x) - floor(y - d x) - floor((M-d)x - y).
    With numerator bricks, additionally
    +floor(rx + y) + floor((r+M)x - y) - floor(y) - floor(Mx - y) - 2r*floor(x);
    the last term vanishes identically on [0,1) but is kept in the list.
    """
    bad = validate(p)
    if bad:
        raise InvalidParams("; ".join(bad))
    M = p.M
    terms: list[FloorTerm] = []
    for d in p.deltas:
        terms.append(FloorTerm(M - 2 * d, 0, +1))
        terms.append(FloorTerm(-d, +1, -1))
        terms.append(FloorTerm(M - d, -1, -1))
    if p.include_numerator_bricks:
        if p.r is None:
            raise InvalidParams("numerator bricks require r")
        r = p.r
        terms.append(FloorTerm(r, +1, +1))
        terms.append(FloorTerm(r + M, -1, +1))
        terms.append(FloorTerm(0, +1, -1))
        terms.append(FloorTerm(M, -1, -1))
        terms.append(FloorTerm(1, 0, -1, weight=2 * r))
    return terms


# ---------------------------------------------------------------------------
# arc-sweep evaluator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ArcSystem:
    """Reduction of a floor-term list to x-only floors plus weighted arcs.

    value(x) = sum coeff*floor(slope*x) + const
               - max_y sum_p w_p * [y in arc_p(x)],
    arc_p(x) = closed circular arc from frac(start_speed*x) up to
    frac(end_speed*x), w_p = -s_p where s_p is the sign of the paired terms.
    """
    x_terms: tuple[tuple[int, int], ...]          # (slope, coeff)
    const: int
    arcs: tuple[tuple[int, int, int], ...]        # (start_speed, end_speed, w)

    def value_at(self, x: Fraction) -> int:
        num = x.numerator % x.denominator
        den = x.denominator
        total = self.const
        for slope, coeff in self.x_terms:
            total += coeff * ((slope * num) // den)
        return total - _max_arc_coverage(
            [((a * num) % den, (b * num) % den, w) for a, b, w in self.arcs], den)


def _max_arc_coverage(arcs: list[tuple[int, int, int]], den: int) -> int:
    """Max over y of the weighted coverage by closed arcs [u, w] on Z/den.

    Arc [u, w] covers positions from u upward (wrapping) through w, both
    endpoints included; u == w covers the single position u.
    """
    if not arcs:
        return 0
    gain: dict[int, int] = {}
    loss: dict[int, int] = {}
    for u, w, wt in arcs:
        gain[u] = gain.get(u, 0) + wt
        loss[w] = loss.get(w, 0) + wt
    positions = sorted(set(gain) | set(loss))
    # weighted coverage on the open gap circularly below positions[0]:
    # sample its midpoint in doubled coordinates (never an event position)
    sample2 = (positions[-1] + positions[0] + den) % (2 * den)
    cur = 0
    for u, w, wt in arcs:
        u2, w2 = 2 * u, 2 * w
        if u2 <= w2:
            inside = u2 <= sample2 <= w2
        else:
            inside = sample2 >= u2 or sample2 <= w2
        if inside:
            cur += wt
    best = cur
    for pos in positions:
        cur += gain.get(pos, 0)
        if cur > best:
            best = cur
        cur -= loss.get(pos, 0)
        if cur > best:      # value on the open interval right of pos
            best = cur
    return best


def arc_system(terms: list[FloorTerm]) -> _ArcSystem:
    """Pair the y-carrying terms and fold the identity into arcs.

    Terms with y_coeff = +1 and y_coeff = -1 must balance within each sign
    class (they always do for the construction's term lists).
    """
    x_coeffs: dict[int, int] = {}
    const = 0
    plus: dict[int, list[int]] = {+1: [], -1: []}
    minus: dict[int, list[int]] = {+1: [], -1: []}
    for t in terms:
        if t.y_coeff == 0:
            x_coeffs[t.x_slope] = x_coeffs.get(t.x_slope, 0) + t.sign * t.weight
        elif t.y_coeff == +1:
            if t.weight != 1:
                raise InvalidParams("weighted y-terms unsupported")
            plus[t.sign].append(t.x_slope)
        else:
            if t.weight != 1:
                raise InvalidParams("weighted y-terms unsupported")
            minus[t.sign].append(t.x_slope)
    arcs = []
    for sign in (+1, -1):
        if len(plus[sign]) != len(minus[sign]):
            raise InvalidParams("floor terms do not pair up in y")
        for a1, a2 in zip(plus[sign], minus[sign]):
            # s*(floor(a1 x + y) + floor(a2 x - y))
            #   = s*floor((a1+a2) x) - s + s*[y in arc(frac(-a1 x) -> frac(a2 x))]
            x_coeffs[a1 + a2] = x_coeffs.get(a1 + a2, 0) + sign
            const -= sign
            arcs.append((-a1, a2, -sign))
    x_terms = tuple((sl, c) for sl, c in sorted(x_coeffs.items()) if c != 0)
    if any(sl < 0 for sl, _ in x_terms):
        raise InvalidParams("negative net x-slope after pairing")
    # min_y sum s_p [y in arc] = -max_y sum (-s_p) [y in arc]; arcs carry -s
    return _ArcSystem(x_terms, const, tuple(arcs))


def phi_at(terms: list[FloorTerm], x: Fraction) -> int:
    """Exact phi(x) = min over y in [0,1) of the floor-term sum."""
    return arc_system(terms).value_at(Fraction(x))


def phi_at_bruteforce(terms: list[FloorTerm], x: Fraction,
                      grid: int | None = None) -> int:
    """Independent exact evaluator, used as the test oracle for phi_at.

    The sum is constant between consecutive y-jump locations, so its exact
    minimum over [0,1) is attained either at a jump location or on one of
    the open intervals between them; evaluating at every location and at
    every inter-location midpoint covers both.  (Terms floor(ax - y) are
    left-continuous in y, so jump locations alone are not enough.)  An
    optional uniform grid can be mixed in as a cross-check."""
    x = Fraction(x) % 1
    jumps = {Fraction(0)}
    for t in terms:
        if t.y_coeff:
            jumps.add((-t.y_coeff * t.x_slope * x) % 1)
    cands = set(jumps)
    ordered = sorted(jumps)
    for a, b in zip(ordered, ordered[1:] + [ordered[0] + 1]):
        cands.add(((a + b) / 2) % 1)
    if grid:
        cands.update(Fraction(k, grid) for k in range(grid))
    best = None
    for y in cands:
        v = 0
        for t in terms:
            v += t.sign * t.weight * int((t.x_slope * x + t.y_coeff * y) // 1)
        if best is None or v < best:
            best = v
    return best


# ---------------------------------------------------------------------------
# step function
# ---------------------------------------------------------------------------

@dataclass
class StepFunction:
    """Exact piecewise-constant function on [0,1).

    values[i] holds the value on [breakpoints[i], breakpoints[i+1]) with the
    last interval closing at 1.  point_values records the (rare, measure
    zero) grid points whose exact value differs from their interval's value.
    """
    breakpoints: list[Fraction]
    values: list[int]
    point_values: dict[Fraction, int] = field(default_factory=dict)

    def __post_init__(self):
        assert self.breakpoints and self.breakpoints[0] == 0
        assert len(self.breakpoints) == len(self.values)
        assert all(b2 > b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:]))

    def value_at(self, x: Fraction) -> int:
        x = Fraction(x) % 1
        hit = self.point_values.get(x)
        if hit is not None:
            return hit
        return self.values[bisect_right(self.breakpoints, x) - 1]

    def intervals(self):
        """Yields (a, b, value) triples covering [0, 1)."""
        for i, (b, v) in enumerate(zip(self.breakpoints, self.values)):
            end = self.breakpoints[i + 1] if i + 1 < len(self.breakpoints) else Fraction(1)
            yield b, end, v

    def max_value(self) -> int:
        return max(self.values)

    def serialize(self) -> str:
        """Two-column text table: breakpoint<TAB>value."""
        lines = [f"{b.numerator}/{b.denominator}\t{v}"
                 for b, v in zip(self.breakpoints, self.values)]
        for b, v in sorted(self.point_values.items()):
            lines.append(f"point\t{b.numerator}/{b.denominator}\t{v}")
        return "\n".join(lines) + "\n"


def _breakpoint_denominators(sys: _ArcSystem) -> set[int]:
    """Denominators q whose multiples k/q form a superset of the true
    breakpoints: x-floor slopes, plus |speed difference| over every pair of
    one coverage-raising and one coverage-lowering event, plus each event
    speed itself (conservative)."""
    qs = {sl for sl, _ in sys.x_terms if sl > 0}
    raising, lowering = set(), set()
    for a, b, w in sys.arcs:
        if w > 0:
            raising.add(a)
            lowering.add(b)
        else:
            raising.add(b)
            lowering.add(a)
    for u in raising | lowering:
        if u:
            qs.add(abs(u))
    for u in raising:
        for w in lowering:
            if u != w:
                qs.add(abs(u - w))
    return qs


def build_step_function(terms: list[FloorTerm]) -> StepFunction:
    """Evaluate phi on a refined rational grid and merge equal neighbours."""
    sys = arc_system(terms)
    qs = _breakpoint_denominators(sys)
    assert not qs or max(qs) < 1 << 31, "breakpoint denominators too large"
    pts: dict[int, Fraction] = {}
    # sort key: floor(k/q * 2**64) is injective since distinct reduced
    # fractions with denominators <= max(qs) differ by more than 2**-64
    for q in qs:
        for k in range(q):
            key = (k << 64) // q
            if key not in pts:
                pts[key] = Fraction(k, q)
    grid = [pts[k] for k in sorted(pts)]

    values: list[int] = []
    exact_at: list[int] = []
    for i, b in enumerate(grid):
        nxt = grid[i + 1] if i + 1 < len(grid) else Fraction(1)
        mid = (b + nxt) / 2
        values.append(sys.value_at(mid))
        exact_at.append(sys.value_at(b))

    bps: list[Fraction] = []
    vals: list[int] = []
    points: dict[Fraction, int] = {}
    for b, v, ve in zip(grid, values, exact_at):
        if ve != v:
            points[b] = ve
        if vals and vals[-1] == v:
            continue
        bps.append(b)
        vals.append(v)
    # the construction's exponents are prime valuations, hence never negative
    assert min(vals) >= 0 and all(v >= 0 for v in points.values())
    # a grid point whose exact value matches its own interval is not special
    points = {b: v for b, v in points.items() if v != vals[bisect_right(bps, b) - 1]}
    return StepFunction(bps, vals, points)


# ---------------------------------------------------------------------------
# varpi
# ---------------------------------------------------------------------------

def varpi(sf: StepFunction, cutoff_den: int, precision_bits: int = 128) -> ApproxReal:
    """integral of phi d(psi) on (0,1) minus integral of phi/x^2 on (0, 1/cutoff_den].

    Requires phi = 0 on an initial interval (otherwise both integrals
    diverge).  The digamma part telescopes to one psi evaluation per value
    change; the 1/x^2 part is an exact rational.
    """
    if cutoff_den < 1:
        raise InvalidParams("cutoff_den must be positive")
    if sf.values[0] != 0:
        raise DivergentIntegral("phi positive arbitrarily close to 0")
    if min(sf.values) < 0:
        raise InvalidParams("phi must be non-negative")

    ivals = list(sf.intervals())
    wp = precision_bits + GUARD_BITS
    with _workprec(wp):
        total = _iv.mpf(0)
        # sum_i v_i (psi(b_{i+1}) - psi(b_i)) telescoped over value changes
        prev_v = 0
        for a, _, v in ivals:
            if a != 0 and v != prev_v:
                total += (prev_v - v) * digamma(a, precision_bits).ival
            prev_v = v
        if prev_v:
            total += prev_v * digamma(Fraction(1), precision_bits).ival
        # exact correction: integral over (0, 1/cutoff] of v/x^2 dx per interval
        cutoff = Fraction(1, cutoff_den)
        corr = Fraction(0)
        for a, b, v in ivals:
            if v == 0 or a >= cutoff:
                continue
            hi = min(b, cutoff)
            corr += v * (Fraction(1) / a - Fraction(1) / hi)
        if corr:
            total -= _iv_from_fraction(corr)
        return ApproxReal(total, precision_bits)


def varpi_for_params(p: ParamSet, precision_bits: int = 128) -> ApproxReal:
    """Convenience: build the step function for p and integrate."""
    sf = build_step_function(phi_terms(p))
    return varpi(sf, p.M - 2 * p.deltas[0], precision_bits)
