"""Dimension lower bounds from growth constants.

The basic criterion: a sequence of integer-coefficient linear forms with
|forms| = exp(alpha n + o(n)) and coefficients bounded by exp(beta n + o(n)),
alpha < 0 < beta, forces

    dim >= 1 - alpha / beta

on the rational span of the evaluated numbers.  The refined criterion
exploits structured divisors d_{n,i} = exp(gamma_i n + o(n)) of the
coefficients:

    d >= 1 - (alpha - gamma_1 - ... - gamma_{d-1}) / beta,

which is applied contrapositively: hypothesising dimension d' and finding
1 - (alpha - (d'-1) gamma)/beta > d' rules d' out.  The largest d whose
predecessors are all ruled out is the certified dimension.

gamma itself comes from bookkeeping: multiplying the forms by
prod_j D_{M_j n} (instead of D_{(M-2 delta_1) n}^{s-i} per coefficient)
leaves, for the worst coefficient (i = 3), a spare divisor consisting of
exactly three lcm factors; taking all three at the third-largest M_j level
gives the single-modulus divisor D_{m* n}^3 and gamma = 3 m*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParams, SignPrecondition
from .exact import ApproxReal
from .params import ParamSet, require_valid


@dataclass
class BoundReport:
    alpha_hat: ApproxReal
    beta_hat: ApproxReal
    gammas: list[ApproxReal | int] = field(default_factory=list)
    raw_bound: ApproxReal | None = None
    certified_dimension: int = 1
    trace: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"alpha_hat = {self.alpha_hat}",
            f"beta_hat  = {self.beta_hat}",
            f"raw bound 1 - alpha_hat/beta_hat = {self.raw_bound}",
        ]
        if self.gammas:
            lines.append(f"gammas = {self.gammas}")
        lines.extend(self.trace)
        lines.append(f"certified dimension >= {self.certified_dimension}")
        return "\n".join(lines)


def _require_signs(alpha_hat: ApproxReal, beta_hat: ApproxReal) -> None:
    if not bool(alpha_hat.ival.b < 0):
        raise SignPrecondition(f"alpha_hat not certifiably negative: {alpha_hat}")
    if not bool(beta_hat.ival.a > 0):
        raise SignPrecondition(f"beta_hat not certifiably positive: {beta_hat}")


def nesterenko_bound(alpha_hat: ApproxReal, beta_hat: ApproxReal) -> ApproxReal:
    """1 - alpha_hat / beta_hat, requiring alpha_hat < 0 < beta_hat."""
    _require_signs(alpha_hat, beta_hat)
    return 1 - alpha_hat / beta_hat


def refined_dimension(alpha_hat: ApproxReal, beta_hat: ApproxReal,
                      gamma, target_d: int) -> BoundReport:
    """Largest d <= target_d whose smaller dimensions are all contradicted.

    Hypothesised dimension d' is ruled out when the enclosure of
    1 - (alpha_hat - (d'-1) gamma)/beta_hat lies strictly above d'.  The
    trace records every test; gamma >= 0 is a single repeated rate.
    """
    _require_signs(alpha_hat, beta_hat)
    gamma_val = gamma if isinstance(gamma, ApproxReal) else ApproxReal.exact_int(
        int(gamma), alpha_hat.precision_bits)
    if bool(gamma_val.ival.a < 0):
        raise InvalidParams("gamma must be non-negative")
    report = BoundReport(alpha_hat=alpha_hat, beta_hat=beta_hat,
                         gammas=[gamma_val],
                         raw_bound=nesterenko_bound(alpha_hat, beta_hat))
    certified = 1
    for d_hyp in range(1, max(2, target_d)):
        bound = 1 - (alpha_hat - gamma_val * (d_hyp - 1)) / beta_hat
        ruled_out = bool(bound.ival.a > d_hyp)
        report.trace.append(
            f"d-test {d_hyp}: 1 - (alpha_hat - {d_hyp - 1}*gamma)/beta_hat = "
            f"{bound}  {'>' if ruled_out else '!>'} {d_hyp}"
            f" -> dimension {d_hyp} {'contradicted' if ruled_out else 'not contradicted'}")
        if not ruled_out:
            break
        certified = d_hyp + 1
    report.certified_dimension = certified
    return report


def gamma_from_divisors(p: ParamSet) -> tuple[int, int, int]:
    """(m_star, c, gamma): the spare lcm divisor of every integerised
    odd-index coefficient, for per-factor exponent s/J = 1.

    Multiplying by prod_j D_{M_j n} versus the needed D_{(M-2 delta_1) n}^{s-i}
    leaves a spare product of exactly i lcm factors for coefficient i; the
    binding case i = 3 admits the single-modulus divisor D_{m* n}^3 with m*
    the third-largest M_j (multiplicities counted), so gamma = 3 m*.
    Degenerate cases with no odd i in [3, s-1] yield c = 0.
    """
    require_valid(p)
    if p.s is None:
        raise InvalidParams("s required")
    if p.s != p.J:
        raise InvalidParams("divisor bookkeeping requires per-factor exponent s/J = 1")
    levels = sorted(p.M_j, reverse=True)
    if p.s < 4:
        return (levels[-1], 0, 0)
    c = 3
    m_star = levels[c - 1]
    return (m_star, c, c * m_star)
