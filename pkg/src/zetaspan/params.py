"""Construction parameters and the dimension constant C.

A construction instance is the tuple (M, delta_1..delta_J, s, r) plus a flag
selecting whether the numerator factors also contribute to the common prime
factor.  The deltas control the lengths of the denominator factors; s is the
total denominator multiplicity (s/J per delta); r is the numerator length
parameter.

The dimension constant

    C = sum_j (M - 2 delta_j)
        / ( log2 * sum_j (M - 2 delta_j) - varpi + sum_j max(M - 2 delta_1, M - delta_j) )

depends only on (M, deltas) and the step-function integral varpi, so ParamSet
allows s and r to be omitted for phi/varpi/C-only work.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath

from .errors import InvalidParams, NonPositiveDenominator
from .exact import ApproxReal, log2_constant


@dataclass(frozen=True)
class ParamSet:
    M: int
    deltas: tuple[int, ...]
    s: int | None = None
    r: int | None = None
    include_numerator_bricks: bool = False

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(int(d) for d in self.deltas))

    @property
    def J(self) -> int:
        return len(self.deltas)

    @property
    def exponent(self) -> int:
        """Multiplicity s/J of each denominator factor."""
        if self.s is None:
            raise InvalidParams("s not set on this ParamSet")
        return self.s // self.J

    @property
    def sum_m2d(self) -> int:
        return sum(self.M - 2 * d for d in self.deltas)

    @property
    def m_values(self) -> tuple[int, ...]:
        """Denominator factor degrees per unit n: M - 2 delta_j."""
        return tuple(self.M - 2 * d for d in self.deltas)

    @property
    def M_j(self) -> tuple[int, ...]:
        """max(M - 2 delta_1, M - delta_j) for each j."""
        base = self.M - 2 * self.deltas[0]
        return tuple(max(base, self.M - d) for d in self.deltas)

    def j_star(self, i: int) -> int:
        """1-based group index owning coefficient order i: ceil(i*J/s)."""
        return -((-i * self.J) // self.s)

    def degree_at(self, n: int) -> int:
        """Degree of the rational function at this n."""
        if self.s is None or self.r is None:
            raise InvalidParams("degree requires s and r")
        e = self.s // self.J
        return 1 + 2 * self.r * n - e * sum((self.M - 2 * d) * n + 1 for d in self.deltas)


def default_r(s: int) -> int:
    """floor(s / log(s)^2), floored at 1."""
    if s < 2:
        raise InvalidParams("default_r requires s >= 2")
    with mpmath.workprec(80):
        v = mpmath.mpf(s) / mpmath.log(s) ** 2
        return max(1, int(mpmath.floor(v)))


def validate(p: ParamSet) -> list[str]:
    """All invariant checks; returns a list of violations (empty = ok)."""
    v: list[str] = []
    if p.M < 1:
        v.append("M >= 1")
    if p.J < 1:
        v.append("J >= 1")
        return v
    if any(d < 0 for d in p.deltas):
        v.append("delta_j >= 0")
    if any(p.deltas[i] > p.deltas[i + 1] for i in range(p.J - 1)):
        v.append("deltas non-decreasing")
    if not 2 * p.deltas[-1] < p.M:
        v.append("delta_J < M/2")

    if p.s is not None:
        if p.s < 2 or p.s % 2:
            v.append("s positive even")
        elif p.include_numerator_bricks:
            # unit per-factor exponent; J even keeps the reflection sign
            if p.s != p.J:
                v.append("s == J with numerator bricks")
            if p.J % 2:
                v.append("J even with numerator bricks")
        elif p.s % (2 * p.J):
            v.append("s multiple of 2J")
    if p.r is not None and p.r < 1:
        v.append("r >= 1")
    if p.s is not None and p.r is not None and not v:
        # deg <= -2 for every n >= 1: slack = (s/J) sum(M-2d) - 2r must be
        # non-negative, and the n = 1 instance must already satisfy it
        e = p.s // p.J
        slack = e * p.sum_m2d - 2 * p.r
        if slack < 0 or p.degree_at(1) > -2:
            v.append("degree <= -2")
    return v


def require_valid(p: ParamSet) -> None:
    violations = validate(p)
    if violations:
        raise InvalidParams("; ".join(violations))


def constant_C(p: ParamSet, varpi: ApproxReal,
               precision_bits: int | None = None) -> ApproxReal:
    """The dimension constant C for these parameters and this varpi."""
    prec = precision_bits if precision_bits is not None else varpi.precision_bits
    num = p.sum_m2d
    den = log2_constant(prec) * num - varpi + sum(p.M_j)
    if not bool(den.ival.a > 0):
        raise NonPositiveDenominator(f"C denominator not certifiably positive: {den}")
    return ApproxReal.from_fraction(Fraction(num), prec) / den


# ---------------------------------------------------------------------------
# parameter files: flat "key = value" documents
# ---------------------------------------------------------------------------

_FILE_KEYS = {"M": int, "deltas": "intlist", "s": int, "r": int,
              "numerator_bricks": "bool", "precision": int}


def load_params_file(path: str | Path) -> tuple[ParamSet, dict]:
    """Parse a key/value parameter file.

    Recognised keys: M (int), deltas (comma list of ints), s (int), r (int),
    numerator_bricks (true/false), precision (int).  Unknown keys are an
    error; M and deltas are required.  Returns (ParamSet, extras) where
    extras holds non-ParamSet keys such as precision.
    """
    raw: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FILE_KEYS:
            raise InvalidParams(f"{path}:{lineno}: unknown key {key!r}")
        kind = _FILE_KEYS[key]
        if kind is int:
            raw[key] = int(val)
        elif kind == "intlist":
            raw[key] = tuple(int(t) for t in val.replace(" ", "").split(",") if t)
        elif kind == "bool":
            if val.lower() not in ("true", "false", "0", "1"):
                raise InvalidParams(f"{path}:{lineno}: boolean expected")
            raw[key] = val.lower() in ("true", "1")
    if "M" not in raw or "deltas" not in raw:
        raise InvalidParams(f"{path}: M and deltas are required")
    p = ParamSet(M=raw["M"], deltas=raw["deltas"], s=raw.get("s"), r=raw.get("r"),
                 include_numerator_bricks=bool(raw.get("numerator_bricks", False)))
    extras = {k: v for k, v in raw.items()
              if k not in ("M", "deltas", "s", "r", "numerator_bricks")}
    return p, extras


# ---------------------------------------------------------------------------
# bundled parameter presets
# ---------------------------------------------------------------------------

#: the 76 deltas of the large search result (M = 444)
LARGE_DELTAS: tuple[int, ...] = (
    1, 1, 1, 1, 1, 2, 2, 3, 3, 4,
    4, 5, 6, 7, 8, 9, 10, 11, 12, 13,
    14, 15, 16, 17, 18, 19, 20, 21, 22, 23,
    24, 26, 28, 30, 32, 34, 36, 38, 40, 42,
    44, 46, 48, 50, 52, 54, 56, 58, 60, 62,
    64, 66, 68, 70, 72, 74, 76, 78, 80, 82,
    84, 86, 88, 90, 92, 94, 96, 98, 100, 102,
    104, 108, 112, 116, 120, 124,
)

#: small parameter sets with a good constant C, plus the two large ones
PRESETS: dict[str, ParamSet] = {
    "m6": ParamSet(6, (0, 1)),
    "m19": ParamSet(19, (0, 1, 2)),
    "m12": ParamSet(12, (0, 0, 1, 2)),
    "m16": ParamSet(16, (0, 0, 1, 2, 3)),
    "m37": ParamSet(37, tuple(range(2, 12))),
    "m444": ParamSet(444, LARGE_DELTAS),
    "m444-numerator": ParamSet(444, LARGE_DELTAS, s=76, r=2444,
                               include_numerator_bricks=True),
}
