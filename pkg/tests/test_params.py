"""Tests for parameter validation and the dimension constant C."""

import math
import random

import mpmath
import pytest

from zetaspan.errors import NonPositiveDenominator
from zetaspan.exact import ApproxReal, log2_constant
from zetaspan.params import (ParamSet, PRESETS, constant_C, default_r,
                             load_params_file, validate)
from zetaspan.stepphi import varpi_for_params


def _default_r_oracle(s):
    with mpmath.workprec(120):
        return max(1, int(mpmath.floor(mpmath.mpf(s) / mpmath.log(s) ** 2)))


def test_default_r_against_oracle():
    # confirm the quoted cases with the oracle rather than trusting labels
    assert _default_r_oracle(4) == 2
    assert _default_r_oracle(2) == 4
    for s in (2, 4, 10, 76, 1000, 10 ** 6):
        assert default_r(s) == _default_r_oracle(s)


def test_validate_examples():
    assert validate(ParamSet(6, (0, 1), s=4, r=2)) == []
    bad = validate(ParamSet(6, (0, 3)))
    assert any("delta_J < M/2" in v for v in bad)
    bad = validate(ParamSet(6, (0, 1), s=6, r=2))
    assert any("s multiple of 2J" in v for v in bad)


def test_validate_degree_condition():
    # r too large for the degree condition
    bad = validate(ParamSet(6, (0, 1), s=4, r=11))
    assert any("degree" in v for v in bad)
    assert validate(ParamSet(6, (0, 1), s=4, r=9)) == []


def test_validate_numerator_mode():
    p = PRESETS["m444-numerator"]
    assert validate(p) == []
    assert any("s == J" in v
               for v in validate(ParamSet(6, (0, 1), s=4, r=1,
                                          include_numerator_bricks=True)))


def test_constant_C_m6_reference_value():
    p = PRESETS["m6"]
    w = varpi_for_params(p, 128)
    C = constant_C(p, w)
    scaled = C * (1 + log2_constant(128))
    assert abs(float(scaled.value) - 1.009388) < 1e-5


def test_constant_C_zero_deltas_exact():
    # phi == 0 forces varpi = 0 and C = 1/(1+log2)
    for M, J in ((4, 1), (9, 3), (17, 2)):
        p = ParamSet(M, (0,) * J)
        w = varpi_for_params(p, 128)
        assert float(w.value) == 0.0
        C = constant_C(p, w)
        expect = 1 / (1 + math.log(2))
        assert abs(float(C.value) - expect) < 1e-12


def test_constant_C_replication_invariance():
    rng = random.Random(21)
    for _ in range(20):
        M = rng.randint(2, 14)
        J = rng.randint(1, 3)
        top = (M - 1) // 2
        deltas = tuple(sorted(rng.randint(0, top) for _ in range(J)))
        k = rng.choice([2, 3])
        p1 = ParamSet(M, deltas)
        p2 = ParamSet(M, tuple(sorted(deltas * k)))
        w1 = varpi_for_params(p1, 96)
        w2 = varpi_for_params(p2, 96)
        # varpi scales by k, C is invariant
        assert float(abs(w2 - w1 * k).hi) < 1e-24
        c1 = constant_C(p1, w1)
        c2 = constant_C(p2, w2)
        assert float(abs(c1 - c2).hi) < 1e-24


def test_constant_C_monotone_in_varpi():
    p = PRESETS["m6"]
    w = varpi_for_params(p, 128)
    with_term = constant_C(p, w)
    without = constant_C(p, ApproxReal.exact_int(0, 128))
    assert float(without.value) < float(with_term.value)


def test_constant_C_nonpositive_denominator():
    p = ParamSet(6, (0, 1))
    huge = ApproxReal.exact_int(10 ** 6, 128)
    with pytest.raises(NonPositiveDenominator):
        constant_C(p, huge)


def test_params_file_roundtrip(tmp_path):
    doc = tmp_path / "p.cfg"
    doc.write_text(
        "# comment\n"
        "M = 444\n"
        "deltas = " + ",".join(map(str, PRESETS["m444"].deltas)) + "\n"
        "s = 76\n"
        "r = 2444\n"
        "numerator_bricks = true\n"
        "precision = 96\n")
    p, extras = load_params_file(doc)
    assert p == PRESETS["m444-numerator"]
    assert extras == {"precision": 96}


def test_params_file_rejects_unknown_keys(tmp_path):
    doc = tmp_path / "bad.cfg"
    doc.write_text("M = 6\ndeltas = 0,1\nbogus = 3\n")
    from zetaspan.errors import InvalidParams
    with pytest.raises(InvalidParams):
        load_params_file(doc)


def test_j_star_and_M_j():
    p = ParamSet(6, (0, 1), s=4, r=2)
    assert p.M_j == (6, 6)          # max(6-0, 6-1) with base M-2*0 = 6
    assert [p.j_star(i) for i in range(1, 5)] == [1, 1, 2, 2]
    big = PRESETS["m444-numerator"]
    assert sorted(big.M_j, reverse=True)[:6] == [443] * 5 + [442]
