"""Grid rounding, eta initialization, and exact level comparison."""

import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qopt.quantizer import (
    EXACT_FLOOR_CAP,
    MismatchedConfigError,
    PrecisionOverflowError,
    QuantConfig,
    QuantizedValue,
    compare,
    init_eta,
    max_h_exp,
    quantization_error,
    quantize,
)


def test_round_half_up_hand_cases():
    unit = QuantConfig(base=2, h_exp=0, eta_pow=0)   # grid spacing 1
    q = quantize(3.7, unit)
    assert (q.level, q.value) == (4, 4.0)
    q = quantize(5.0, unit)
    assert (q.level, q.value) == (5, 5.0)
    tenth = QuantConfig(base=10, h_exp=1, eta_pow=0)  # grid spacing 1/10
    q = quantize(3.74, tenth)
    assert (q.level, q.value) == (37, 3.7)
    for cfg in (unit, tenth):
        assert quantize(0.0, cfg).level == 0
        assert quantize(0.0, cfg).value == 0.0


def test_quantize_rejects_bad_values():
    cfg = QuantConfig()
    with pytest.raises(ValueError):
        quantize(-0.75, cfg)
    with pytest.raises(ValueError):
        quantize(float("nan"), cfg)
    with pytest.raises(ValueError):
        quantize(float("inf"), cfg)


def test_quantize_overflow_signals():
    cfg = QuantConfig(base=2, h_exp=50, eta_pow=0)
    with pytest.raises(PrecisionOverflowError):
        quantize(1e10, cfg)
    # just under the cap still works
    small = QuantConfig(base=2, h_exp=3, eta_pow=0)
    assert quantize(1e10, small).level == int(1e10) * 8


def test_init_eta_hand_cases():
    assert init_eta(100.0, 2) == -6
    assert init_eta(0.0, 2) == 0
    assert init_eta(7.0, 2) == -3


def test_compare_rescales_across_resolutions():
    coarse = QuantConfig(base=10, h_exp=0, eta_pow=0)
    fine = QuantConfig(base=10, h_exp=1, eta_pow=0)
    a = QuantizedValue(level=37, config=fine)   # 3.7
    b = QuantizedValue(level=4, config=coarse)  # 4.0
    assert compare(a, b) == -1
    assert compare(b, a) == 1
    assert compare(a, a) == 0
    assert a < b and b > a and a <= a and a >= a and a == a and a != b


def test_compare_rejects_mismatched_grids():
    a = quantize(1.0, QuantConfig(base=2))
    b = quantize(1.0, QuantConfig(base=10))
    with pytest.raises(MismatchedConfigError):
        compare(a, b)
    c = quantize(1.0, QuantConfig(base=2, eta_pow=-1))
    with pytest.raises(MismatchedConfigError):
        compare(a, c)


def test_config_validation():
    with pytest.raises(ValueError):
        QuantConfig(base=1)
    with pytest.raises(ValueError):
        QuantConfig(h_exp=-1)
    with pytest.raises(ValueError):
        QuantConfig(base=2, h_exp=0, eta_pow=5000)


# Bounded so the scaled value sits far below the exact-floor cap, where
# the implementation's own epsilon is provably in the half-open window.
values = st.floats(min_value=0.0, max_value=1e6, allow_nan=False,
                   allow_infinity=False)


@st.composite
def safe_configs(draw):
    base = draw(st.sampled_from([2, 3, 10]))
    eta_pow = draw(st.integers(min_value=-8, max_value=8))
    h_exp = draw(st.integers(min_value=0, max_value=12))
    return QuantConfig(base=base, h_exp=h_exp, eta_pow=eta_pow)


@given(f=values, cfg=safe_configs())
def test_epsilon_in_half_open_window(f, cfg):
    assume(cfg.qp * (f + 1.0) < 2.0 ** 50)
    eps = quantization_error(f, cfg)
    assert -0.5 < eps <= 0.5


def _exact_level_error(q, f):
    """|level - qp*f| in exact rational arithmetic (level units)."""
    qp_exact = Fraction(q.config.base) ** q.config.exp
    return abs(Fraction(q.level) - qp_exact * Fraction(f)), qp_exact


def _level_fuzz(base, qp_exact, f):
    """Budget for float evaluation error of the scaled product, in level
    units.  Power-of-two scaling is exact; other bases round the grid
    scale and the product once each, so a few ulps of qp*f covers it
    (measured worst case: under one)."""
    if base == 2:
        return Fraction(0)
    return Fraction(4, 2 ** 53) * qp_exact * Fraction(f)


@given(f=values, cfg=safe_configs())
def test_rounding_bound_in_value_domain(f, cfg):
    assume(cfg.qp * (f + 1.0) < 2.0 ** 50)
    q = quantize(f, cfg)
    err, qp_exact = _exact_level_error(q, f)
    assert err <= Fraction(1, 2) + _level_fuzz(cfg.base, qp_exact, f)


@given(f=values, eta_pow=st.integers(min_value=-8, max_value=8),
       h_exp=st.integers(min_value=0, max_value=20))
def test_base2_levels_match_exact_arithmetic(f, eta_pow, h_exp):
    """Power-of-two scaling never rounds, so the float path must agree
    with exact rational evaluation of the defining floor."""
    cfg = QuantConfig(base=2, h_exp=h_exp, eta_pow=eta_pow)
    assume(cfg.qp * (f + 1.0) < float(EXACT_FLOOR_CAP))
    oracle = math.floor(Fraction(f) * Fraction(cfg.qp) + Fraction(1, 2))
    assert quantize(f, cfg).level == oracle


@given(f1=values, f2=values, cfg=safe_configs())
def test_level_monotone_in_f(f1, f2, cfg):
    assume(cfg.qp * (max(f1, f2) + 1.0) < 2.0 ** 50)
    lo, hi = sorted((f1, f2))
    assert quantize(lo, cfg).level <= quantize(hi, cfg).level


@given(f=values, cfg=safe_configs())
def test_refinement_tightens_the_bound(f, cfg):
    assume(cfg.qp * cfg.base * (f + 1.0) < 2.0 ** 50)
    finer = cfg.refined(1)
    assert finer.exp == cfg.exp + 1
    assert finer.qp > cfg.qp
    q = quantize(f, finer)
    err, qp_exact = _exact_level_error(q, f)
    assert err <= Fraction(1, 2) + _level_fuzz(cfg.base, qp_exact, f)
    # Half a cell on the finer grid is strictly smaller, exactly.
    assert Fraction(1, 2) / qp_exact < Fraction(1, 2) / (Fraction(cfg.base) ** cfg.exp)


@given(f=values, cfg=safe_configs(), steps=st.integers(min_value=1, max_value=4))
def test_cross_resolution_compare_matches_values(f, cfg, steps):
    """compare() must realize the exact mathematical order of the two grid
    points.  The float ``value`` property can round differently on the two
    grids (143/3^-6 and 429/3^-5 are both exactly 104247 but land one ulp
    apart in float), so the oracle is exact rational arithmetic."""
    assume(cfg.qp * cfg.base ** steps * (f + 1.0) < 2.0 ** 50)
    a = quantize(f, cfg)
    b = quantize(f, cfg.refined(steps))
    exact_a = Fraction(a.level) * Fraction(cfg.base) ** (-a.config.exp)
    exact_b = Fraction(b.level) * Fraction(cfg.base) ** (-b.config.exp)
    got = compare(a, b)
    if got == 0:
        assert exact_a == exact_b
    elif got < 0:
        assert exact_a < exact_b
    else:
        assert exact_a > exact_b


@given(f0=st.floats(min_value=1e-12, max_value=1e6),
       frac=st.floats(min_value=0.0, max_value=1.0),
       base=st.sampled_from([2, 10]))
@settings(max_examples=300)
def test_first_candidate_always_accepted_from_worst_start(f0, frac, base):
    """At the starting resolution any not-worse candidate quantizes to a
    level at or below the start's, so the very first proposal passes the
    less-or-equal acceptance test."""
    f1 = f0 * frac
    cfg = QuantConfig(base=base, h_exp=0, eta_pow=init_eta(f0, base))
    assert compare(quantize(f1, cfg), quantize(f0, cfg)) <= 0


@given(f0=st.floats(min_value=0.0, max_value=1e15), base=st.sampled_from([2, 3, 10]))
def test_init_eta_brackets_f0(f0, base):
    k = -init_eta(f0, base)
    assert k >= 0
    assert Fraction(base) ** k <= Fraction(f0) + 1 < Fraction(base) ** (k + 1)


def test_init_eta_boundary_powers():
    # f0 + 1 landing exactly on a power must round down, not up.
    assert init_eta(1.0, 2) == -1
    assert init_eta(3.0, 2) == -2
    assert init_eta(63.0, 2) == -6
    assert init_eta(64.0, 2) == -6
    assert init_eta(99.0, 10) == -2
    assert init_eta(999.0, 10) == -3


@given(f_max=st.floats(min_value=0.0, max_value=1e12),
       base=st.sampled_from([2, 3, 10]),
       eta_pow=st.integers(min_value=-8, max_value=0))
def test_h_cap_is_the_last_exact_exponent(f_max, base, eta_pow):
    cap = max_h_exp(base, eta_pow, f_max)
    assert cap >= 0
    headroom = Fraction(f_max + 1.0)  # the cap contract is in float terms
    here = Fraction(base) ** (eta_pow + cap) * headroom
    assert here <= EXACT_FLOOR_CAP
    if cap > 0:
        over = Fraction(base) ** (eta_pow + cap + 1) * headroom
        assert over > EXACT_FLOOR_CAP


def test_h_cap_exact_at_float_boundaries():
    """Caps right at the 2**53 boundary, where the float division inside
    the estimate rounds across an exact power of the base.  A cap one
    step too generous hands out a grid whose rounding silently breaks."""
    for base in (2, 3, 10):
        for m in (1, 2, 4, 7, 20):
            target = 2.0 ** 53 / base ** m
            if target <= 1.0:
                continue
            for steps in (-2, -1, 0, 1, 2):
                x = target
                for _ in range(abs(steps)):
                    x = math.nextafter(x, math.inf if steps > 0 else 0.0)
                f_max = x - 1.0
                if f_max < 0.0:
                    continue
                for eta in (-8, 0, 3):
                    cap = max_h_exp(base, eta, f_max)
                    headroom = Fraction(f_max + 1.0)
                    here = Fraction(base) ** (eta + cap) * headroom
                    # cap == 0 may be the unsafe-but-clamped case.
                    assert here <= EXACT_FLOOR_CAP or cap == 0
                    if cap > 0:
                        over = Fraction(base) ** (eta + cap + 1) * headroom
                        assert over > EXACT_FLOOR_CAP


@given(f=values, cfg=safe_configs())
def test_quantize_is_pure(f, cfg):
    assume(cfg.qp * (f + 1.0) < 2.0 ** 50)
    assert quantize(f, cfg) == quantize(f, cfg)
