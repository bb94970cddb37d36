import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wwbridge.errors import DomainError, ParameterError
from wwbridge.fraccalc import (calibrate_norm_constant, hardy_littlewood_check, hardy_littlewood_corpus,
                               hls_sweep, l1_positivity_check, make_homogeneous_family, ml_norm_sq,
                               random_step_function, rl_apply)
from wwbridge.stepfunc import StepFunction

GOLDEN_NESTED = 37.28740446438186  # k=2, H=0.3, alpha=0.7, M=12, frozen after quadrature cross-check


def test_rl_apply_examples():
    one = StepFunction.indicator(0, 1)
    assert rl_apply(StepFunction.zero(), 0.25, 0.3) == 0.0
    assert rl_apply(one, 0.25, 0.0) == pytest.approx(float(1 / mpmath.gamma(1.25)), rel=1e-14)
    assert rl_apply(one, 0.2, np.array([1.0, 1.5, 7.0])).tolist() == [0.0, 0.0, 0.0]
    assert rl_apply(one, -0.3, np.array([1.5, 7.0])).tolist() == [0.0, 0.0]
    # negative order blows up at a breakpoint
    assert math.isinf(rl_apply(one, -0.2, 0.0)) and math.isinf(rl_apply(one, -0.2, 1.0))
    with pytest.raises(DomainError):
        rl_apply(one, 0.0, 0.5)
    with pytest.raises(DomainError):
        rl_apply(one, 0.6, 0.5)


@given(st.floats(-0.45, 0.45).filter(lambda b: abs(b) > 1e-3), st.floats(-3, 0.99).filter(lambda x: abs(x) > 1e-9))
def test_rl_apply_indicator_closed_form(beta, x):
    left = (-x) ** beta if x < 0 else 0.0
    want = ((1 - x) ** beta - left) / math.gamma(beta + 1)
    assert rl_apply(StepFunction.indicator(0, 1), beta, x) == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_norm_constant():
    assert calibrate_norm_constant(0.5) == 1.0
    mpmath.mp.dps = 25
    b = mpmath.mpf(-0.3)
    g = lambda x: ((1 - x) ** b - ((-x) ** b if x < 0 else 0)) / mpmath.gamma(b + 1)  # noqa: E731
    oracle = 1 / mpmath.sqrt(mpmath.quad(lambda x: g(x) ** 2, [-mpmath.inf, -1, 0, 1]))
    assert calibrate_norm_constant(0.2) == pytest.approx(float(oracle), rel=1e-11)
    for H in (0.25, 0.75):
        f = StepFunction.indicator(0, 0.5)
        assert ml_norm_sq(f, H, "quadrature") == pytest.approx(0.5 ** (2 * H), abs=1e-6)


@pytest.mark.parametrize("H", [0.1, 0.2, 0.35, 0.65, 0.8, 0.95])
def test_quadrature_agrees_with_isometry(H):
    rng = np.random.default_rng(4)
    for _ in range(3):
        f = random_step_function(rng, 6)
        assert ml_norm_sq(f, H, "quadrature") == pytest.approx(ml_norm_sq(f, H), rel=1e-8)


def test_ml_norm_examples():
    rng = np.random.default_rng(1)
    f = random_step_function(rng, 10)
    assert ml_norm_sq(f, 0.5) == pytest.approx(f.l2_norm_sq(), rel=1e-13)
    assert ml_norm_sq(StepFunction.indicator(0, 0.3), 0.7) == pytest.approx(0.3**1.4, rel=1e-13)
    fam, g = make_homogeneous_family(1, 0.5, 0.5, 9)
    assert ml_norm_sq(g, 0.5) == pytest.approx(9.0, rel=1e-13)
    with pytest.raises(ParameterError):
        ml_norm_sq(f, 0.3, "fourier")


def test_hardy_littlewood_examples():
    rng = np.random.default_rng(2)
    f = random_step_function(rng, 8)
    assert hardy_littlewood_check(f, 0.5)[0] == pytest.approx(1.0, rel=1e-12)
    for H in (0.2, 0.7):
        assert hardy_littlewood_check(StepFunction.indicator(0, 1), H)[0] == pytest.approx(1.0, rel=1e-12)


def test_hardy_littlewood_corpus_floor():
    rep = hardy_littlewood_corpus(0.3, 200, 20, seed=3)
    assert rep.floor_full > 0 and rep.stable


@given(st.integers(1, 3), st.floats(0.3, 0.9), st.floats(0.2, 0.8), st.sampled_from(
    ["contiguous", "random_gap", "adversarial_nested"]), st.integers(0, 99))
def test_family_shape(k, alpha, H, strategy, seed):
    fam, _ = make_homogeneous_family(k, alpha, H, 10, strategy, seed)
    np.testing.assert_allclose(fam.lengths(), fam.b ** np.arange(10), rtol=1e-12)
    for im in fam.intervals:
        assert 1 <= len(im) <= k
        assert all(lo < hi for lo, hi in im)
        assert all(im[i][1] <= im[i + 1][0] for i in range(len(im) - 1))


def test_family_examples():
    fam, g = make_homogeneous_family(2, 0.7, 0.3, 1)
    assert ml_norm_sq(g, 0.3) == pytest.approx(1.0)
    _, g = make_homogeneous_family(2, 0.7, 0.3, 12, "adversarial_nested")
    assert ml_norm_sq(g, 0.3) == pytest.approx(GOLDEN_NESTED, rel=1e-12)
    with pytest.raises(ParameterError):
        make_homogeneous_family(1, 0.5, 0.5, 4, "spiral")


def test_hls_sweep_identity_case():
    rep = hls_sweep(1, 0.5, 0.5, "contiguous", 16)["contiguous"]
    assert rep.slope == pytest.approx(1.0, abs=1e-12)
    assert rep.const_lo == pytest.approx(1.0) and rep.const_hi == pytest.approx(1.0)


def test_hls_sweep_desk_scale_subcritical():
    rep = hls_sweep(2, 0.7, 0.3, "random_gap", 24)["random_gap"]
    assert 0.85 <= rep.slope <= 1.15


def test_positivity_examples():
    h = StepFunction.indicator(0.2, 0.5)
    assert l1_positivity_check([(0.0, 1.0)], h, 0.3) >= 0
    one = StepFunction.indicator(0, 1)
    assert l1_positivity_check([(0.0, 1.0)], one, 0.3) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        l1_positivity_check([(0.0, 1.0)], StepFunction.indicator(0.5, 2.0), 0.3)
    with pytest.raises(ParameterError):
        l1_positivity_check([(0.0, 1.0)], h, 0.7)


@given(st.floats(0.02, 0.48), st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                                      min_size=1, max_size=10))
def test_positivity_property(H, raw):
    pieces = [(min(a, b), max(a, b), w) for a, b, w in raw if abs(a - b) > 1e-6]
    h = StepFunction.from_intervals(pieces)
    if h.n_pieces == 0:
        return
    lo, hi = h.breakpoints[0], h.breakpoints[-1]
    assert l1_positivity_check([(lo, hi)], h, H) >= -1e-12
