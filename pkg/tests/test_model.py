import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wwbridge.errors import DomainError, GridError, ParameterError
from wwbridge.model import GridSpec, Kappa, ModelParams, Regime, derive_K, frac_index, frac_indices, kappa_eval


def test_derive_K_examples():
    assert derive_K(0.5, 2) == 1.0
    assert derive_K(0.25, 2) == 1.0
    mpmath.mp.dps = 30
    oracle = float(-mpmath.log(mpmath.mpf("0.7")) / mpmath.log(2))
    assert derive_K(0.7, 2) == pytest.approx(oracle, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_derive_K_rejects_alpha(alpha):
    with pytest.raises(ParameterError):
        derive_K(alpha, 2)


def test_kappa_examples():
    assert kappa_eval("standard", 0.0, 0.3) == 0.0
    assert kappa_eval("standard", 0.5, 0.75) == 0.5
    assert kappa_eval("standard", 0.25, 0.5) == 0.25
    assert kappa_eval(Kappa.LINEAR, 0.3, 0.8) == 0.3


@given(st.floats(0.01, 0.99), st.sampled_from(["standard", "linear"]))
def test_kappa_endpoints_exact(H, kind):
    assert kappa_eval(kind, 0.0, H) == 0.0
    assert kappa_eval(kind, 1.0, H) == 1.0


@given(st.floats(0.05, 0.95), st.floats(0.0, 1.0))
def test_standard_kappa_symmetry(H, t):
    # kappa(t) + kappa(1 - t) = 1
    assert kappa_eval("standard", t, H) + kappa_eval("standard", 1.0 - t, H) == pytest.approx(1.0, abs=1e-14)


def test_kappa_domain():
    with pytest.raises(DomainError):
        kappa_eval("standard", 1.5, 0.3)
    with pytest.raises(DomainError):
        kappa_eval("linear", np.array([0.2, -0.1]), 0.3)


def test_frac_index_examples():
    assert frac_index(1, 1, 2, 2) == 2
    assert frac_index(3, 1, 2, 2) == 2
    for m in (3, 4, 10):
        assert frac_index(5, m, 3, 2) == 0
    with pytest.raises(GridError):
        frac_index(9, 0, 3, 2)


@given(st.integers(1, 7), st.integers(2, 4), st.data())
def test_frac_index_matches_fractional_part(n, b, data):
    k = data.draw(st.integers(0, b**n))
    m = data.draw(st.integers(0, n + 2))
    x = (k * b**m) % b**n if m < n else 0
    assert frac_index(k, m, n, b) == x
    # exact rational check of {b^m t} on the grid
    frac = math.modf(k * b**m / b**n)[0]
    assert frac_index(k, m, n, b) / b**n == pytest.approx(frac, abs=1e-12)


def test_frac_indices_table():
    t = frac_indices(4, 3)
    assert t.shape == (4, 82)
    for m in range(4):
        for k in (0, 1, 17, 80, 81):
            assert t[m, k] == frac_index(k, m, 4, 3)


def test_grid_spec():
    g = GridSpec(3, 2)
    assert g.size == 9 and g.points[-1] == 1.0
    assert g.index_of(0.375) == 3
    with pytest.raises(GridError):
        g.index_of(0.3)
    with pytest.raises(ParameterError):
        GridSpec(0, 2)


def test_model_params_regimes():
    assert ModelParams(0.5, 2, 0.3).regime is Regime.SUBCRITICAL
    assert ModelParams(0.7, 2, 0.8).regime is Regime.SUPERCRITICAL
    crit = ModelParams.critical(2, 0.5)
    assert crit.regime is Regime.CRITICAL and crit.alpha == 2**-0.5
    assert ModelParams(0.7, 2, 0.8).roughness == pytest.approx(0.5145731728297583)
    with pytest.raises(ParameterError):
        ModelParams(0.5, 2, 1.0)
    with pytest.raises(ParameterError):
        ModelParams(0.5, 1, 0.5)


@given(st.integers(2, 5), st.floats(0.05, 0.95))
def test_critical_line_always_classified_critical(b, H):
    assert ModelParams.critical(b, H).regime is Regime.CRITICAL


def test_model_params_frozen_and_serialisable():
    p = ModelParams(0.5, 2, 0.3, "linear")
    assert p.as_dict() == {"alpha": 0.5, "b": 2, "H": 0.3, "kappa": "linear"}
    with pytest.raises(Exception):
        p.alpha = 0.4
