import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wwbridge import kernels
from wwbridge._accel import HAVE_NUMBA
from wwbridge.model import frac_indices


def _brute_superpose(bridge, weights, table):
    out = np.zeros_like(bridge)
    for p in range(bridge.shape[0]):
        for k in range(bridge.shape[1]):
            out[p, k] = sum(weights[m] * bridge[p, table[m, k]] for m in range(table.shape[0]))
    return out


def _brute_osc(v, width):
    best = 0.0
    for i in range(v.size):
        for j in range(i, min(v.size, i + width + 1)):
            best = max(best, abs(v[j] - v[i]))
    return best


@given(st.integers(1, 5), st.integers(2, 3), st.integers(0, 2**31))
def test_superpose_twins(n, b, seed):
    rng = np.random.default_rng(seed)
    table = frac_indices(n, b)
    bridge = rng.normal(size=(3, b**n + 1))
    w = 0.6 ** np.arange(n)
    want = _brute_superpose(bridge, w, table)
    np.testing.assert_array_equal(kernels.superpose_np(bridge, w, table), want)
    np.testing.assert_array_equal(kernels.superpose_nb(bridge, w, table), want)


@given(st.integers(2, 7), st.floats(0.5, 4.0), st.integers(0, 2**31))
def test_power_sums_twins(level, p, seed):
    rng = np.random.default_rng(seed)
    v = np.cumsum(rng.normal(size=(2, 2**level + 1)), axis=1)
    levels = np.arange(0, level + 1, dtype=np.int64)
    a = kernels.level_power_sums_np(v, 2, level, p, levels)
    b = kernels.level_power_sums_nb(v, 2, level, p, levels)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    step = 2 ** (level - levels[-1])
    assert a[0, -1] == pytest.approx(np.sum(np.abs(np.diff(v[0, ::step])) ** p))


@given(st.integers(1, 7), st.integers(0, 2**31))
def test_box_counts_twins(level, seed):
    rng = np.random.default_rng(seed)
    v = np.cumsum(rng.normal(size=(2, 2**level + 1)), axis=1) * 0.1
    for j in range(0, level + 1):
        np.testing.assert_array_equal(kernels.column_box_counts_np(v, 2, level, j),
                                      kernels.column_box_counts_nb(v, 2, level, j))


def test_box_counts_line():
    # f(t) = t on a level-6 grid: each of the b^j columns spans exactly one cell
    v = np.linspace(0, 1, 65)[None, :]
    for j in range(7):
        assert kernels.column_box_counts_np(v, 2, 6, j)[0] == 2**j


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=60), st.integers(1, 70))
def test_window_oscillation_twins(vals, width):
    v = np.array(vals)
    want = _brute_osc(v, width)
    assert kernels.window_oscillation_nb(v, width) == pytest.approx(want, abs=0)
    assert kernels.window_oscillation_np(v, width) == pytest.approx(want, abs=0)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backend_flag_switches_dispatch():
    code = "from wwbridge import kernels, BACKEND; print(BACKEND, kernels.superpose is kernels.superpose_np)"
    for flag, expect in (("numpy", "numpy True"), ("numba", "numba False")):
        env = {**os.environ, "WWB_BACKEND": flag}
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == expect


def test_backend_flag_rejects_unknown():
    env = {**os.environ, "WWB_BACKEND": "gpu"}
    out = subprocess.run([sys.executable, "-c", "import wwbridge"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "WWB_BACKEND" in out.stderr


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backends_give_identical_paths():
    code = ("import hashlib; from wwbridge import ModelParams, make_ensemble; "
            "e = make_ensemble(ModelParams(0.5, 2, 0.3), 8, 4, 3); "
            "print(hashlib.sha256(e.values.tobytes()).hexdigest())")
    digests = set()
    for flag in ("numpy", "numba"):
        env = {**os.environ, "WWB_BACKEND": flag}
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        digests.add(out.stdout.strip())
    assert len(digests) == 1
