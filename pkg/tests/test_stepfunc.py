import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wwbridge.errors import ParameterError
from wwbridge.stepfunc import StepFunction

intervals = st.lists(
    st.tuples(st.floats(0, 10), st.floats(0, 10), st.floats(-5, 5)), min_size=0, max_size=8)


def test_canonical_merge_and_trim():
    f = StepFunction([0.0, 1.0, 2.0, 3.0, 4.0], [0.0, 2.0, 2.0, 0.0])
    assert list(f.breakpoints) == [1.0, 3.0]
    assert list(f.values) == [2.0]


def test_interior_zero_kept():
    f = StepFunction.from_intervals([(0, 1, 1.0), (2, 3, 1.0)])
    assert list(f.values) == [1.0, 0.0, 1.0]


def test_cancellation_is_zero_function():
    f = StepFunction.indicator(0, 1) - StepFunction.indicator(0, 1)
    assert f.n_pieces == 0 and f == StepFunction.zero()


def test_reversed_interval_is_negative():
    assert StepFunction.from_intervals([(2, 1, 3.0)]) == StepFunction.indicator(1, 2, -3.0)


def test_invalid_inputs():
    with pytest.raises(ParameterError):
        StepFunction([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(ParameterError):
        StepFunction([1.0, 0.5], [1.0])
    with pytest.raises(ParameterError):
        StepFunction([-1.0, 0.5], [1.0])


def test_constant_part_and_norms():
    f = StepFunction.from_intervals([(0.5, 2.0, 2.0)], constant_part=1.0)
    assert f(0.25) == 1.0 and f(0.75) == 3.0 and f(1.5) == 2.0 and f(3.0) == 0.0
    assert f.l2_norm_sq() == pytest.approx(0.5 * 1 + 0.5 * 9 + 1.0 * 4)
    assert f.lp_norm(1.0) == pytest.approx(0.5 + 1.5 + 2.0)


def test_scaled_argument():
    f = StepFunction.indicator(0, 1, 2.0)
    g = f.scaled_argument(3.0)
    assert g == StepFunction.indicator(0, 3, 2.0)


@given(intervals, intervals, st.floats(0, 12))
def test_addition_is_pointwise(a, b, x):
    f = StepFunction.from_intervals(a)
    g = StepFunction.from_intervals(b)
    assert (f + g)(x) == pytest.approx(f(x) + g(x), abs=1e-9)
    assert (2.5 * f)(x) == pytest.approx(2.5 * f(x), abs=1e-9)


@given(intervals)
def test_always_canonical(a):
    f = StepFunction.from_intervals(a)
    if f.n_pieces:
        assert np.all(np.diff(f.breakpoints) > 0)
        assert f.values[0] != 0 and f.values[-1] != 0
        assert np.all(f.values[1:] != f.values[:-1])


@given(intervals)
def test_l2_by_midpoints(a):
    f = StepFunction.from_intervals(a)
    x = f.breakpoints
    mids = 0.5 * (x[:-1] + x[1:])
    expect = float(np.sum(f(mids) ** 2 * np.diff(x))) if f.n_pieces else 0.0
    assert f.l2_norm_sq() == pytest.approx(expect, rel=1e-12, abs=1e-12)
