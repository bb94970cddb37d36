import numpy as np
import pytest

from wwbridge.errors import FitError
from wwbridge.fitting import ScalingReport, fit_loglog


def test_exact_power():
    x = np.arange(1.0, 10.0)
    fit = fit_loglog(x, x**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_constant():
    assert fit_loglog([1, 2, 4, 8], [3, 3, 3, 3]).slope == pytest.approx(0.0, abs=1e-12)


def test_noisy_power():
    rng = np.random.default_rng(3)
    x = np.logspace(0, 3, 40)
    y = x**1.5 * (1 + 0.01 * rng.standard_normal(x.size))
    assert abs(fit_loglog(x, y).slope - 1.5) <= 0.02


def test_drops_non_finite():
    fit = fit_loglog([1, 2, 4, 8, 16], [1, 2, np.nan, 8, 0.0])
    assert fit.n_dropped == 2 and fit.slope == pytest.approx(1.0)


def test_too_few_points():
    with pytest.raises(FitError):
        fit_loglog([1, 2, 3], [1, np.inf, 2])


def test_scaling_report_rows():
    rep = ScalingReport.from_series([1, 2, 4], [1, 4, 16], "x")
    assert rep.slope == pytest.approx(2.0) and rep.csv_rows()[1] == (2.0, 4.0)
