"""Log-log regression and the common report shape of the scaling checks."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import FitError


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float
    n_used: int
    n_dropped: int


def fit_loglog(x, y) -> LogLogFit:
    """Ordinary least squares of ``log y`` on ``log x``; non-finite points are dropped."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        ly = np.log(y)
    ok = np.isfinite(lx) & np.isfinite(ly)
    if ok.sum() < 3:
        raise FitError(f"need at least 3 usable points, got {int(ok.sum())}")
    lx, ly = lx[ok], ly[ok]
    xm, ym = lx.mean(), ly.mean()
    sxx = np.sum((lx - xm) ** 2)
    if sxx == 0:
        raise FitError("all abscissae coincide")
    slope = float(np.sum((lx - xm) * (ly - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = ly - (intercept + slope * lx)
    syy = np.sum((ly - ym) ** 2)
    r2 = 1.0 if syy == 0 else float(1.0 - np.sum(resid**2) / syy)
    return LogLogFit(slope, intercept, r2, int(ok.sum()), int((~ok).sum()))


@dataclass
class ScalingReport:
    """A ``(scale, statistic)`` series with its fitted log-log slope."""

    scales: list
    stats: list
    slope: float
    intercept: float
    r_squared: float
    regime_label: str = ""

    @classmethod
    def from_series(cls, scales, stats, regime_label: str = "") -> "ScalingReport":
        fit = fit_loglog(scales, stats)
        return cls(list(map(float, scales)), list(map(float, stats)), fit.slope,
                   fit.intercept, fit.r_squared, regime_label)

    def as_dict(self) -> dict:
        return asdict(self)

    def csv_rows(self):
        return list(zip(self.scales, self.stats))
