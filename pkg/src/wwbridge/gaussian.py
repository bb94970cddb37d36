"""Exact second-order structure of fBm, the fractional bridge and ``Y``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridError, ModeError, ResourceError
from .model import GridSpec, ModelParams, frac_indices
from .stepfunc import StepFunction

MAX_MATRIX_INTERVALS = 4096
# Far-field switch: both intervals shorter than separation / FAR_RATIO.
FAR_RATIO = 8.0
_SERIES_TERMS = 12


def fbm_cov(s, t, H: float):
    """``E[W_H(s) W_H(t)] = (s^2H + t^2H - |t - s|^2H) / 2``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("fBm covariance needs nonnegative times")
    h = 2.0 * H
    out = 0.5 * (s**h + t**h - np.abs(t - s) ** h)
    return float(out) if out.ndim == 0 else out


def _far_field(h1, h2, d, H):
    # H(2H-1) h1 h2 E|d + xi - eta|^(2H-2), xi ~ U(+-h1/2), eta ~ U(+-h2/2),
    # expanded as a binomial series in (xi - eta) / d; |xi - eta| <= d / 8.
    gamma = 2.0 * H - 2.0
    p = 0.5 * h1 / d
    q = 0.5 * h2 / d
    total = np.ones_like(d)
    coef = 1.0
    for j in range(1, _SERIES_TERMS + 1):
        # generalized binomial coefficient C(gamma, 2j)
        coef *= (gamma - 2 * j + 2) * (gamma - 2 * j + 1) / ((2 * j - 1) * (2 * j))
        moment = np.zeros_like(d)
        for i in range(j + 1):
            moment += (
                math.comb(2 * j, 2 * i)
                * p ** (2 * i) / (2 * i + 1)
                * q ** (2 * (j - i)) / (2 * (j - i) + 1)
            )
        total += coef * moment
    return H * (2.0 * H - 1.0) * (h1 / d) * (h2 / d) * d ** (2.0 * H) * total


def increment_bilinear(a1, b1, a2, b2, H: float):
    """``E[(W_H(b1) - W_H(a1)) (W_H(b2) - W_H(a2))]``.

    Reversed intervals carry a sign.  Short, well-separated pairs use a
    binomial series instead of the four-power formula, which would cancel
    catastrophically there.
    """
    a1, b1, a2, b2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a1, b1, a2, b2)))
    h = 2.0 * H
    out = 0.5 * (
        (np.abs(b1 - a2) ** h - np.abs(b1 - b2) ** h)
        + (np.abs(a1 - b2) ** h - np.abs(a1 - a2) ** h)
    )
    h1 = b1 - a1
    h2 = b2 - a2
    d = np.abs(0.5 * (a1 + b1) - 0.5 * (a2 + b2))
    far = (d > 0) & (FAR_RATIO * np.abs(h1) <= d) & (FAR_RATIO * np.abs(h2) <= d)
    if np.any(far):
        out = np.array(out, copy=True)
        out[far] = _far_field(h1[far], h2[far], d[far], H)
    return float(out) if out.ndim == 0 else out


def step_bilinear(f: StepFunction, g: StepFunction, H: float) -> float:
    """``E[(int f dW_H)(int g dW_H)]`` summed over all piece pairs (exactly rounded)."""
    a1, b1, v1 = f.pieces()
    a2, b2, v2 = g.pieces()
    if v1.size == 0 or v2.size == 0:
        return 0.0
    ib = increment_bilinear(a1[:, None], b1[:, None], a2[None, :], b2[None, :], H)
    return math.fsum((v1[:, None] * v2[None, :] * ib).ravel())


def bridge_cov(s, t, params: ModelParams):
    """Covariance of ``B_H(t) = W_H(t) - kappa(t) W_H(1)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((s < 0) | (s > 1)) or np.any((t < 0) | (t > 1)):
        raise DomainError("bridge covariance is defined on [0, 1]^2")
    H = params.H
    ks = params.kappa_at(s)
    kt = params.kappa_at(t)
    out = fbm_cov(s, t, H) - ks * fbm_cov(t, 1.0, H) - kt * fbm_cov(s, 1.0, H) + ks * kt
    pinned = (s == 0) | (s == 1) | (t == 0) | (t == 1)
    out = np.where(pinned, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _grid_index(x, n: int, b: int):
    grid = GridSpec(n, b)
    try:
        if np.ndim(x) == 0:
            return grid.index_of(float(x))
        return np.array([grid.index_of(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
    except GridError as exc:
        raise ModeError(f"exact mode needs b-adic points of level <= {n}: {exc}") from None


def _weights(params: ModelParams, n: int) -> np.ndarray:
    return params.alpha ** np.arange(n, dtype=float)


def ww_cov_idx(ks, kt, params: ModelParams, level: int):
    """Exact ``c(s, t)`` for grid indices ``ks``, ``kt`` on the level-``level`` grid."""
    ks = np.asarray(ks, dtype=np.int64)
    kt = np.asarray(kt, dtype=np.int64)
    n, b = int(level), params.b
    size = b**n
    if size > 2**31:
        raise ResourceError("exact covariance limited to b^n <= 2^31")
    scalar = ks.ndim == 0 and kt.ndim == 0
    ks, kt = np.broadcast_arrays(np.atleast_1d(ks), np.atleast_1d(kt))
    # index products fit in int64 while b**n <= 2**31
    pw = np.array([pow(b, m, size) for m in range(n)], dtype=np.int64)
    us = (ks[..., None] * pw) % size / size
    ut = (kt[..., None] * pw) % size / size
    w = _weights(params, n)
    c = bridge_cov(us[..., :, None], ut[..., None, :], params)
    out = np.einsum("...ij,i,j->...", c, w, w)
    return float(out[0]) if scalar else out


def ww_cov(s, t, params: ModelParams, level: int):
    """Exact covariance ``E[Y(s) Y(t)]`` at b-adic points of level ``<= level``.

    On the level-``n`` grid every term with index ``m >= n`` vanishes, so the
    double series is a finite sum; non-b-adic input raises :class:`ModeError`.
    """
    return ww_cov_idx(_grid_index(s, level, params.b), _grid_index(t, level, params.b), params, level)


@dataclass(frozen=True)
class TruncatedCov:
    value: float
    tail_bound: float
    truncation: int


def ww_cov_truncated(s: float, t: float, params: ModelParams, M: int) -> TruncatedCov:
    """Covariance at arbitrary points, truncating both series after ``M`` terms.

    ``|B_H| <= |W_H(t)| + |W_H(1)|`` gives ``sup |Cov B| <= 4`` so the dropped
    part is bounded by ``4 ((1 - alpha)^-2 - ((1 - alpha^M) / (1 - alpha))^2)``.
    """
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise DomainError("points must lie in [0, 1]")
    a = params.alpha
    m = np.arange(M)
    us = np.mod(float(s) * float(params.b) ** m, 1.0)
    ut = np.mod(float(t) * float(params.b) ** m, 1.0)
    w = a**m
    c = bridge_cov(us[:, None], ut[None, :], params)
    value = math.fsum((w[:, None] * w[None, :] * c).ravel())
    # same quantity as 1 - (1 - a^M)^2 over (1 - a)^2, without the cancellation
    tail = 4.0 * a**M * (2.0 - a**M) / (1.0 - a) ** 2
    return TruncatedCov(value, tail, M)


def increment_variance_idx(ks, kt, params: ModelParams, level: int):
    """``c(t,t) + c(s,s) - 2 c(s,t)`` on grid indices."""
    return (
        ww_cov_idx(kt, kt, params, level)
        + ww_cov_idx(ks, ks, params, level)
        - 2.0 * ww_cov_idx(ks, kt, params, level)
    )


def increment_step_repr(s: float, t: float, params: ModelParams, level: int) -> StepFunction:
    """Integrand ``g`` on [0, 1] with ``Y(t) - Y(s) = int g dW_H``.

    ``g = sum_m alpha^m 1_[{b^m s}, {b^m t}] - sum_m alpha^m (kappa({b^m t}) - kappa({b^m s}))``,
    both sums running over ``m < level``.
    """
    ks = _grid_index(s, level, params.b)
    kt = _grid_index(t, level, params.b)
    size = params.b**level
    table = frac_indices(level, params.b)
    us = table[:, ks] / size
    ut = table[:, kt] / size
    w = _weights(params, level)
    const = -math.fsum(w * (params.kappa_at(ut) - params.kappa_at(us)))
    return StepFunction.from_intervals(zip(us, ut, w), constant_part=const)


@dataclass(frozen=True)
class CovMatrix:
    points: np.ndarray
    entries: np.ndarray
    params: ModelParams

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def is_psd(self) -> bool:
        floor = -1e-8 * float(np.max(np.diag(self.entries)))
        return self.min_eigenvalue() >= floor

    def symmetry_defect(self) -> float:
        scale = max(float(np.max(np.abs(self.entries))), 1e-300)
        return float(np.max(np.abs(self.entries - self.entries.T))) / scale

    def to_csv(self, path) -> None:
        np.savetxt(path, self.entries, delimiter=",", fmt="%.17g")


def bridge_cov_matrix(points: np.ndarray, params: ModelParams) -> np.ndarray:
    return bridge_cov(points[:, None], points[None, :], params)


def ww_cov_matrix(grid: GridSpec, params: ModelParams) -> CovMatrix:
    """Full covariance of ``Y`` on a b-adic grid.

    Computed as ``A C_B A^T`` where ``C_B`` is the bridge covariance on the
    same grid and row ``k`` of ``A`` carries ``alpha^m`` at ``{b^m t_k}``.
    """
    if grid.b != params.b:
        raise GridError("grid base and model base differ")
    if grid.n_intervals > MAX_MATRIX_INTERVALS:
        raise ResourceError(f"b^n = {grid.n_intervals} exceeds {MAX_MATRIX_INTERVALS}")
    pts = grid.points
    cb = bridge_cov_matrix(pts, params)
    table = frac_indices(grid.level, grid.b)
    w = _weights(params, grid.level)
    rows = np.zeros_like(cb)
    for m in range(grid.level):
        rows += w[m] * cb[table[m], :]
    full = np.zeros_like(cb)
    for m in range(grid.level):
        full += w[m] * rows[:, table[m]]
    full = 0.5 * (full + full.T)
    return CovMatrix(pts, full, params)


@dataclass(frozen=True)
class HelixProfile:
    """Adjacent-pair increment variances divided by a normalizer, per grid level."""

    levels: np.ndarray
    ratio_min: np.ndarray
    ratio_mean: np.ndarray
    ratio_max: np.ndarray
    normalizer: str


def helix_normalizer(name: str, H: float):
    if name == "power":
        return lambda u: u ** (2 * H)
    if name == "power_log":
        return lambda u: u ** (2 * H) * np.log(1.0 / u)
    if name == "power_K":
        raise ValueError("use helix_profile(..., exponent=K) for the K-normalizer")
    raise ValueError(f"unknown normalizer {name!r}")


def helix_profile(params: ModelParams, levels, normalizer: str | None = None) -> HelixProfile:
    """Exact ``E|Y(t) - Y(s)|^2 / norm(|t - s|)`` over all adjacent pairs of each level.

    The default normalizer is regime-matched: ``u^2H`` below the critical line
    and ``u^2H log(1/u)`` on it.
    """
    if normalizer is None:
        normalizer = "power_log" if params.regime.value == "H=K" else "power"
    norm = helix_normalizer(normalizer, params.H)
    levels = np.asarray(list(levels), dtype=int)
    lo, mean, hi = [], [], []
    for n in levels:
        size = params.b**n
        k = np.arange(size, dtype=np.int64)
        v = increment_variance_idx(k, k + 1, params, n)
        r = v / norm(1.0 / size)
        lo.append(r.min())
        mean.append(math.fsum(r) / r.size)
        hi.append(r.max())
    return HelixProfile(levels, np.array(lo), np.array(mean), np.array(hi), normalizer)
