"""Sample-path estimators: variations, moduli, box dimension, argmax, restricted pairs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import EstimatorError, ParameterError
from .fitting import ScalingReport, fit_loglog
from .gaussian import increment_variance_idx
from .model import ModelParams
from .paths import Ensemble, PathSample

PHI_CLAMP = 0.1


def _rows(obj):
    """``(values_2d, b, level)`` from a path, an ensemble or a raw 2-d array triple."""
    if isinstance(obj, Ensemble):
        return obj.values, obj.grid.b, obj.grid.level
    if isinstance(obj, PathSample):
        return obj.values[None, :], obj.grid.b, obj.grid.level
    raise TypeError(f"expected PathSample or Ensemble, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# p-th variation along b-adic partitions
# ---------------------------------------------------------------------------


def badic_power_sums(obj, p: float, levels) -> np.ndarray:
    """``S_j(p)`` for each requested level, one row per path."""
    values, b, level = _rows(obj)
    levels = np.asarray(list(levels), dtype=np.int64)
    if np.any(levels < 0) or np.any(levels > level):
        raise ParameterError(f"levels must lie in [0, {level}]")
    return kernels.level_power_sums(np.ascontiguousarray(values), b, level, float(p), levels)


def pvar_badic(path: PathSample, p: float, up_to_level: int, from_level: int = 1) -> ScalingReport:
    """``S_j(p) = sum_k |f((k+1) b^-j) - f(k b^-j)|^p`` for ``j = from_level..up_to_level``."""
    if p <= 0:
        raise ParameterError("p must be positive")
    if up_to_level > path.grid.level:
        raise ParameterError(f"path has level {path.grid.level} < {up_to_level}")
    js = np.arange(from_level, up_to_level + 1)
    sums = badic_power_sums(path, p, js)[0]
    return _report(path.grid.b ** (-js.astype(float)), sums, f"p={p}")


def _report(scales, stats, label=""):
    try:
        return ScalingReport.from_series(scales, stats, label)
    except Exception:
        return ScalingReport(list(map(float, scales)), list(map(float, stats)), math.nan, math.nan,
                             math.nan, label)


@dataclass(frozen=True)
class RoughnessEstimate:
    gladyshev: float
    regression: float
    level: int


def roughness_exponent(path: PathSample, top_levels: int = 5) -> RoughnessEstimate:
    """Roughness from squared increments: ``1/2 (1 - log_b S_n(2) / n)`` at the finest level.

    The regression variant uses the slope of ``log_b S_j(2)`` against ``j`` over
    the ``top_levels`` finest levels.
    """
    n, b = path.grid.level, path.grid.b
    if n < 10:
        raise ParameterError("roughness estimation needs a grid of level >= 10")
    js = np.arange(n - top_levels + 1, n + 1)
    sums = badic_power_sums(path, 2.0, js)[0]
    if np.any(sums <= 0):
        raise EstimatorError("flat path: squared variation vanishes")
    logs = np.log(sums) / math.log(b)
    glad = 0.5 * (1.0 - logs[-1] / n)
    slope = float(np.polyfit(js, logs, 1)[0])
    return RoughnessEstimate(float(glad), 0.5 * (1.0 - slope), n)


# ---------------------------------------------------------------------------
# Phi-variation
# ---------------------------------------------------------------------------


def _loglog(y):
    # log log y, floored at e
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = np.log(np.log(y))
    return np.where(np.isfinite(ll), np.maximum(ll, math.e), math.e)


@dataclass(frozen=True)
class PhiSpec:
    """Young function for the Phi-variation.

    ``modifier`` multiplies the base function by ``log(1/x)`` (``"times_log"``) or
    divides by it (``"over_log"``); this produces the comparison functions that
    dominate or are dominated by the critical one.  Beyond ``x0`` the function
    continues as ``Phi(x0) (x / x0)^exponent``.
    """

    variant: str
    H: float
    K: float = 1.0
    exponent: float | None = None
    modifier: str = "none"
    x0: float = PHI_CLAMP

    def __post_init__(self):
        if self.variant not in ("subcritical", "critical", "supercritical_power", "custom_power"):
            raise ParameterError(f"unknown Phi variant {self.variant!r}")
        if self.modifier not in ("none", "times_log", "over_log"):
            raise ParameterError(f"unknown modifier {self.modifier!r}")
        if self.variant == "custom_power" and self.exponent is None:
            raise ParameterError("custom_power needs an exponent")

    @classmethod
    def regime_matched(cls, params: ModelParams, modifier: str = "none") -> "PhiSpec":
        variant = {"H<K": "subcritical", "H=K": "critical", "H>K": "supercritical_power"}[params.regime.value]
        return cls(variant, params.H, params.K, modifier=modifier)

    @property
    def power(self) -> float:
        if self.variant == "custom_power":
            return float(self.exponent)
        if self.variant == "supercritical_power":
            return 1.0 / self.K
        return 1.0 / self.H

    def _core(self, x):
        H = self.H
        inv = 1.0 / x
        if self.variant == "subcritical":
            base = (x / np.sqrt(2.0 * _loglog(inv))) ** (1.0 / H)
        elif self.variant == "critical":
            base = (x / np.sqrt(2.0 * np.log(inv) * _loglog(inv) / H)) ** (1.0 / H)
        else:
            base = x**self.power
        if self.modifier == "times_log":
            base = base * np.log(inv)
        elif self.modifier == "over_log":
            base = base / np.log(inv)
        return base

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        small = np.minimum(x, self.x0)
        with np.errstate(divide="ignore", invalid="ignore"):
            core = np.where(x > 0, self._core(np.where(x > 0, small, self.x0)), 0.0)
            edge = self._core(np.asarray(self.x0))
        out = np.where(x > self.x0, edge * (x / self.x0) ** self.power, core)
        return float(out) if out.ndim == 0 else out


@dataclass
class PhiVariation:
    value: float
    levels: list
    series: list
    strategy: str

    def report(self, b: int) -> ScalingReport:
        return _report([float(b) ** -j for j in self.levels], self.series, self.strategy)


def _turning_points(v):
    d = np.diff(v)
    nz = np.flatnonzero(d != 0)
    if nz.size == 0:
        return v[[0, -1]]
    s = np.sign(d[nz])
    change = nz[1:][s[1:] != s[:-1]]
    idx = np.concatenate([[0], change, [v.size - 1]])
    return v[idx]


def phi_sums(values_2d: np.ndarray, b: int, level: int, phi: PhiSpec, levels, strategy: str = "badic_sweep"):
    """Per-path, per-level ``s_Phi`` on the level-``j`` partition (or its turning points)."""
    out = np.zeros((values_2d.shape[0], len(levels)))
    for i, j in enumerate(levels):
        coarse = values_2d[:, :: b ** (level - j)]
        if strategy == "badic_sweep":
            out[:, i] = phi(np.abs(np.diff(coarse, axis=1))).sum(axis=1)
        elif strategy == "extrema_partition":
            for q in range(coarse.shape[0]):
                out[q, i] = phi(np.abs(np.diff(_turning_points(coarse[q])))).sum()
        else:
            raise ParameterError(f"unknown strategy {strategy!r}")
    return out


def phi_variation(path: PathSample, phi: PhiSpec, strategy: str = "badic_sweep",
                  levels=None) -> PhiVariation:
    """Lower bound on ``v_Phi`` from b-adic partitions (or their extrema) of each level.

    The supremum over all partitions is not computed; the returned value is
    the largest per-level sum.
    """
    b, n = path.grid.b, path.grid.level
    levels = list(range(1, n + 1)) if levels is None else list(levels)
    series = phi_sums(path.values[None, :], b, n, phi, levels, strategy)[0]
    return PhiVariation(float(series.max()), levels, list(map(float, series)), strategy)


# ---------------------------------------------------------------------------
# moduli of continuity
# ---------------------------------------------------------------------------

NORMALIZERS = ("sqrt_log", "log", "sqrt_loglog", "sqrt_log_loglog", "power_K")


def normalizer(name: str, H: float, K: float = 1.0):
    def f(u):
        u = np.asarray(u, dtype=float)
        inv = 1.0 / u
        if name == "sqrt_log":
            return u**H * np.sqrt(np.log(inv))
        if name == "log":
            return u**H * np.log(inv)
        if name == "sqrt_loglog":
            return u**H * np.sqrt(_loglog(inv))
        if name == "sqrt_log_loglog":
            return u**H * np.sqrt(np.log(inv) * _loglog(inv))
        if name == "power_K":
            return u**K
        raise ParameterError(f"unknown normalizer {name!r}")

    return f


def matched_normalizer(params: ModelParams, mode: str) -> str:
    regime = params.regime.value
    if mode == "uniform":
        return {"H<K": "sqrt_log", "H=K": "log", "H>K": "power_K"}[regime]
    return {"H<K": "sqrt_loglog", "H=K": "sqrt_log_loglog", "H>K": "power_K"}[regime]


def modulus_ratios(obj, mode: str, norm_name: str, H: float, K: float = 1.0, s: float | None = None,
                   levels=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-path ratios ``sup |Y(t) - Y(s)| / normalizer`` at scales ``h = b^-j``.

    Returns ``(levels, ratios)`` with ``ratios`` of shape ``(n_paths, n_levels)``.
    """
    values, b, n = _rows(obj)
    levels = np.arange(1, n + 1) if levels is None else np.asarray(list(levels))
    norm = normalizer(norm_name, H, K)
    size = values.shape[1]
    out = np.zeros((values.shape[0], len(levels)))
    if mode == "uniform":
        for i, j in enumerate(levels):
            width = b ** (n - int(j))
            denom = float(norm(float(b) ** -int(j)))
            for q in range(values.shape[0]):
                out[q, i] = kernels.window_oscillation(np.ascontiguousarray(values[q]), width) / denom
    elif mode == "local":
        if s is None:
            raise ParameterError("local modulus needs a base point s")
        k0 = int(round(s * (size - 1)))
        if k0 / (size - 1) != s:
            raise ParameterError(f"s={s} is not a grid point")
        offs = np.arange(-(size - 1), size)
        offs = offs[(offs != 0) & (k0 + offs >= 0) & (k0 + offs < size)]
        dist = np.abs(offs) / (size - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(values[:, k0 + offs] - values[:, [k0]]) / norm(dist)[None, :]
        for i, j in enumerate(levels):
            mask = dist <= float(b) ** -int(j)
            out[:, i] = r[:, mask].max(axis=1) if mask.any() else 0.0
    else:
        raise ParameterError(f"unknown modulus mode {mode!r}")
    return np.asarray(levels), out


def modulus_profile(obj, mode: str = "uniform", norm_name: str | None = None, s: float | None = None,
                    levels=None) -> ScalingReport:
    """Mean over paths of the normalised sup-increment at each scale ``b^-j``."""
    values, b, n = _rows(obj)
    params = obj.params
    if norm_name is None:
        norm_name = matched_normalizer(params, mode)
    H, K = (params.H, params.K) if params is not None else (0.5, 1.0)
    js, ratios = modulus_ratios(obj, mode, norm_name, H, K, s, levels)
    return _report(float(b) ** -js.astype(float), ratios.mean(axis=0), f"{mode}:{norm_name}")


def modulus_limits(obj, mode: str = "uniform", norm_name: str | None = None, s: float | None = None,
                   finest: int = 4) -> np.ndarray:
    """Per-path proxy for the limsup: max of the ratio over the ``finest`` levels."""
    values, b, n = _rows(obj)
    params = obj.params
    if norm_name is None:
        norm_name = matched_normalizer(params, mode)
    _, ratios = modulus_ratios(obj, mode, norm_name, params.H, params.K, s, range(n - finest + 1, n + 1))
    return ratios.max(axis=1)


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------


def box_counts(obj, levels) -> np.ndarray:
    values, b, n = _rows(obj)
    values = np.ascontiguousarray(values)
    return np.stack([kernels.column_box_counts(values, b, n, int(j)) for j in levels], axis=1)


def box_dimension(path: PathSample, j_min: int, j_max: int) -> ScalingReport:
    """Box-counting dimension of the graph from columns of width ``b^-j``.

    ``scales`` holds the inverse box sizes ``b^j`` so that the fitted slope is
    the dimension estimate itself.
    """
    if j_max > path.grid.level or j_min < 0 or j_max - j_min < 2:
        raise ParameterError("need 0 <= j_min, j_min + 2 <= j_max <= level")
    js = list(range(j_min, j_max + 1))
    counts = box_counts(path, js)[0]
    return _report([float(path.grid.b) ** j for j in js], counts, "box")


# ---------------------------------------------------------------------------
# location of the maximum
# ---------------------------------------------------------------------------


@dataclass
class ArgmaxReport:
    n_paths: int
    level: int
    histogram: list
    atom_at_zero_freq: float
    max_cell_freq: float
    refinement_series: list
    atom_series: list

    def as_dict(self) -> dict:
        return asdict(self)


def leftmost_argmax(values_2d: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximiser, i.e. the leftmost point
    return np.argmax(values_2d, axis=1)


def argmax_distribution(ens: Ensemble, levels=None) -> ArgmaxReport:
    """Leftmost-argmax statistics with the paths restricted to coarser grids.

    For each level ``j`` the path is subsampled to the level-``j`` grid (an exact
    restriction), ``tau`` is its leftmost maximiser and the histogram has the
    ``b^j`` cells ``[k b^-j, (k+1) b^-j)`` with ``t = 1`` folded into the last.
    """
    n = ens.grid.level
    b = ens.grid.b
    levels = list(range(1, n + 1)) if levels is None else list(levels)
    refinement, atoms = [], []
    hist = None
    for j in levels:
        sub = ens.subsample(j)
        tau = leftmost_argmax(sub)
        cells = np.minimum(tau, b**j - 1)
        counts = np.bincount(cells, minlength=b**j)
        refinement.append((int(j), float(counts.max() / ens.n_paths)))
        atoms.append((int(j), float(np.mean(tau == 0))))
        hist = counts
    return ArgmaxReport(ens.n_paths, int(levels[-1]), hist.tolist(), atoms[-1][1], refinement[-1][1],
                        refinement, atoms)


# ---------------------------------------------------------------------------
# digit-restricted point sets and the restricted covariance lower bound
# ---------------------------------------------------------------------------


@dataclass
class RestrictedPairs:
    """Pairs of b-adic points (grid indices at ``level``) from the digit-restricted set."""

    N: int
    b: int
    depth: int
    level: int
    s_idx: np.ndarray
    t_idx: np.ndarray
    rejections: int

    @property
    def s(self) -> np.ndarray:
        return self.s_idx / float(self.b**self.level)

    @property
    def t(self) -> np.ndarray:
        return self.t_idx / float(self.b**self.level)


def in_T_N(idx: int, level: int, b: int, N: int, depth_shifts: int | None = None) -> bool:
    """``{b^k x} in [b^-N, 1 - b^-N]`` for ``k < depth_shifts`` with ``x = idx / b^level``."""
    size = b**level
    lo = b ** (level - N)
    hi = size - lo
    r = idx % size
    for _ in range(level if depth_shifts is None else depth_shifts):
        if not (lo <= r <= hi):
            return False
        r = (r * b) % size
    return True


def _digits_to_index(digits, base, depth):
    x = 0
    for d in digits:
        x = x * base + int(d)
    return x * base ** (depth - len(digits))


def sample_restricted_pairs(N: int, b: int, depth: int, n_pairs: int, seed: int = 0) -> RestrictedPairs:
    """Pairs of points ``sum_i xi_i b^(-iN/2)`` with every digit ``xi_i`` in ``{1, .., b^(N/2) - 2}``.

    The second point of each pair copies a random-length prefix of the first,
    so separations cover all scales.  Each point is checked against the
    fractional-part constraint for every shift ``k < depth N/2``; failures are
    redrawn and counted.
    """
    if N % 2 or N < 2:
        raise ParameterError("N must be a positive even integer")
    base = b ** (N // 2)
    if base <= 3:
        raise ParameterError(f"b^(N/2) = {base} leaves no admissible digits")
    if depth < 3:
        raise ParameterError("depth must be >= 3")
    level = depth * N // 2
    rng = np.random.default_rng(seed)
    s_idx, t_idx = [], []
    rejections = 0
    while len(s_idx) < n_pairs:
        dt = rng.integers(1, base - 1, size=depth)
        shared = int(rng.integers(1, depth - 1))
        ds = dt.copy()
        ds[shared:] = rng.integers(1, base - 1, size=depth - shared)
        if np.array_equal(ds, dt):
            continue
        it = _digits_to_index(dt, base, depth)
        is_ = _digits_to_index(ds, base, depth)
        if not (in_T_N(it, level, b, N) and in_T_N(is_, level, b, N)):
            rejections += 1
            continue
        lo, hi = sorted((is_, it))
        s_idx.append(lo)
        t_idx.append(hi)
    return RestrictedPairs(N, b, depth, level, np.array(s_idx, dtype=np.int64),
                           np.array(t_idx, dtype=np.int64), rejections)


def restricted_ratios(params: ModelParams, pairs: RestrictedPairs, exponent: float | None = None) -> np.ndarray:
    """Exact ``E|Y(t) - Y(s)|^2 / |t - s|^(2 K)`` for each sampled pair."""
    if params.b != pairs.b:
        raise ParameterError("pair base differs from model base")
    exponent = params.K if exponent is None else exponent
    var = increment_variance_idx(pairs.s_idx, pairs.t_idx, params, pairs.level)
    gap = (pairs.t_idx - pairs.s_idx) / float(params.b**pairs.level)
    return var / gap ** (2.0 * exponent)


def scaling_slope(scales, stats) -> float:
    return fit_loglog(scales, stats).slope
