"""Sample-path synthesis on b-adic grids.

Fractional Gaussian noise comes from circulant embedding (Cholesky as a
fallback and cross-check).  The Weierstrass superposition on the level-``n``
grid is an exact finite sum: ``{b^m t} = 0`` for every ``m >= n``.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from ._accel import thread_cap
from .errors import ParameterError, ResourceError
from .model import GridSpec, ModelParams, frac_indices

CLIP_TOL = 1e-10
MAX_CHOLESKY = 4096
MAX_PATH_POINTS = 2**22
# paths per synthesis batch; fixed so results never depend on the worker count
CHUNK = 256
RNG_NAME = "numpy.random.Philox keyed by SeedSequence([base_seed, index])"
MAGIC = b"WWB1"


def substream(base_seed: int, index: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for path ``index`` of ``base_seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(base_seed), int(index)])))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed, 0)


def fgn_autocov(n_lags: int, H: float) -> np.ndarray:
    """Unit-step fGn autocovariance ``(|k+1|^2H + |k-1|^2H - 2|k|^2H) / 2``."""
    k = np.arange(n_lags, dtype=float)
    h = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** h + np.abs(k - 1) ** h - 2.0 * k**h)


@lru_cache(maxsize=64)
def _embedding(m: int, H: float):
    r = fgn_autocov(m + 1, H)
    circ = np.concatenate([r, r[-2:0:-1]])
    lam = np.fft.fft(circ).real
    neg = np.clip(-lam, 0.0, None).sum()
    clip_mass = float(neg / np.abs(lam).sum())
    scale = np.sqrt(np.clip(lam, 0.0, None) / (2 * m))
    scale.setflags(write=False)
    return scale, clip_mass


@lru_cache(maxsize=16)
def _cholesky_factor(n: int, H: float):
    if n > MAX_CHOLESKY:
        raise ResourceError(f"Cholesky synthesis limited to {MAX_CHOLESKY} points, got {n}")
    r = fgn_autocov(n, H)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return np.linalg.cholesky(r[idx])


def _padded(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


def embedding_clip_mass(n_points: int, H: float) -> float:
    """Relative negative eigenvalue mass of the circulant embedding for ``n_points``."""
    return _embedding(_padded(n_points), H)[1]


def resolve_method(n_points: int, H: float, method: str) -> str:
    if method not in ("circulant", "cholesky"):
        raise ParameterError(f"unknown synthesis method {method!r}")
    if method == "circulant" and embedding_clip_mass(n_points, H) > CLIP_TOL:
        if n_points > MAX_CHOLESKY:
            raise ResourceError("circulant embedding not PSD and grid too large for Cholesky")
        return "cholesky"
    return method


def _fgn_rows(n: int, H: float, rngs, method: str) -> np.ndarray:
    scale_out = float(n) ** (-H)
    if method == "cholesky":
        low = _cholesky_factor(n, H)
        z = np.stack([rng.standard_normal(n) for rng in rngs])
        return (z @ low.T) * scale_out
    m = _padded(n)
    scale, _ = _embedding(m, H)
    z = np.empty((len(rngs), 2 * m), dtype=complex)
    for i, rng in enumerate(rngs):
        z[i].real = rng.standard_normal(2 * m)
        z[i].imag = rng.standard_normal(2 * m)
    x = np.fft.fft(z * scale, axis=1)[:, :n].real
    return x * scale_out


def synth_fgn(n_points: int, H: float, seed=0, method: str = "circulant") -> np.ndarray:
    """Increments of fBm on ``[0, 1]`` with ``n_points`` equal steps.

    Autocovariance ``gamma(k) (1/n)^2H``.  Non-power-of-two sizes are padded
    and truncated; a circulant embedding with negative eigenvalue mass above
    ``CLIP_TOL`` falls back to Cholesky.
    """
    if n_points < 2:
        raise ParameterError("need at least 2 increments")
    method = resolve_method(n_points, H, method)
    return _fgn_rows(n_points, H, [_as_rng(seed)], method)[0]


@dataclass
class PathSample:
    grid: GridSpec
    values: np.ndarray
    process: str
    params: ModelParams | None = None
    seed: int | None = None
    method: str | None = None

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @classmethod
    def from_function(cls, fn, level: int, b: int = 2) -> "PathSample":
        grid = GridSpec(level, b)
        return cls(grid, np.asarray(fn(grid.points), dtype=float), "function")

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.times, self.values]), delimiter=",",
                   fmt="%.17g", header="t,value", comments="")


def fbm_path(increments: np.ndarray, b: int = 2, H: float | None = None, seed=None,
             method: str | None = None) -> PathSample:
    n = increments.shape[-1]
    level = round(np.log(n) / np.log(b))
    if b**level != n:
        raise ParameterError(f"{n} increments do not form a base-{b} grid")
    values = np.concatenate([[0.0], np.cumsum(increments)])
    params = None if H is None else ModelParams(0.5, b, H)
    return PathSample(GridSpec(level, b), values, "fbm", params, seed, method)


def bridge_values(fbm_values: np.ndarray, kappa_grid: np.ndarray) -> np.ndarray:
    """``W - kappa(t) W(1)`` row-wise; the right endpoint is set to exactly 0."""
    out = fbm_values - kappa_grid * fbm_values[..., -1:]
    out[..., -1] = 0.0
    return out


def bridge_path(fbm: PathSample, params: ModelParams) -> PathSample:
    kap = params.kappa_at(fbm.grid.points)
    return PathSample(fbm.grid, bridge_values(fbm.values, kap), "bridge", params, fbm.seed, fbm.method)


def _check_size(params: ModelParams, level: int) -> GridSpec:
    grid = GridSpec(level, params.b)
    if grid.n_intervals > MAX_PATH_POINTS:
        raise ResourceError(f"b^n = {grid.n_intervals} exceeds {MAX_PATH_POINTS}")
    return grid


def _ww_rows(params: ModelParams, level: int, rngs, method: str, process: str = "ww") -> np.ndarray:
    grid = GridSpec(level, params.b)
    inc = _fgn_rows(grid.n_intervals, params.H, rngs, method)
    w = np.zeros((inc.shape[0], grid.size))
    np.cumsum(inc, axis=1, out=w[:, 1:])
    bridge = bridge_values(w, params.kappa_at(grid.points))
    if process == "bridge":
        return bridge
    table = frac_indices(level, params.b)
    weights = params.alpha ** np.arange(level, dtype=float)
    return kernels.superpose(bridge, weights, table)


def ww_path(params: ModelParams, level: int, seed=0, method: str = "circulant") -> PathSample:
    """One path of ``Y`` on the level-``level`` grid, ``Y[k] = sum_m alpha^m B[{b^m k}]``."""
    grid = _check_size(params, level)
    method = resolve_method(grid.n_intervals, params.H, method)
    vals = _ww_rows(params, level, [_as_rng(seed)], method)[0]
    return PathSample(grid, vals, "ww", params, seed if isinstance(seed, int) else None, method)


@dataclass
class Ensemble:
    """``n_paths`` paths stored row-wise; row ``i`` comes from ``substream(base_seed, i)``."""

    values: np.ndarray
    grid: GridSpec
    params: ModelParams
    base_seed: int
    process: str = "ww"
    method: str = "circulant"
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def path(self, i: int) -> PathSample:
        return PathSample(self.grid, self.values[i], self.process, self.params, None, self.method)

    def __iter__(self):
        return (self.path(i) for i in range(self.n_paths))

    def __len__(self):
        return self.n_paths

    def subsample(self, level: int) -> np.ndarray:
        """Values on the coarser level-``level`` grid (an exact restriction)."""
        step = self.grid.b ** (self.grid.level - level)
        return self.values[:, ::step]

    def to_csv(self, path) -> None:
        header = "t," + ",".join(f"path{i}" for i in range(self.n_paths))
        np.savetxt(path, np.column_stack([self.grid.points, self.values.T]), delimiter=",",
                   fmt="%.17g", header=header, comments="")

    def to_binary(self, path) -> None:
        write_wwb1(path, self.values, self.grid.level, self.grid.b, self.base_seed,
                   self.params.H, self.params.alpha)


def make_ensemble(params: ModelParams, level: int, n_paths: int, base_seed: int = 0,
                  parallelism: int | None = None, method: str = "circulant",
                  process: str = "ww") -> Ensemble:
    """Generate ``n_paths`` independent paths; output is independent of ``parallelism``."""
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    if process not in ("ww", "bridge"):
        raise ParameterError(f"unknown process {process!r}")
    grid = _check_size(params, level)
    method = resolve_method(grid.n_intervals, params.H, method)
    workers = min(parallelism or 1, thread_cap())
    out = np.empty((n_paths, grid.size))

    def run(start):
        stop = min(start + CHUNK, n_paths)
        rngs = [substream(base_seed, i) for i in range(start, stop)]
        out[start:stop] = _ww_rows(params, level, rngs, method, process)

    starts = range(0, n_paths, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)
    return Ensemble(out, grid, params, int(base_seed), process, method)


# ---------------------------------------------------------------------------
# binary block: magic, <level, b, n_paths, seed> as uint64, <H, alpha> as float64
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sQQQQdd")


def write_wwb1(path, values: np.ndarray, level: int, b: int, seed: int, H: float, alpha: float) -> None:
    values = np.atleast_2d(np.asarray(values, dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, level, b, values.shape[0], seed & (2**64 - 1), H, alpha))
        fh.write(np.ascontiguousarray(values).tobytes())


def read_wwb1(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, level, b, n_paths, seed, H, alpha = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParameterError(f"bad magic {magic!r}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n_paths, b**level + 1)
    return {"level": level, "b": b, "n_paths": n_paths, "seed": seed, "H": H, "alpha": alpha,
            "values": values}
