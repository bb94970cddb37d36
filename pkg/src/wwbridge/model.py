"""Model parameters, b-adic grid arithmetic and the bridge shape function."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, GridError, ParameterError

#: Absolute tolerance used to classify ``H == K``.
CRITICAL_TOL = 1e-12


class Kappa(str, Enum):
    """Bridge shape ``kappa`` with ``kappa(0) = 0`` and ``kappa(1) = 1``."""

    STANDARD = "standard"
    LINEAR = "linear"


class Regime(str, Enum):
    SUBCRITICAL = "H<K"
    CRITICAL = "H=K"
    SUPERCRITICAL = "H>K"


def derive_K(alpha: float, b: float) -> float:
    """Return ``min(1, -log_b(alpha))``."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not b > 1.0:
        raise ParameterError(f"b must exceed 1, got {b!r}")
    return min(1.0, -math.log(alpha) / math.log(b))


def kappa_eval(kappa: Kappa | str, t, H: float):
    """Evaluate the bridge shape at ``t`` (scalar or array in [0, 1]).

    Endpoints are returned exactly: ``kappa(0) = 0`` and ``kappa(1) = 1``.
    """
    kappa = Kappa(kappa)
    arr = np.asarray(t, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError("kappa is defined on [0, 1] only")
    if kappa is Kappa.LINEAR:
        out = arr.copy()
    else:
        h2 = 2.0 * H
        out = 0.5 * (1.0 + arr**h2 - (1.0 - arr) ** h2)
        out = np.where(arr == 0.0, 0.0, np.where(arr == 1.0, 1.0, out))
    return float(out) if out.ndim == 0 else out


def frac_index(k: int, m: int, n: int, b: int) -> int:
    """Grid index of ``{b**m * k * b**-n}`` on the level-``n`` grid.

    Exact integer arithmetic; Python ints never overflow.
    """
    size = b**n
    if not (0 <= k <= size):
        raise GridError(f"grid index {k} outside [0, {size}]")
    if m < 0:
        raise GridError("shift exponent m must be nonnegative")
    if m >= n:
        return 0
    return (k * pow(b, m, size)) % size


def frac_indices(n: int, b: int) -> np.ndarray:
    """Table ``T[m, k] = frac_index(k, m, n, b)`` for ``m < n`` and all grid ``k``.

    Row ``m`` is the index map of ``t -> {b**m t}`` on the level-``n`` grid.
    """
    size = b**n
    k = np.arange(size + 1, dtype=np.int64)
    out = np.empty((n, size + 1), dtype=np.int64)
    cur = k % size
    for m in range(n):
        out[m] = cur
        cur = (cur * b) % size
    return out


@dataclass(frozen=True)
class GridSpec:
    """The b-adic grid ``{k b**-level : k = 0..b**level}``."""

    level: int
    b: int = 2

    def __post_init__(self):
        if self.level < 1:
            raise ParameterError("grid level must be >= 1")
        if int(self.b) != self.b or self.b < 2:
            raise ParameterError("grid base must be an integer >= 2")

    @property
    def n_intervals(self) -> int:
        return self.b**self.level

    @property
    def size(self) -> int:
        return self.n_intervals + 1

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.size, dtype=float) / self.n_intervals

    def index_of(self, t: float) -> int:
        """Grid index of ``t``; raises :class:`GridError` if ``t`` is off-grid."""
        x = t * self.n_intervals
        k = int(round(x))
        if not (0 <= k <= self.n_intervals) or k / self.n_intervals != t:
            raise GridError(f"{t!r} is not a point of the level-{self.level} grid")
        return k


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(alpha, b, H)`` of the Wiener-Weierstrass bridge."""

    alpha: float
    b: int
    H: float
    kappa: Kappa = Kappa.STANDARD
    K: float = field(init=False)

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise ParameterError(f"b must be an integer >= 2, got {self.b!r}")
        if not (0.0 < self.H < 1.0):
            raise ParameterError(f"H must lie in (0, 1), got {self.H!r}")
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "kappa", Kappa(self.kappa))
        object.__setattr__(self, "K", derive_K(self.alpha, self.b))

    @classmethod
    def critical(cls, b: int, H: float, kappa: Kappa | str = Kappa.STANDARD) -> "ModelParams":
        """Parameters on the critical line, ``alpha = b**-H`` so that ``K = H``."""
        return cls(alpha=float(b) ** (-H), b=b, H=H, kappa=kappa)

    @property
    def regime(self) -> Regime:
        if abs(self.H - self.K) <= CRITICAL_TOL:
            return Regime.CRITICAL
        return Regime.SUBCRITICAL if self.H < self.K else Regime.SUPERCRITICAL

    @property
    def roughness(self) -> float:
        return min(self.H, self.K)

    def kappa_at(self, t):
        return kappa_eval(self.kappa, t, self.H)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "b": self.b, "H": self.H, "kappa": self.kappa.value}
