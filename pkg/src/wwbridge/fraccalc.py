"""Riemann-Liouville integrals of step functions and Hardy-Littlewood checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import DomainError, NumericError, ParameterError
from .fitting import fit_loglog
from .gaussian import step_bilinear
from .stepfunc import StepFunction

STRATEGIES = ("contiguous", "random_gap", "adversarial_nested")


def _check_beta(beta: float) -> None:
    if not (-0.5 < beta < 0.5) or beta == 0.0:
        raise DomainError(f"beta must lie in (-1/2, 1/2) without 0, got {beta!r}")


def _pow_diff(p, q, beta):
    """``q_+^beta - p_+^beta`` for ``p <= q`` without cancellation when both are large."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(p, q).shape)
    both = p > 0
    only_q = (~both) & (q > 0)
    pb = p[both] if p.ndim else p
    qb = q[both] if q.ndim else q
    if np.any(both):
        out[both] = pb**beta * np.expm1(beta * np.log1p((qb - pb) / pb))
    out[only_q] = np.broadcast_to(q, out.shape)[only_q] ** beta
    return out


def rl_apply(f: StepFunction, beta: float, x):
    """Right-sided Riemann-Liouville integral ``I_-^beta f`` evaluated at ``x``.

    For ``beta < 0`` the value at a breakpoint is infinite and returned as
    ``+inf``.
    """
    _check_beta(beta)
    a, b, v = f.pieces()
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if v.size == 0:
        out = np.zeros_like(xs)
    else:
        terms = _pow_diff(a[None, :] - xs[:, None], b[None, :] - xs[:, None], beta)
        out = (terms * v[None, :]).sum(axis=1) / gamma_fn(beta + 1.0)
        if beta < 0:
            at_break = np.isin(xs, np.union1d(a, b))
            out[at_break] = np.inf
    return float(out[0]) if np.ndim(x) == 0 else out


def _squared_integral(f: StepFunction, beta: float, epsrel: float) -> float:
    """``int_R (I_-^beta f)^2 dx`` by adaptive quadrature.

    Each gap between breakpoints is mapped with ``x = r - (r - l) u^q`` so the
    integrable blow-up at the right breakpoint becomes bounded, and the left
    tail uses ``x = x0 - s`` split at ``s = 1``.  The integrand is evaluated
    from the offset to the breakpoint, never from ``x`` itself.
    """
    a, b, v = f.pieces()
    knots = np.union1d(a, b)
    g = gamma_fn(beta + 1.0)
    q = 1.0 / (beta + 0.5)

    def rl(anchor, d):
        # value at x = anchor - d; offsets are formed as (a - anchor) + d so
        # that tiny d keeps full relative precision next to a breakpoint
        terms = _pow_diff((a - anchor) + d, (b - anchor) + d, beta)
        return float(np.dot(terms, v)) / g

    opts = dict(epsabs=1e-15, epsrel=epsrel, limit=400)
    with warnings.catch_warnings():
        # roundoff warnings at the 1e-15 absolute floor are expected
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        parts = _segments(rl, knots, q, opts)
    total = math.fsum(parts)
    if not np.isfinite(total):
        raise NumericError(f"quadrature diverged for beta={beta}: parts={parts}")
    return total


def _segments(rl, knots, q, opts):
    parts = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        width = hi - lo
        val, _ = integrate.quad(lambda u: rl(hi, width * u**q) ** 2 * q * width * u ** (q - 1), 0.0, 1.0, **opts)
        parts.append(val)
    x0 = knots[0]
    near, _ = integrate.quad(lambda u: rl(x0, u**q) ** 2 * q * u ** (q - 1), 0.0, 1.0, **opts)
    far, _ = integrate.quad(lambda s: rl(x0, 1.0 + s) ** 2, 0.0, np.inf, **opts)
    return parts + [near, far]


@lru_cache(maxsize=None)
def calibrate_norm_constant(H: float) -> float:
    """Constant ``C_H`` making ``||C_H I_-^{H-1/2} 1_[0,1]||_2 = 1 = E[W_H(1)^2]``."""
    if not (0.0 < H < 1.0):
        raise ParameterError("H must lie in (0, 1)")
    if H == 0.5:
        return 1.0
    val = _squared_integral(StepFunction.indicator(0.0, 1.0), H - 0.5, 1e-12)
    if not val > 0:
        raise NumericError(f"calibration integral is {val}")
    return 1.0 / math.sqrt(val)


def ml_norm_sq(f: StepFunction, H: float, mode: str = "isometry") -> float:
    """``||M_-^H f||_2^2``, the second moment of ``int f dW_H``."""
    if mode == "isometry":
        return step_bilinear(f, f, H)
    if mode != "quadrature":
        raise ParameterError(f"unknown mode {mode!r}")
    if f.n_pieces == 0 and f.constant_part == 0.0:
        return 0.0
    if H == 0.5:
        return f.l2_norm_sq()
    c = calibrate_norm_constant(H)
    return c * c * _squared_integral(f.absorb_constant(), H - 0.5, 1e-9)


def hardy_littlewood_check(f: StepFunction, H: float, floor: float | None = None,
                           ceiling: float | None = None):
    """Ratio ``||M_-^H f||^2 / ||f||_{L^{1/H}}^2`` and whether it respects the bound.

    The bound is a lower ``floor`` for ``H <= 1/2`` and an upper ``ceiling`` for
    ``H >= 1/2``; without a supplied constant only positivity and finiteness
    are required.
    """
    ratio = ml_norm_sq(f, H) / f.lp_norm(1.0 / H) ** 2
    ok = math.isfinite(ratio) and ratio > 0
    if H <= 0.5 and floor is not None:
        ok = ok and ratio >= floor
    if H >= 0.5 and ceiling is not None:
        ok = ok and ratio <= ceiling
    return ratio, ok


def random_step_function(rng: np.random.Generator, n_pieces: int, nonnegative: bool = False,
                         span: float = 4.0) -> StepFunction:
    x = np.sort(rng.uniform(0.0, span, n_pieces + 1))
    v = rng.uniform(0.0, 1.0, n_pieces) if nonnegative else rng.normal(size=n_pieces)
    return StepFunction.from_intervals(zip(x[:-1], x[1:], v))


@dataclass
class HLCorpusReport:
    H: float
    n_functions: int
    ratios: np.ndarray
    floor_half: float
    floor_full: float
    ceiling_half: float
    ceiling_full: float

    @property
    def stable(self) -> bool:
        # constant relevant to the inequality direction must not drift by more than 2x
        if self.H <= 0.5:
            return self.floor_full > 0 and self.floor_half / self.floor_full < 2.0
        return math.isfinite(self.ceiling_full) and self.ceiling_full / self.ceiling_half < 2.0


def hardy_littlewood_corpus(H: float, n_functions: int = 1000, n_pieces: int = 20,
                            seed: int = 0) -> HLCorpusReport:
    rng = np.random.default_rng(seed)
    ratios = np.array([
        hardy_littlewood_check(random_step_function(rng, n_pieces), H)[0]
        for _ in range(n_functions)
    ])
    half = ratios[: n_functions // 2]
    return HLCorpusReport(H, n_functions, ratios, float(half.min()), float(ratios.min()),
                          float(half.max()), float(ratios.max()))


# ---------------------------------------------------------------------------
# homogeneous k-interval families
# ---------------------------------------------------------------------------


@dataclass
class KIntervalFamily:
    """Sets ``I_m`` (``m < M``) of at most ``k`` intervals each, ``|I_m| = b^m``."""

    k: int
    alpha: float
    H: float
    strategy: str
    intervals: list = field(repr=False)

    @property
    def b(self) -> float:
        return self.alpha ** (-1.0 / self.H)

    @property
    def M(self) -> int:
        return len(self.intervals)

    def g(self, M: int | None = None) -> StepFunction:
        """``g_M = sum_{m < M} alpha^m 1_{I_m}``."""
        M = self.M if M is None else M
        pieces = [(lo, hi, self.alpha**m) for m in range(M) for lo, hi in self.intervals[m]]
        return StepFunction.from_intervals(pieces)

    def lengths(self) -> np.ndarray:
        return np.array([math.fsum(hi - lo for lo, hi in im) for im in self.intervals])


def _split_lengths(rng, total, parts):
    cuts = np.sort(rng.uniform(0.0, 1.0, parts - 1))
    fr = np.diff(np.concatenate([[0.0], cuts, [1.0]]))
    lens = [total * x for x in fr[:-1]]
    lens.append(total - math.fsum(lens))
    return lens


def make_homogeneous_family(k: int, alpha: float, H: float, M: int, strategy: str = "contiguous",
                            seed: int = 0) -> tuple[KIntervalFamily, StepFunction]:
    """Build ``I_0..I_{M-1}`` with ``|I_m| = b^m``, ``b = alpha^(-1/H)``, and ``g_M``.

    ``contiguous`` packs single intervals left to right; ``random_gap`` splits each
    ``I_m`` into at most ``k`` pieces separated by seeded random gaps;
    ``adversarial_nested`` anchors every ``I_m`` at the origin so the first unit
    interval is covered by all levels.
    """
    if k < 1 or M < 1:
        raise ParameterError("need k >= 1 and M >= 1")
    if not (0 < alpha < 1) or not (0 < H < 1):
        raise ParameterError("alpha and H must lie in (0, 1)")
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    b = alpha ** (-1.0 / H)
    rng = np.random.default_rng(seed)
    intervals = []
    cursor = 0.0
    for m in range(M):
        length = b**m
        if strategy == "contiguous":
            intervals.append([(cursor, cursor + length)])
            cursor += length
        elif strategy == "adversarial_nested":
            intervals.append([(0.0, length)])
        else:
            parts = int(rng.integers(1, k + 1))
            im = []
            for piece in _split_lengths(rng, length, parts):
                cursor += rng.uniform(0.0, 0.5) * length
                im.append((cursor, cursor + piece))
                cursor += piece
            intervals.append(im)
    fam = KIntervalFamily(k, alpha, H, strategy, intervals)
    return fam, fam.g()


@dataclass
class HLReport:
    M_values: list
    norms_sq: list
    slope: float
    const_lo: float
    const_hi: float
    strategy: str = ""

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "M_values": list(map(int, self.M_values)),
            "norms_sq": list(map(float, self.norms_sq)),
            "slope": float(self.slope),
            "const_lo": float(self.const_lo),
            "const_hi": float(self.const_hi),
        }

    def csv_rows(self):
        return [(m, v, v / m) for m, v in zip(self.M_values, self.norms_sq)]


def hls_sweep(k: int, alpha: float, H: float, strategies=STRATEGIES, M_max: int = 24,
              seed: int = 0) -> dict[str, HLReport]:
    """``||M_-^H g_M||^2`` for ``M = 1..M_max`` with log-log slope and ratio bounds."""
    if M_max < 8:
        raise ParameterError("M_max must be at least 8")
    if isinstance(strategies, str):
        strategies = (strategies,)
    out = {}
    for strategy in strategies:
        fam, _ = make_homogeneous_family(k, alpha, H, M_max, strategy, seed)
        Ms = list(range(1, M_max + 1))
        norms = [ml_norm_sq(fam.g(M), H) for M in Ms]
        fit = fit_loglog(Ms, norms)
        per = np.array(norms) / np.array(Ms)
        out[strategy] = HLReport(Ms, norms, fit.slope, float(per.min()), float(per.max()), strategy)
    return out


def l1_positivity_check(intervals, h: StepFunction, H: float) -> float:
    """``<1_I, h>`` for a nonnegative step function ``h`` supported in ``I``."""
    if not (0.0 < H < 0.5):
        raise ParameterError("positivity is asserted for H in (0, 1/2)")
    if np.any(h.values < 0) or h.constant_part != 0.0:
        raise ParameterError("h must be nonnegative with no constant part")
    ind = StepFunction.from_intervals([(lo, hi, 1.0) for lo, hi in intervals])
    for lo, hi in h.support_intervals():
        if ind(0.5 * (lo + hi)) <= 0 or not _covered(intervals, lo, hi):
            raise ParameterError(f"h is nonzero on ({lo}, {hi}) outside I")
    return step_bilinear(ind, h, H)


def _covered(intervals, lo, hi):
    merged = sorted(intervals)
    reach = lo
    for a, b in merged:
        if a <= reach < b:
            reach = b
        if reach >= hi:
            return True
    return reach >= hi
