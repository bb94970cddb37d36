"""Piecewise-constant functions on the half-line."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ParameterError


def _prefix_fsum(groups):
    # exactly rounded running sums; raw weights are kept so +w and -w cancel exactly
    out = []
    acc = []
    for g in groups:
        acc.extend(g)
        out.append(math.fsum(acc))
    return out


@dataclass(frozen=True)
class StepFunction:
    """Step function ``sum_i values[i] * 1_[x_i, x_{i+1}] + constant_part * 1_[0, 1]``.

    The function vanishes outside ``[breakpoints[0], breakpoints[-1]]``.
    Instances are always canonical: breakpoints strictly increasing, equal
    neighbouring values merged, no zero pieces at either end.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    constant_part: float = 0.0
    _canonical: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.breakpoints, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if x.size and v.size != x.size - 1:
            raise ParameterError("need exactly one value per interval between breakpoints")
        if x.size == 1 or (x.size == 0 and v.size):
            raise ParameterError("a step function needs at least two breakpoints")
        if np.any(np.diff(x) <= 0):
            raise ParameterError("breakpoints must be strictly increasing")
        if x.size and x[0] < 0:
            raise ParameterError("step functions live on [0, inf)")
        if not self._canonical:
            x, v = _canonicalize(x, v)
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "constant_part", float(self.constant_part))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def indicator(cls, a: float, b: float, weight: float = 1.0) -> "StepFunction":
        return cls.from_intervals([(a, b, weight)])

    @classmethod
    def from_intervals(cls, intervals: Iterable, constant_part: float = 0.0) -> "StepFunction":
        """Sum of weighted indicators ``w * 1_[a, b]``.

        A reversed interval ``(a, b)`` with ``b < a`` stands for ``-1_[b, a]``.
        """
        events: dict[float, list[float]] = {}
        for a, b, *rest in intervals:
            w = float(rest[0]) if rest else 1.0
            a, b = float(a), float(b)
            if b < a:
                a, b, w = b, a, -w
            if a == b or w == 0.0:
                continue
            events.setdefault(a, []).append(w)
            events.setdefault(b, []).append(-w)
        if not events:
            return cls(np.empty(0), np.empty(0), constant_part)
        xs = sorted(events)
        vals = _prefix_fsum(events[x] for x in xs)[:-1]
        return cls(np.array(xs), np.array(vals), constant_part)

    # -- views --------------------------------------------------------------

    @property
    def n_pieces(self) -> int:
        return self.values.size

    def pieces(self, include_constant: bool = True):
        """Arrays ``(left, right, value)``, optionally with the constant piece on [0, 1]."""
        a = self.breakpoints[:-1]
        b = self.breakpoints[1:]
        v = self.values
        if include_constant and self.constant_part != 0.0:
            a = np.append(a, 0.0)
            b = np.append(b, 1.0)
            v = np.append(v, self.constant_part)
        return a, b, v

    def absorb_constant(self) -> "StepFunction":
        """Same function with ``constant_part`` folded into the pieces."""
        if self.constant_part == 0.0:
            return self
        a, b, v = self.pieces()
        return StepFunction.from_intervals(zip(a, b, v))

    def __call__(self, x):
        f = self.absorb_constant()
        x = np.asarray(x, dtype=float)
        if f.n_pieces == 0:
            return np.zeros_like(x) if x.ndim else 0.0
        idx = np.searchsorted(f.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < f.n_pieces)
        out = np.where(inside, f.values[np.clip(idx, 0, f.n_pieces - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def lp_norm_p(self, p: float) -> float:
        """``int |f|**p``."""
        f = self.absorb_constant()
        return math.fsum(np.abs(f.values) ** p * np.diff(f.breakpoints))

    def lp_norm(self, p: float) -> float:
        return self.lp_norm_p(p) ** (1.0 / p)

    def l2_norm_sq(self) -> float:
        return self.lp_norm_p(2.0)

    def support_intervals(self):
        f = self.absorb_constant()
        return [(a, b) for a, b, v in zip(f.breakpoints[:-1], f.breakpoints[1:], f.values) if v != 0.0]

    def scaled_argument(self, c: float) -> "StepFunction":
        """``x -> f(x / c)``; a constant part becomes an ordinary piece on [0, c]."""
        a, b, v = self.pieces()
        return StepFunction.from_intervals(zip(a * c, b * c, v))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if not isinstance(other, StepFunction):
            return NotImplemented
        a1, b1, v1 = self.pieces(include_constant=False)
        a2, b2, v2 = other.pieces(include_constant=False)
        return StepFunction.from_intervals(
            list(zip(a1, b1, v1)) + list(zip(a2, b2, v2)),
            constant_part=self.constant_part + other.constant_part,
        )

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction.from_intervals(
            zip(self.breakpoints[:-1], self.breakpoints[1:], self.values * float(c)),
            constant_part=self.constant_part * float(c),
        )

    __rmul__ = __mul__

    def __neg__(self) -> "StepFunction":
        return self * -1.0

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.values, other.values)
            and self.constant_part == other.constant_part
        )

    __hash__ = None


def _canonicalize(x, v):
    if v.size == 0:
        return np.empty(0), np.empty(0)
    keep = np.ones(v.size, dtype=bool)
    keep[1:] = v[1:] != v[:-1]
    starts = np.flatnonzero(keep)
    vals = v[starts]
    xs = np.append(x[starts], x[-1])
    nz = np.flatnonzero(vals != 0.0)
    if nz.size == 0:
        return np.empty(0), np.empty(0)
    lo, hi = nz[0], nz[-1]
    return xs[lo : hi + 2].copy(), vals[lo : hi + 1].copy()
