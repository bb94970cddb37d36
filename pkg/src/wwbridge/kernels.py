"""Hot numeric loops, each with a numba kernel and a NumPy twin.

The public functions dispatch on :data:`wwbridge._accel.USE_NUMBA`; both
paths are kept importable (``*_nb`` / ``*_np``) so the benchmark and the
test-suite can compare them directly.
"""
import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# Weierstrass superposition  Y[k] = sum_m alpha**m * B[T[m, k]]
# ---------------------------------------------------------------------------


@njit(cache=True)
def superpose_nb(bridge, weights, table):
    n_paths, size = bridge.shape
    n_terms = table.shape[0]
    out = np.zeros((n_paths, size))
    for p in range(n_paths):
        for k in range(size):
            acc = 0.0
            for m in range(n_terms):
                acc += weights[m] * bridge[p, table[m, k]]
            out[p, k] = acc
    return out


def superpose_np(bridge, weights, table):
    out = np.zeros(bridge.shape)
    for m in range(table.shape[0]):
        out += weights[m] * bridge[:, table[m]]
    return out


# ---------------------------------------------------------------------------
# b-adic power sums  S_j(p) = sum_k |f((k+1) b^-j) - f(k b^-j)|^p
# ---------------------------------------------------------------------------


@njit(cache=True)
def level_power_sums_nb(values, b, level, p, levels):
    n_paths = values.shape[0]
    out = np.zeros((n_paths, levels.shape[0]))
    for i in range(levels.shape[0]):
        step = b ** (level - levels[i])
        n_inc = b ** levels[i]
        for q in range(n_paths):
            acc = 0.0
            if p == 2.0:
                # generic pow is several times slower than a multiply
                for k in range(n_inc):
                    d = values[q, (k + 1) * step] - values[q, k * step]
                    acc += d * d
            else:
                for k in range(n_inc):
                    acc += abs(values[q, (k + 1) * step] - values[q, k * step]) ** p
            out[q, i] = acc
    return out


def level_power_sums_np(values, b, level, p, levels):
    out = np.zeros((values.shape[0], len(levels)))
    for i, j in enumerate(levels):
        coarse = values[:, :: b ** (level - j)]
        out[:, i] = (np.abs(np.diff(coarse, axis=1)) ** p).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# column-wise box counts at scale b^-j
# ---------------------------------------------------------------------------


@njit(cache=True)
def column_box_counts_nb(values, b, level, j):
    n_paths = values.shape[0]
    width = b ** (level - j)
    n_cols = b**j
    delta = float(b) ** (-j)
    out = np.zeros(n_paths)
    for q in range(n_paths):
        total = 0.0
        for c in range(n_cols):
            lo = values[q, c * width]
            hi = lo
            for k in range(c * width + 1, (c + 1) * width + 1):
                v = values[q, k]
                if v < lo:
                    lo = v
                elif v > hi:
                    hi = v
            cells = np.ceil((hi - lo) / delta)
            total += cells if cells > 1.0 else 1.0
        out[q] = total
    return out


def column_box_counts_np(values, b, level, j):
    width = b ** (level - j)
    n_cols = b**j
    body = values[:, :-1].reshape(values.shape[0], n_cols, width)
    right = values[:, width::width][:, :, None]
    cols = np.concatenate([body, right], axis=2)
    spans = cols.max(axis=2) - cols.min(axis=2)
    cells = np.maximum(np.ceil(spans / float(b) ** (-j)), 1.0)
    return cells.sum(axis=1)


# ---------------------------------------------------------------------------
# largest oscillation over windows of ``width`` steps: sup_{|t-s|<=h} |f(t)-f(s)|
# ---------------------------------------------------------------------------


@njit(cache=True)
def window_oscillation_nb(values, width):
    n = values.shape[0]
    span = width + 1
    maxq = np.empty(n, dtype=np.int64)
    minq = np.empty(n, dtype=np.int64)
    h1 = 0
    t1 = 0
    h2 = 0
    t2 = 0
    best = 0.0
    for i in range(n):
        v = values[i]
        while t1 > h1 and values[maxq[t1 - 1]] <= v:
            t1 -= 1
        maxq[t1] = i
        t1 += 1
        while t2 > h2 and values[minq[t2 - 1]] >= v:
            t2 -= 1
        minq[t2] = i
        t2 += 1
        if maxq[h1] <= i - span:
            h1 += 1
        if minq[h2] <= i - span:
            h2 += 1
        osc = values[maxq[h1]] - values[minq[h2]]
        if osc > best:
            best = osc
    return best


def window_oscillation_np(values, width):
    span = width + 1
    hi = maximum_filter1d(values, size=span, origin=(span - 1) // 2, mode="nearest")
    lo = minimum_filter1d(values, size=span, origin=(span - 1) // 2, mode="nearest")
    return float(np.max(hi - lo))


if USE_NUMBA:
    superpose = superpose_nb
    level_power_sums = level_power_sums_nb
    column_box_counts = column_box_counts_nb
    window_oscillation = window_oscillation_nb
else:
    superpose = superpose_np
    level_power_sums = level_power_sums_np
    column_box_counts = column_box_counts_np
    window_oscillation = window_oscillation_np
