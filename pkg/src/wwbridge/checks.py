"""Named validation checks.

Every check is a pure function of a :class:`CheckContext` and returns a
:class:`CheckResult` holding the measured statistics, the tolerances they were
judged against and plot-ready tables.  Nothing here touches the file system;
:mod:`wwbridge.report` serialises the results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fitting import fit_loglog
from .fraccalc import (STRATEGIES, hls_sweep, make_homogeneous_family, ml_norm_sq,
                       l1_positivity_check, random_step_function)
from .gaussian import (helix_profile, increment_step_repr, increment_variance_idx, step_bilinear,
                       ww_cov_matrix)
from .model import GridSpec, ModelParams
from .paths import make_ensemble
from .stats import (NORMALIZERS, PhiSpec, argmax_distribution, box_counts, matched_normalizer,
                    modulus_ratios, phi_sums, restricted_ratios, roughness_exponent,
                    sample_restricted_pairs)
from .stepfunc import StepFunction


@dataclass
class Table:
    header: tuple
    rows: list


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict
    tolerances: dict
    tables: dict = field(default_factory=dict)
    informational: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "check": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "tolerances": self.tolerances,
            "informational": self.informational,
        }


@dataclass
class CheckContext:
    """What a check may read: base seed, path-count override, model and tolerance overrides."""

    seed: int = 0
    n_paths: int | None = None
    params: ModelParams = field(default_factory=lambda: ModelParams(0.5, 2, 0.3))
    level: int = 12
    tolerances: dict = field(default_factory=dict)
    parallelism: int | None = None

    def tol(self, check: str, defaults: dict) -> dict:
        out = dict(defaults)
        for key in defaults:
            full = f"{check}.{key}"
            if full in self.tolerances:
                out[key] = type(defaults[key])(self.tolerances[full])
        return out

    def paths(self, default: int) -> int:
        return default if self.n_paths is None else int(self.n_paths)

    def ensemble(self, params, level, n_paths, offset=0, **kw):
        return make_ensemble(params, level, n_paths, self.seed + offset, self.parallelism, **kw)


# parameter sets shared by several checks; names are used in the tables
REGIMES = {
    "sub_H0.3": ModelParams(0.5, 2, 0.3),
    "sub_H0.5": ModelParams(0.5, 2, 0.5),
    "super_H0.8": ModelParams(0.7, 2, 0.8),
    "critical_H0.5": ModelParams.critical(2, 0.5),
}
TRIO = ("sub_H0.3", "super_H0.8", "critical_H0.5")


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------------------
# exact / deterministic checks
# ---------------------------------------------------------------------------


def check_isometry(ctx: CheckContext) -> CheckResult:
    """Step-function isometry against the double-sum covariance on random b-adic pairs."""
    tol = ctx.tol("isometry", {"rel_err": 1e-9, "n_pairs": 200, "level": 10})
    rng = np.random.default_rng([ctx.seed, 1])
    rows, worst = [], {}
    for name, p in REGIMES.items():
        n = tol["level"]
        size = p.b**n
        err = 0.0
        for _ in range(tol["n_pairs"]):
            ks, kt = sorted(rng.choice(size + 1, 2, replace=False).tolist())
            exact = float(increment_variance_idx(np.int64(ks), np.int64(kt), p, n))
            g = increment_step_repr(ks / size, kt / size, p, n)
            iso = step_bilinear(g, g, p.H)
            rel = abs(iso - exact) / abs(exact)
            err = max(err, rel)
            rows.append((name, ks, kt, exact, iso, rel))
        worst[name] = err
    ok = all(v <= tol["rel_err"] for v in worst.values())
    return CheckResult("isometry", ok, {"max_rel_err": worst}, tol,
                       {"pairs": Table(("set", "k_s", "k_t", "double_sum", "isometry", "rel_err"), rows)})


def check_hl(ctx: CheckContext) -> CheckResult:
    """At ``H = 1/2`` the isometry norm is the plain ``L^2`` norm."""
    tol = ctx.tol("hl", {"rel_err": 1e-12, "n_functions": 100, "n_pieces": 20})
    rng = np.random.default_rng([ctx.seed, 2])
    rows, worst = [], 0.0
    for i in range(tol["n_functions"]):
        f = random_step_function(rng, tol["n_pieces"])
        iso = ml_norm_sq(f, 0.5, "isometry")
        l2 = f.l2_norm_sq()
        rel = abs(iso - l2) / l2
        worst = max(worst, rel)
        rows.append((i, iso, l2, rel))
    return CheckResult("hl", worst <= tol["rel_err"], {"max_rel_err": worst}, tol,
                       {"corpus": Table(("index", "isometry", "l2_sq", "rel_err"), rows)})


HLS_CASES = ((1, 0.5, 0.5), (2, 0.7, 0.3), (3, 0.9, 0.8))


def check_hls(ctx: CheckContext) -> CheckResult:
    """Linear growth of ``||M g_M||^2`` for homogeneous k-interval families."""
    tol = ctx.tol("hls", {"slope_lo": 0.85, "slope_hi": 1.15, "ratio_change": 0.10,
                          "M_max": 24, "M_short": 16})
    rows, series, measured = [], [], {}
    ok = True
    for k, alpha, H in HLS_CASES:
        reports = hls_sweep(k, alpha, H, STRATEGIES, tol["M_max"], seed=ctx.seed)
        for strategy, rep in reports.items():
            per = np.array(rep.norms_sq) / np.array(rep.M_values)
            short = per[: tol["M_short"]]
            spread_long = rep.const_hi / rep.const_lo
            spread_short = float(short.max() / short.min())
            change = abs(spread_long - spread_short) / spread_short
            good = tol["slope_lo"] <= rep.slope <= tol["slope_hi"] and change < tol["ratio_change"]
            ok = ok and good
            key = f"k{k}_a{alpha}_H{H}_{strategy}"
            measured[key] = {"slope": _f(rep.slope), "const_lo": rep.const_lo, "const_hi": rep.const_hi,
                             "spread_change": change, "passed": bool(good)}
            rows.append((k, alpha, H, strategy, rep.slope, rep.const_lo, rep.const_hi, change, int(good)))
            series += [(k, alpha, H, strategy, m, v, v / m) for m, v in zip(rep.M_values, rep.norms_sq)]
    return CheckResult("hls", ok, measured, tol, {
        "summary": Table(("k", "alpha", "H", "strategy", "slope", "const_lo", "const_hi",
                          "spread_change", "passed"), rows),
        "series": Table(("k", "alpha", "H", "strategy", "M", "norm_sq", "norm_sq_over_M"), series),
    })


def check_hl_sharpness(ctx: CheckContext) -> CheckResult:
    """``L^{1/H}`` norm grows like ``M^{2H}`` while the isometry norm grows like ``M``."""
    tol = ctx.tol("hl-sharpness", {"lp_slope": 0.6, "lp_tol": 0.05, "iso_slope": 1.0,
                                   "iso_tol": 0.15, "M_max": 24})
    H, alpha = 0.3, 0.7
    fam, _ = make_homogeneous_family(1, alpha, H, tol["M_max"], "contiguous", ctx.seed)
    Ms = np.arange(1, tol["M_max"] + 1)
    lp = [fam.g(int(m)).lp_norm(1.0 / H) ** 2 for m in Ms]
    iso = [ml_norm_sq(fam.g(int(m)), H) for m in Ms]
    s_lp = fit_loglog(Ms, lp).slope
    s_iso = fit_loglog(Ms, iso).slope
    ok = abs(s_lp - tol["lp_slope"]) <= tol["lp_tol"] and abs(s_iso - tol["iso_slope"]) <= tol["iso_tol"]
    return CheckResult("hl-sharpness", ok, {"lp_slope": s_lp, "iso_slope": s_iso}, tol,
                       {"series": Table(("M", "lp_norm_sq", "iso_norm_sq"),
                                        [(int(m), a, b) for m, a, b in zip(Ms, lp, iso)])})


def _positivity_case(rng):
    # up to 5 intervals, h with up to 10 disjoint nonnegative pieces inside them
    k = int(rng.integers(1, 6))
    cuts = np.sort(rng.uniform(0.0, 4.0, 2 * k))
    intervals = [(float(cuts[2 * i]), float(cuts[2 * i + 1])) for i in range(k)]
    owners = rng.integers(0, k, size=int(rng.integers(1, 11)))
    pieces = []
    for i in range(k):
        c = int(np.sum(owners == i))
        if c == 0:
            continue
        lo, hi = intervals[i]
        pts = np.sort(rng.uniform(lo, hi, 2 * c))
        pieces += [(float(pts[2 * q]), float(pts[2 * q + 1]), float(rng.uniform(0.0, 1.0))) for q in range(c)]
    return intervals, StepFunction.from_intervals(pieces)


def check_positivity(ctx: CheckContext) -> CheckResult:
    """``<1_I, h> >= 0`` for nonnegative ``h`` supported in a finite union of intervals ``I``."""
    tol = ctx.tol("positivity", {"floor": -1e-12, "n_cases": 1000})
    rows, worst = [], {}
    for H in (0.1, 0.3, 0.45):
        rng = np.random.default_rng([ctx.seed, 5, int(H * 100)])
        low = math.inf
        for i in range(tol["n_cases"]):
            intervals, h = _positivity_case(rng)
            if h.n_pieces == 0:
                continue
            v = l1_positivity_check(intervals, h, H)
            low = min(low, v)
            rows.append((H, i, len(intervals), v))
        worst[str(H)] = low
    ok = all(v >= tol["floor"] for v in worst.values())
    return CheckResult("positivity", ok, {"min_pairing": worst}, tol,
                       {"cases": Table(("H", "case", "n_intervals", "pairing"), rows)})


def check_quasi_helix(ctx: CheckContext) -> CheckResult:
    """Exact adjacent-pair variances over scales, normalised by the regime-matched power."""
    tol = ctx.tol("quasi-helix", {"max_abs_slope": 0.05, "level_lo": 3, "level_hi": 12})
    levels = range(tol["level_lo"], tol["level_hi"] + 1)
    sets = {k: REGIMES[k] for k in ("sub_H0.3", "sub_H0.5", "critical_H0.5")}
    extra = {"critical_H0.7": ModelParams.critical(2, 0.7)}
    rows, measured, info = [], {}, {}
    ok = True
    for group, target in ((sets, measured), (extra, info)):
        for name, p in group.items():
            prof = helix_profile(p, levels)
            scales = [float(p.b) ** -int(n) for n in prof.levels]
            slope = fit_loglog(scales, prof.ratio_mean).slope
            target[name] = {"slope_mean": slope,
                            "slope_min": fit_loglog(scales, prof.ratio_min).slope,
                            "slope_max": fit_loglog(scales, prof.ratio_max).slope,
                            "normalizer": prof.normalizer}
            if group is sets:
                ok = ok and abs(slope) <= tol["max_abs_slope"]
            rows += [(name, int(n), a, b, c) for n, a, b, c in
                     zip(prof.levels, prof.ratio_min, prof.ratio_mean, prof.ratio_max)]
    return CheckResult("quasi-helix", ok, measured, tol,
                       {"profile": Table(("set", "level", "ratio_min", "ratio_mean", "ratio_max"), rows)}, info)


def check_tn(ctx: CheckContext) -> CheckResult:
    """Restricted lower bound on digit-restricted pairs, stable under 10x more pairs."""
    tol = ctx.tol("tn", {"n_pairs": 1000, "growth": 10, "max_drift": 2.0, "N": 4, "depth": 6})
    p = ModelParams(2.0 ** -0.55, 2, 0.6)
    mins, rows = {}, []
    for n_pairs in (tol["n_pairs"], tol["n_pairs"] * tol["growth"]):
        pairs = sample_restricted_pairs(tol["N"], 2, tol["depth"], n_pairs, ctx.seed)
        r = restricted_ratios(p, pairs)
        mins[n_pairs] = float(r.min())
        if n_pairs == tol["n_pairs"]:
            rows = [(int(a), int(b), v) for a, b, v in zip(pairs.s_idx, pairs.t_idx, r)]
    small, big = mins.values()
    drift = small / big if big > 0 else math.inf
    ok = small > 0 and big > 0 and drift <= tol["max_drift"]
    return CheckResult("tn", ok, {"min_ratio_small": small, "min_ratio_large": big, "drift": drift}, tol,
                       {"pairs": Table(("s_idx", "t_idx", "ratio"), rows)})


# ---------------------------------------------------------------------------
# Monte Carlo checks
# ---------------------------------------------------------------------------


def _cov_z(values, exact):
    n = values.shape[0]
    emp = values.T @ values / n
    prod_sq = (values**2).T @ (values**2) / n
    se = np.sqrt(np.maximum(prod_sq - emp**2, 0.0) / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (emp - exact) / se, np.where(emp == exact, 0.0, np.inf))
    return emp, se, z


def check_cov_mc(ctx: CheckContext) -> CheckResult:
    """Empirical grid covariance of simulated paths against the exact matrix."""
    tol = ctx.tol("cov-mc", {"max_z": 5.0, "level": 6})
    n_paths = ctx.paths(50_000)
    grid = GridSpec(tol["level"], 2)
    rows, measured = [], {}
    ok = True
    for i, H in enumerate((0.3, 0.5, 0.75)):
        p = ModelParams(0.5, 2, H)
        exact = ww_cov_matrix(grid, p).entries
        ens = ctx.ensemble(p, grid.level, n_paths, offset=100 * i)
        _, _, z = _cov_z(ens.values, exact)
        zmax = float(np.max(np.abs(z)))
        measured[f"H{H}"] = zmax
        ok = ok and zmax <= tol["max_z"]
        iu = np.triu_indices(grid.size)
        rows += [(H, int(a), int(b), exact[a, b], z[a, b]) for a, b in zip(*iu)]
    return CheckResult("cov-mc", ok, {"max_abs_z": measured, "n_paths": n_paths}, tol,
                       {"entries": Table(("H", "i", "j", "exact", "z"), rows)})


def check_cov_mc2(ctx: CheckContext) -> CheckResult:
    """Circulant and Cholesky synthesis: both match the exact variances and each other."""
    tol = ctx.tol("cov-mc2", {"max_z": 5.0, "level": 6})
    n_paths = ctx.paths(20_000)
    p = ctx.params
    grid = GridSpec(tol["level"], p.b)
    exact = np.diag(ww_cov_matrix(grid, p).entries)
    var = {}
    for i, method in enumerate(("circulant", "cholesky")):
        v = ctx.ensemble(p, grid.level, n_paths, offset=7 + i, method=method).values
        var[method] = (np.mean(v**2, axis=0), np.var(v**2, axis=0) / n_paths)
    z = {}
    for method, (m, s2) in var.items():
        se = np.sqrt(s2)
        z[method] = np.where(se > 0, (m - exact) / np.where(se > 0, se, 1.0), 0.0)
    (m1, s1), (m2, s2) = var.values()
    se12 = np.sqrt(s1 + s2)
    z["difference"] = np.where(se12 > 0, (m1 - m2) / np.where(se12 > 0, se12, 1.0), 0.0)
    worst = {k: float(np.max(np.abs(v))) for k, v in z.items()}
    rows = [(float(t), e, var["circulant"][0][i], var["cholesky"][0][i])
            for i, (t, e) in enumerate(zip(grid.points, exact))]
    return CheckResult("cov-mc2", all(v <= tol["max_z"] for v in worst.values()),
                       {"max_abs_z": worst, "n_paths": n_paths}, tol,
                       {"variances": Table(("t", "exact", "circulant", "cholesky"), rows)})


def check_roughness(ctx: CheckContext) -> CheckResult:
    """Squared-increment roughness estimate against ``min(H, K)``."""
    tol = ctx.tol("roughness", {"abs_err": 0.05, "level": 14, "p_offset": 0.3, "majority": 0.9})
    n_paths = ctx.paths(100)
    rows, measured, info = [], {}, {}
    ok = True
    for i, name in enumerate(TRIO):
        p = REGIMES[name]
        ens = ctx.ensemble(p, tol["level"], n_paths, offset=200 + i)
        est = [roughness_exponent(path) for path in ens]
        glad = float(np.mean([e.gladyshev for e in est]))
        reg = float(np.mean([e.regression for e in est]))
        good = abs(glad - p.roughness) <= tol["abs_err"]
        ok = ok and good
        measured[name] = {"estimate": glad, "target": p.roughness, "passed": bool(good)}
        info[name] = {"regression_estimate": reg, **_dichotomy(ens, p.roughness, tol)}
        rows += [(name, j, e.gladyshev, e.regression) for j, e in enumerate(est)]
    return CheckResult("roughness", ok, measured, tol,
                       {"paths": Table(("set", "path", "gladyshev", "regression"), rows)}, info)


def _dichotomy(ens, r, tol):
    # S_n(p) at the finest levels: down for p above 1/r, up for p below
    from .stats import badic_power_sums

    n = ens.grid.level
    js = np.arange(n - 4, n + 1)
    out = {}
    for label, p in (("above", 1.0 / r + tol["p_offset"]), ("below", 1.0 / r - tol["p_offset"])):
        s = badic_power_sums(ens, p, js)
        slope = np.polyfit(js, np.log(s).T, 1)[0]
        frac = float(np.mean(slope < 0)) if label == "above" else float(np.mean(slope > 0))
        out[f"vote_{label}"] = frac
    return out


def check_dimension(ctx: CheckContext) -> CheckResult:
    """Box-counting dimension of the graph against ``max(2 - H, 2 - K)``."""
    tol = ctx.tol("dimension", {"abs_err": 0.1, "level": 14, "j_min": 2, "j_max": 10})
    n_paths = ctx.paths(50)
    cases = {"H0.4_K1": (ModelParams(0.5, 2, 0.4), True),
             "H0.5_K1": (ModelParams(0.5, 2, 0.5), True),
             "H0.7_a0.7": (ModelParams(0.7, 2, 0.7), False)}
    js = list(range(tol["j_min"], tol["j_max"] + 1))
    scales = [2.0**j for j in js]
    rows, measured, info = [], {}, {}
    ok = True
    for i, (name, (p, graded)) in enumerate(cases.items()):
        ens = ctx.ensemble(p, tol["level"], n_paths, offset=300 + i)
        counts = box_counts(ens, js)
        slopes = [fit_loglog(scales, c).slope for c in counts]
        dim = float(np.mean(slopes))
        target = max(2.0 - p.H, 2.0 - p.K)
        entry = {"dimension": dim, "target": target}
        if graded:
            entry["passed"] = abs(dim - target) <= tol["abs_err"]
            ok = ok and entry["passed"]
            measured[name] = entry
        else:
            info[name] = entry
        rows += [(name, j, float(np.mean(counts[:, col]))) for col, j in enumerate(js)]
    return CheckResult("dimension", ok, measured, tol,
                       {"counts": Table(("set", "j", "mean_boxes"), rows)}, info)


def check_argmax(ctx: CheckContext) -> CheckResult:
    """Atom of the leftmost argmax at 0 above the critical line, spreading below it."""
    tol = ctx.tol("argmax", {"atom_floor": 0.01, "atom_change": 0.2, "inversions": 1})
    n_paths = ctx.paths(20_000)
    sup = argmax_distribution(ctx.ensemble(ModelParams(0.7, 2, 0.8), 12, n_paths, offset=400), range(8, 13))
    sub = argmax_distribution(ctx.ensemble(ModelParams(0.5, 2, 0.3), 10, n_paths, offset=401), range(4, 11))
    atoms = [a for _, a in sup.atom_series]
    change = abs(atoms[-1] - atoms[0]) / atoms[0] if atoms[0] > 0 else math.inf
    ok_a = min(atoms) >= tol["atom_floor"] and change < tol["atom_change"]
    freq = [f for _, f in sub.refinement_series]
    inversions = sum(b >= a for a, b in zip(freq, freq[1:]))
    ok_b = inversions <= tol["inversions"]
    rows = [("super", j, a, f) for (j, a), (_, f) in zip(sup.atom_series, sup.refinement_series)]
    rows += [("sub", j, a, f) for (j, a), (_, f) in zip(sub.atom_series, sub.refinement_series)]
    return CheckResult("argmax", ok_a and ok_b, {
        "super_atom_series": atoms, "super_atom_change": change, "super_passed": bool(ok_a),
        "sub_max_cell_series": freq, "sub_inversions": inversions, "sub_passed": bool(ok_b),
        "n_paths": n_paths}, tol,
        {"series": Table(("run", "level", "atom_at_zero", "max_cell"), rows),
         "histogram_super": Table(("cell", "count"), list(enumerate(sup.histogram))),
         "histogram_sub": Table(("cell", "count"), list(enumerate(sub.histogram)))})


PHI_SETS = ("sub_H0.5", "critical_H0.5", "super_H0.8")


def check_phi(ctx: CheckContext) -> CheckResult:
    """Matched Phi gives a flat per-level series; the log-modified functions trend away."""
    tol = ctx.tol("phi", {"matched_max": 0.1, "theta_min": 0.2, "level": 14, "j_lo": 8})
    n_paths = ctx.paths(20)
    levels = list(range(tol["j_lo"], tol["level"] + 1))
    rows, measured = [], {}
    ok = True
    for i, name in enumerate(PHI_SETS):
        p = REGIMES[name]
        ens = ctx.ensemble(p, tol["level"], n_paths, offset=500 + i)
        scales = [float(p.b) ** -j for j in levels]
        slopes = {}
        for modifier in ("none", "over_log", "times_log"):
            s = phi_sums(ens.values, p.b, tol["level"], PhiSpec.regime_matched(p, modifier), levels).mean(axis=0)
            slopes[modifier] = fit_loglog(scales, s).slope
            rows += [(name, modifier, j, v) for j, v in zip(levels, s)]
        good = (abs(slopes["none"]) <= tol["matched_max"] and slopes["over_log"] >= tol["theta_min"]
                and slopes["times_log"] <= -tol["theta_min"])
        ok = ok and good
        measured[name] = {"slope_matched": slopes["none"], "slope_over_log": slopes["over_log"],
                          "slope_times_log": slopes["times_log"], "passed": bool(good)}
    return CheckResult("phi", ok, measured, tol,
                       {"series": Table(("set", "modifier", "level", "mean_s_phi"), rows)})


def _modulus_check(ctx: CheckContext, mode: str) -> CheckResult:
    name = f"modulus-{mode}"
    tol = ctx.tol(name, {"level_lo": 6})
    p = ctx.params
    n_paths = ctx.paths(20)
    ens = ctx.ensemble(p, ctx.level, n_paths, offset=600)
    levels = list(range(tol["level_lo"], ctx.level + 1))
    s = 0.5 if mode == "local" else None
    scales = [float(p.b) ** -j for j in levels]
    slopes, rows = {}, []
    for norm in NORMALIZERS:
        _, r = modulus_ratios(ens, mode, norm, p.H, p.K, s, levels)
        mean = r.mean(axis=0)
        slopes[norm] = fit_loglog(scales, mean).slope
        rows += [(norm, j, v) for j, v in zip(levels, mean)]
    matched = matched_normalizer(p, mode)
    flattest = min(slopes, key=lambda k: abs(slopes[k]))
    return CheckResult(name, flattest == matched,
                       {"slopes": slopes, "matched": matched, "flattest": flattest, "n_paths": n_paths}, tol,
                       {"ratios": Table(("normalizer", "level", "mean_ratio"), rows)})


def check_modulus_uniform(ctx: CheckContext) -> CheckResult:
    return _modulus_check(ctx, "uniform")


def check_modulus_local(ctx: CheckContext) -> CheckResult:
    return _modulus_check(ctx, "local")


CHECKS = {
    "isometry": check_isometry,
    "hl": check_hl,
    "hls": check_hls,
    "hl-sharpness": check_hl_sharpness,
    "positivity": check_positivity,
    "quasi-helix": check_quasi_helix,
    "tn": check_tn,
    "cov-mc": check_cov_mc,
    "cov-mc2": check_cov_mc2,
    "roughness": check_roughness,
    "dimension": check_dimension,
    "argmax": check_argmax,
    "phi": check_phi,
    "modulus-uniform": check_modulus_uniform,
    "modulus-local": check_modulus_local,
}


def run_check(name: str, ctx: CheckContext) -> CheckResult:
    try:
        fn = CHECKS[name]
    except KeyError:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}") from None
    return fn(ctx)
