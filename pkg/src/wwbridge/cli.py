"""``wwb`` command line.

Every subcommand prints a JSON summary on stdout.  With ``--out DIR`` it also
writes ``DIR/<subcommand>/<name>.{csv,json}`` and ``DIR/manifest.json``.
Exit status: 0 on success, 1 when a ``report`` check fails, 2 on usage or
parameter errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .checks import CHECKS, Table
from .errors import WWBError
from .fitting import fit_loglog
from .fraccalc import STRATEGIES, hardy_littlewood_corpus, hls_sweep
from .gaussian import (increment_step_repr, increment_variance_idx, step_bilinear, ww_cov_idx,
                       ww_cov_truncated)
from .model import GridSpec, ModelParams
from .paths import make_ensemble
from .report import (ExperimentConfig, dumps_csv, jsonable, run_report, sha256, table_files,
                     write_files, write_manifest)
from .stats import (NORMALIZERS, PhiSpec, argmax_distribution, box_counts, matched_normalizer,
                    modulus_ratios, phi_sums, restricted_ratios, roughness_exponent,
                    sample_restricted_pairs)

MAX_EXACT_LEVEL = 40
TRUNCATION = 60


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _params(args) -> ModelParams:
    return ModelParams(args.alpha, args.b, args.H, args.kappa)


def _ensemble(args):
    return make_ensemble(_params(args), args.level, args.n_paths, args.seed, args.parallelism,
                         args.method)


def _levels(spec: str | None, top: int, lo_default: int = 1) -> list[int]:
    if spec is None:
        return list(range(lo_default, top + 1))
    lo, _, hi = spec.partition(":")
    return list(range(int(lo), int(hi or lo) + 1))


def _emit(args, name: str, summary: dict, tables: dict | None = None, raw: dict | None = None) -> int:
    """Print ``summary``; with ``--out`` write files and a manifest."""
    out = getattr(args, "out", None)
    files = {}
    if out:
        data = table_files(name, tables or {}, summary)
        data.update({f"{name}/{k}": v for k, v in (raw or {}).items()})
        files = write_files(out, data)
        cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "t0")}
        write_manifest(out, {"subcommand": name, **cfg}, files, {}, time.perf_counter() - args.t0)
    print(json.dumps(jsonable({**summary, "files": files}), indent=2, sort_keys=True))
    return 0


def _grid_level(x: float, b: int) -> int | None:
    for n in range(0, MAX_EXACT_LEVEL + 1):
        k = x * b**n
        if k == int(k):
            return n
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    ens = make_ensemble(_params(args), args.level, args.n_paths, args.seed, args.parallelism,
                        args.method, args.process)
    if args.format == "binary":
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "paths.wwb"
            ens.to_binary(target)
            raw = {"paths.wwb": target.read_bytes()}
    else:
        header = ["t"] + [f"path{i}" for i in range(ens.n_paths)]
        rows = np.column_stack([ens.grid.points, ens.values.T]).tolist()
        raw = {"paths.csv": dumps_csv(header, rows)}
    digest = {k: sha256(v) for k, v in raw.items()}
    summary = {"process": args.process, "method": ens.method, "n_paths": ens.n_paths,
               "level": ens.grid.level, "sha256": digest}
    if not args.out:
        args.out = "wwb-out"
    return _emit(args, "simulate", summary, raw=raw)


def cmd_cov(args) -> int:
    p = _params(args)
    ns, nt = _grid_level(args.s, p.b), _grid_level(args.t, p.b)
    if args.truncate is None and ns is not None and nt is not None:
        n = max(ns, nt, 1) if args.level is None else args.level
        grid = GridSpec(n, p.b)
        ks, kt = grid.index_of(args.s), grid.index_of(args.t)
        value = float(ww_cov_idx(np.int64(ks), np.int64(kt), p, n))
        summary = {"s": args.s, "t": args.t, "value": value, "mode": "exact", "level": n}
    else:
        tc = ww_cov_truncated(args.s, args.t, p, args.truncate or TRUNCATION)
        summary = {"s": args.s, "t": args.t, "value": tc.value, "mode": "truncated",
                   "terms": tc.truncation, "tail_bound": tc.tail_bound}
    return _emit(args, "cov", {**summary, "params": p.as_dict()})


def cmd_increment_var(args) -> int:
    p = _params(args)
    n = args.level
    if n is None:
        ns, nt = _grid_level(args.s, p.b), _grid_level(args.t, p.b)
        if ns is None or nt is None:
            raise WWBError("increment-var needs b-adic points")
        n = max(ns, nt, 1)
    grid = GridSpec(n, p.b)
    ks, kt = grid.index_of(args.s), grid.index_of(args.t)
    exact = float(increment_variance_idx(np.int64(ks), np.int64(kt), p, n))
    g = increment_step_repr(args.s, args.t, p, n)
    iso = step_bilinear(g, g, p.H)
    return _emit(args, "increment-var", {"s": args.s, "t": args.t, "level": n, "double_sum": exact,
                                          "isometry": iso, "params": p.as_dict()})


def cmd_hl_check(args) -> int:
    rep = hardy_littlewood_corpus(args.H, args.n_functions, args.n_pieces, args.seed)
    summary = {"H": args.H, "n_functions": rep.n_functions, "floor_half": rep.floor_half,
               "floor_full": rep.floor_full, "ceiling_half": rep.ceiling_half,
               "ceiling_full": rep.ceiling_full, "stable": rep.stable}
    table = Table(("index", "ratio"), list(enumerate(rep.ratios.tolist())))
    return _emit(args, "hl-check", summary, {"ratios": table})


def cmd_hls_sweep(args) -> int:
    strategies = STRATEGIES if args.strategy == "all" else (args.strategy,)
    reps = hls_sweep(args.k, args.alpha, args.H, strategies, args.Mmax, args.seed)
    summary = {"k": args.k, "alpha": args.alpha, "H": args.H, "M_max": args.Mmax,
               "results": {s: r.as_dict() for s, r in reps.items()}}
    if len(reps) == 1:
        summary["slope"] = next(iter(reps.values())).slope
    tables = {f"series_{s}": Table(("M", "norm_sq", "norm_sq_over_M"), r.csv_rows()) for s, r in reps.items()}
    return _emit(args, "hls-sweep", summary, tables)


def cmd_variation(args) -> int:
    ens = _ensemble(args)
    p = ens.params
    levels = _levels(args.levels, args.level)
    if args.p is not None:
        phi = PhiSpec("custom_power", p.H, p.K, exponent=args.p)
    else:
        phi = PhiSpec.regime_matched(p, args.modifier)
    sums = phi_sums(ens.values, p.b, args.level, phi, levels, args.strategy)
    mean = sums.mean(axis=0)
    fit = fit_loglog([float(p.b) ** -j for j in levels], mean)
    summary = {"phi": {"variant": phi.variant, "modifier": phi.modifier, "power": phi.power, "x0": phi.x0},
               "strategy": args.strategy, "levels": levels, "mean_series": mean,
               "lower_bound_per_path": sums.max(axis=1), "slope": fit.slope}
    return _emit(args, "variation", summary,
                 {"series": Table(("level", "mean_s_phi"), list(zip(levels, mean.tolist())))})


def cmd_roughness(args) -> int:
    ens = _ensemble(args)
    est = [roughness_exponent(path, args.top_levels) for path in ens]
    glad = [e.gladyshev for e in est]
    summary = {"target": ens.params.roughness, "mean_gladyshev": float(np.mean(glad)),
               "mean_regression": float(np.mean([e.regression for e in est])), "n_paths": ens.n_paths}
    rows = [(i, e.gladyshev, e.regression) for i, e in enumerate(est)]
    return _emit(args, "roughness", summary, {"paths": Table(("path", "gladyshev", "regression"), rows)})


def cmd_modulus(args) -> int:
    ens = _ensemble(args)
    p = ens.params
    levels = _levels(args.levels, args.level)
    names = NORMALIZERS if args.normalizer == "all" else (args.normalizer,)
    scales = [float(p.b) ** -j for j in levels]
    slopes, rows = {}, []
    for norm in names:
        _, r = modulus_ratios(ens, args.mode, norm, p.H, p.K, args.s, levels)
        mean = r.mean(axis=0)
        slopes[norm] = fit_loglog(scales, mean).slope
        rows += [(norm, j, v) for j, v in zip(levels, mean.tolist())]
    summary = {"mode": args.mode, "matched": matched_normalizer(p, args.mode), "slopes": slopes,
               "flattest": min(slopes, key=lambda k: abs(slopes[k]))}
    return _emit(args, "modulus", summary, {"ratios": Table(("normalizer", "level", "mean_ratio"), rows)})


def cmd_dimension(args) -> int:
    ens = _ensemble(args)
    js = list(range(args.jmin, args.jmax + 1))
    counts = box_counts(ens, js)
    scales = [float(ens.grid.b) ** j for j in js]
    slopes = [fit_loglog(scales, c).slope for c in counts]
    p = ens.params
    summary = {"dimension": float(np.mean(slopes)), "target": max(2 - p.H, 2 - p.K),
               "per_path": slopes, "informational": not p.K > 2 * p.H - 1}
    rows = [(j, float(np.mean(counts[:, i]))) for i, j in enumerate(js)]
    return _emit(args, "dimension", summary, {"counts": Table(("j", "mean_boxes"), rows)})


def cmd_argmax(args) -> int:
    ens = _ensemble(args)
    rep = argmax_distribution(ens, _levels(args.levels, args.level))
    rows = [(j, a, f) for (j, a), (_, f) in zip(rep.atom_series, rep.refinement_series)]
    return _emit(args, "argmax", rep.as_dict(), {
        "series": Table(("level", "atom_at_zero", "max_cell"), rows),
        "histogram": Table(("cell", "count"), list(enumerate(rep.histogram)))})


def cmd_restricted_pairs(args) -> int:
    pairs = sample_restricted_pairs(args.N, args.b, args.depth, args.n_pairs, args.seed)
    r = restricted_ratios(_params(args), pairs)
    summary = {"N": args.N, "depth": args.depth, "level": pairs.level, "n_pairs": args.n_pairs,
               "rejections": pairs.rejections, "min_ratio": float(r.min()), "max_ratio": float(r.max())}
    rows = list(zip(pairs.s_idx.tolist(), pairs.t_idx.tolist(), r.tolist()))
    return _emit(args, "restricted-pairs", summary, {"pairs": Table(("s_idx", "t_idx", "ratio"), rows)})


def cmd_report(args) -> int:
    cfg = ExperimentConfig.from_toml(args.config) if args.config else ExperimentConfig()
    if args.checks:
        cfg = ExperimentConfig.from_dict({**cfg.as_dict(), "checks": args.checks.split(",")})
    if args.n_paths is not None:
        cfg.n_paths = args.n_paths
    if args.seed is not None:
        cfg.seed = args.seed
    outcome = run_report(cfg, args.out)
    for name, res in outcome.results.items():
        print(f"{'PASS' if res.passed else 'FAIL'} {name}", file=sys.stderr)
    print(json.dumps({"passed": outcome.passed, "manifest": str(outcome.manifest),
                      "checks": {n: r.passed for n, r in outcome.results.items()}}, indent=2, sort_keys=True))
    return 0 if outcome.passed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _model_args(p, alpha=0.5, H=0.3, level=12, n_paths=20):
    p.add_argument("--alpha", type=float, default=alpha)
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--H", type=float, default=H)
    p.add_argument("--kappa", choices=("standard", "linear"), default="standard")
    p.add_argument("--level", type=int, default=level)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-paths", type=int, default=n_paths)
    p.add_argument("--method", choices=("circulant", "cholesky"), default="circulant")
    p.add_argument("--parallelism", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wwb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default=None, help="output directory")
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "simulate paths")
    _model_args(p, n_paths=1, level=10)
    p.add_argument("--process", choices=("ww", "bridge"), default="ww")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")

    p = add("cov", cmd_cov, "covariance at two points")
    _model_args(p, level=None)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--truncate", type=int, default=None, help="series terms for non-grid points")

    p = add("increment-var", cmd_increment_var, "increment variance by two routes")
    _model_args(p, level=None)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)

    p = add("hl-check", cmd_hl_check, "Hardy-Littlewood ratios on a random corpus")
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--n-functions", type=int, default=1000)
    p.add_argument("--n-pieces", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = add("hls-sweep", cmd_hls_sweep, "isometry norm of homogeneous families")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--strategy", choices=STRATEGIES + ("all",), default="all")
    p.add_argument("--Mmax", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)

    p = add("variation", cmd_variation, "per-level Phi or p-variation sums")
    _model_args(p)
    p.add_argument("--p", type=float, default=None, help="plain p-th power instead of the matched Phi")
    p.add_argument("--modifier", choices=("none", "times_log", "over_log"), default="none")
    p.add_argument("--strategy", choices=("badic_sweep", "extrema_partition"), default="badic_sweep")
    p.add_argument("--levels", default=None, help="lo:hi")

    p = add("roughness", cmd_roughness, "roughness exponent estimates")
    _model_args(p, level=14, n_paths=100)
    p.add_argument("--top-levels", type=int, default=5)

    p = add("modulus", cmd_modulus, "normalised sup-increment series")
    _model_args(p)
    p.add_argument("--mode", choices=("uniform", "local"), default="uniform")
    p.add_argument("--normalizer", choices=NORMALIZERS + ("all",), default="all")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--levels", default=None, help="lo:hi")

    p = add("dimension", cmd_dimension, "box-counting dimension")
    _model_args(p, level=14, n_paths=50)
    p.add_argument("--jmin", type=int, default=2)
    p.add_argument("--jmax", type=int, default=10)

    p = add("argmax", cmd_argmax, "leftmost argmax statistics")
    _model_args(p, level=10, n_paths=2000)
    p.add_argument("--levels", default=None, help="lo:hi")

    p = add("restricted-pairs", cmd_restricted_pairs, "digit-restricted pairs and covariance ratios")
    _model_args(p, alpha=2.0 ** -0.55, H=0.6)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--n-pairs", type=int, default=1000)

    p = add("report", cmd_report, "run named checks and write a manifest")
    p.add_argument("--config", default=None, help="TOML config")
    p.add_argument("--checks", default=None, help=f"comma list from: {','.join(CHECKS)}")
    p.add_argument("--n-paths", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.t0 = time.perf_counter()
    try:
        return args.func(args)
    except (WWBError, KeyError, ValueError) as exc:
        print(f"wwb {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
