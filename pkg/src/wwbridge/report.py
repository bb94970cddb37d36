"""Experiment configuration, bit-stable serialisation and run manifests.

Data files carry no timestamps: the same config and code version give
byte-identical CSV/JSON.  Wall times and the creation time live only in
``manifest.json``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import BACKEND, thread_cap
from .checks import CHECKS, CheckContext, CheckResult, Table, run_check
from .errors import ParameterError
from .model import Kappa, ModelParams

# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def jsonable(obj):
    """Plain-Python copy of ``obj``; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(obj) -> bytes:
    # float repr is the shortest round-trip decimal
    return (json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n").encode()


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def dumps_csv(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue().encode()


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def result_files(result: CheckResult) -> dict[str, bytes]:
    """``{relative path: bytes}`` for one check, ready to be written."""
    out = {f"{result.name}/summary.json": dumps_json(result.summary())}
    for name, table in sorted(result.tables.items()):
        out[f"{result.name}/{name}.csv"] = dumps_csv(table.header, table.rows)
    return out


def write_files(outdir, files: dict[str, bytes]) -> dict[str, str]:
    outdir = Path(outdir)
    hashes = {}
    for rel, data in sorted(files.items()):
        target = outdir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        hashes[rel] = sha256(data)
    return hashes


def code_version() -> dict:
    """Package version plus a digest of the package sources and the kernel backend."""
    h = hashlib.sha256()
    for src in sorted(Path(__file__).parent.glob("*.py")):
        h.update(src.name.encode())
        h.update(src.read_bytes())
    return {"package": __version__, "source_sha256": h.hexdigest(), "backend": BACKEND}


def write_manifest(outdir, config: dict, files: dict[str, str], checks: dict, wall_time: float,
                   check_times: dict | None = None) -> Path:
    manifest = {
        "config": config,
        "code_version": code_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": wall_time,
        "check_wall_time_s": check_times or {},
        "checks": checks,
        "files": files,
    }
    path = Path(outdir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_json(manifest))
    return path


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything that determines a ``report`` run.

    ``model`` and ``level`` drive the model-dependent checks (moduli and the
    synthesis comparison); the other checks run on fixed parameter sets.
    ``n_paths`` overrides the Monte Carlo path counts when set.
    """

    alpha: float = 0.5
    b: int = 2
    H: float = 0.3
    kappa: str = "standard"
    level: int = 12
    seed: int = 0
    n_paths: int | None = None
    checks: tuple = tuple(CHECKS)
    outdir: str = "wwb-out"
    tolerances: dict = field(default_factory=dict)
    parallelism: int = 1

    def __post_init__(self):
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ParameterError(f"unknown checks {unknown}; known: {', '.join(CHECKS)}")
        self.checks = tuple(self.checks)
        Kappa(self.kappa)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.b, self.H, self.kappa)

    def context(self) -> CheckContext:
        return CheckContext(self.seed, self.n_paths, self.params, self.level, dict(self.tolerances),
                            self.parallelism)

    def as_dict(self) -> dict:
        return {
            "model": {"alpha": self.alpha, "b": self.b, "H": self.H, "kappa": self.kappa},
            "level": self.level, "seed": self.seed, "n_paths": self.n_paths,
            "checks": list(self.checks), "outdir": self.outdir,
            "tolerances": dict(self.tolerances), "parallelism": self.parallelism,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        model = raw.pop("model", {})
        tolerances = raw.pop("tolerances", {})
        for key, val in tolerances.items():
            if isinstance(val, dict):
                raise ParameterError(f"tolerance table {key!r} nests too deep; use 'check.key = value'")
        known = {"level", "seed", "n_paths", "checks", "outdir", "parallelism"}
        extra = set(raw) - known
        extra |= set(model) - {"alpha", "b", "H", "kappa"}
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(**model, **raw, tolerances=dict(tolerances))

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        import tomli

        with open(path, "rb") as fh:
            return cls.from_dict(tomli.load(fh))


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class ReportOutcome:
    results: dict
    files: dict
    manifest: Path | None
    wall_time: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())


def run_checks(cfg: ExperimentConfig) -> tuple[dict, dict]:
    """Run the configured checks; returns ``(results, seconds)`` keyed by check name.

    Independent checks may run concurrently (capped by ``WWB_THREADS``); each
    check owns its seeds, so the results do not depend on scheduling.
    """
    ctx = cfg.context()

    def one(name):
        t0 = time.perf_counter()
        res = run_check(name, ctx)
        return name, res, time.perf_counter() - t0

    workers = min(max(1, cfg.parallelism), thread_cap(), len(cfg.checks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            done = list(pool.map(one, cfg.checks))
    else:
        done = [one(n) for n in cfg.checks]
    return {n: r for n, r, _ in done}, {n: s for n, _, s in done}


def run_report(cfg: ExperimentConfig, outdir=None) -> ReportOutcome:
    t0 = time.perf_counter()
    results, seconds = run_checks(cfg)
    files = {}
    for name in cfg.checks:
        files.update(result_files(results[name]))
    outdir = cfg.outdir if outdir is None else outdir
    hashes = write_files(outdir, files)
    wall = time.perf_counter() - t0
    summary = {n: r.summary() for n, r in results.items()}
    manifest = write_manifest(outdir, cfg.as_dict(), hashes, summary, wall, seconds)
    return ReportOutcome(results, hashes, manifest, wall)


def table_files(prefix: str, tables: dict[str, Table], summary: dict) -> dict[str, bytes]:
    """Files for a one-off subcommand: ``<prefix>/<name>.csv`` plus ``<prefix>/summary.json``."""
    out = {f"{prefix}/summary.json": dumps_json(summary)}
    for name, t in tables.items():
        out[f"{prefix}/{name}.csv"] = dumps_csv(t.header, t.rows)
    return out
