import hashlib
import json

import numpy as np
import pytest

from wwbridge.checks import CHECKS, CheckContext, run_check
from wwbridge.errors import ParameterError
from wwbridge.report import ExperimentConfig, dumps_csv, dumps_json, jsonable, run_report


def test_json_round_trip_shortest_repr():
    x = 0.1 + 0.2
    data = json.loads(dumps_json({"x": x, "arr": np.array([1.5, np.inf]), "n": np.int64(3)}))
    assert data["x"] == x and data["arr"] == [1.5, None] and data["n"] == 3
    assert b"0.30000000000000004" in dumps_json({"x": x})


def test_csv_seventeen_digits():
    text = dumps_csv(("a", "b"), [(1 / 3, 2), (True, "s")]).decode()
    assert text.splitlines() == ["a,b", "0.33333333333333331,2", "1,s"]
    assert float(text.splitlines()[1].split(",")[0]) == 1 / 3


def test_jsonable_nested():
    assert jsonable({"a": (np.float64(2.0), [np.bool_(True)])}) == {"a": [2.0, [True]]}


def test_config_from_toml(tmp_path):
    cfg_file = tmp_path / "c.toml"
    cfg_file.write_text(
        'seed = 3\nlevel = 10\nchecks = ["hl", "tn"]\noutdir = "o"\n'
        '[model]\nalpha = 0.7\nb = 2\nH = 0.8\nkappa = "linear"\n'
        '[tolerances]\n"tn.max_drift" = 3.0\n')
    cfg = ExperimentConfig.from_toml(cfg_file)
    assert cfg.params.K == pytest.approx(0.5145731728297583)
    assert cfg.checks == ("hl", "tn") and cfg.tolerances == {"tn.max_drift": 3.0}
    assert ExperimentConfig.from_dict(cfg.as_dict()).as_dict() == cfg.as_dict()


def test_config_rejects_unknown(tmp_path):
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"colour": "blue"})
    with pytest.raises(ParameterError):
        ExperimentConfig(checks=("nope",))
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"tolerances": {"tn": {"max_drift": 2}}})


def test_tolerance_override_changes_verdict():
    strict = run_check("tn", CheckContext(tolerances={"tn.max_drift": 0.5}))
    assert not strict.passed and strict.tolerances["max_drift"] == 0.5


def test_report_layout_and_hashes(tmp_path):
    cfg = ExperimentConfig(checks=("hl", "isometry"), outdir=str(tmp_path))
    outcome = run_report(cfg)
    manifest = json.loads(outcome.manifest.read_text())
    assert set(manifest) >= {"config", "code_version", "wall_time_s", "checks", "files"}
    for rel, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / rel).read_bytes()).hexdigest() == digest
    assert "hl/summary.json" in manifest["files"] and "isometry/pairs.csv" in manifest["files"]
    assert manifest["checks"]["hl"]["passed"] is True


def test_report_byte_identical(tmp_path):
    cfg = dict(checks=("hl", "tn", "positivity", "quasi-helix"), seed=5)
    a = run_report(ExperimentConfig(**cfg), tmp_path / "a").files
    b = run_report(ExperimentConfig(**cfg, parallelism=4), tmp_path / "b").files
    assert a == b


def test_all_checks_registered():
    assert {"phi", "modulus-local", "modulus-uniform", "dimension", "argmax", "hl", "hls",
            "cov-mc", "cov-mc2", "tn"} <= set(CHECKS)


def test_small_monte_carlo_checks_run():
    ctx = CheckContext(n_paths=200)
    for name in ("cov-mc2", "modulus-uniform", "modulus-local"):
        res = run_check(name, ctx)
        assert res.name == name and res.tables
