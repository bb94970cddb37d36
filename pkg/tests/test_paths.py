import numpy as np
import pytest

from wwbridge.errors import ParameterError, ResourceError
from wwbridge.gaussian import bridge_cov, ww_cov, ww_cov_matrix
from wwbridge.model import GridSpec, ModelParams
from wwbridge.paths import (CHUNK, PathSample, bridge_path, bridge_values, embedding_clip_mass, fbm_path,
                            make_ensemble, read_wwb1, resolve_method, substream, synth_fgn, ww_path,
                            write_wwb1)


def _within(emp, exact, se, k=3.0):
    return abs(emp - exact) <= k * se


def test_fgn_white_at_half():
    x = synth_fgn(2**16, 0.5, seed=1)
    r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert abs(r1) <= 3 / np.sqrt(x.size)


@pytest.mark.parametrize("method", ["circulant", "cholesky"])
def test_fgn_increment_variance(method):
    n = 64
    rows = np.stack([synth_fgn(n, 0.3, seed=substream(5, i), method=method) for i in range(10_000)])
    sq = rows[:, 10] ** 2
    assert _within(sq.mean(), (1 / n) ** 0.6, sq.std() / np.sqrt(sq.size))


def test_fgn_lag_one_covariance():
    n = 256
    rows = np.stack([synth_fgn(n, 0.75, seed=substream(6, i)) for i in range(10_000)])
    prod = rows[:, 100] * rows[:, 101]
    want = 0.5 * (2**1.5 - 2) * (1 / n) ** 1.5
    assert _within(prod.mean(), want, prod.std() / np.sqrt(prod.size))


def test_fgn_seed_determinism():
    assert np.array_equal(synth_fgn(1000, 0.4, seed=3), synth_fgn(1000, 0.4, seed=3))
    assert not np.array_equal(synth_fgn(1000, 0.4, seed=3), synth_fgn(1000, 0.4, seed=4))


def test_clip_mass_and_method():
    assert embedding_clip_mass(1024, 0.3) <= 1e-10
    assert resolve_method(1024, 0.75, "circulant") == "circulant"
    with pytest.raises(ParameterError):
        resolve_method(16, 0.5, "magic")
    with pytest.raises(ParameterError):
        synth_fgn(1, 0.5)


def test_bridge_values():
    w = np.array([0.0, 0.3, -0.2, 0.0])
    kap = np.array([0.0, 0.3, 0.7, 1.0])
    assert np.array_equal(bridge_values(w, kap), w)
    p = ModelParams(0.5, 2, 0.3, "linear")
    fbm = fbm_path(synth_fgn(16, 0.3, seed=2), 2, 0.3)
    b = bridge_path(fbm, p)
    assert b.values[-1] == 0.0 and b.values[0] == 0.0


def test_bridge_covariance_mc():
    p = ModelParams(0.5, 2, 0.5)
    ens = make_ensemble(p, 4, 20_000, base_seed=8, process="bridge")
    grid = ens.grid
    # 0.3 and 0.7 are not level-4 points; use the exact formula at the nearest ones
    i, j = grid.index_of(0.3125), grid.index_of(0.6875)
    prod = ens.values[:, i] * ens.values[:, j]
    assert _within(prod.mean(), bridge_cov(0.3125, 0.6875, p), prod.std() / np.sqrt(prod.size))


def test_bridge_variance_mc_h075():
    p = ModelParams(0.5, 2, 0.75)
    ens = make_ensemble(p, 3, 20_000, base_seed=9, process="bridge")
    sq = ens.values[:, 4] ** 2
    assert _within(sq.mean(), bridge_cov(0.5, 0.5, p), sq.std() / np.sqrt(sq.size))


def test_ww_path_pinned_and_single_term():
    p = ModelParams(0.5, 2, 0.3)
    y = ww_path(p, 8, seed=1)
    assert y.values[0] == 0.0 and y.values[-1] == 0.0
    # level 1: Y equals the bridge on {0, 1/2, 1}
    y1 = make_ensemble(p, 1, 1, 4).values[0]
    b1 = make_ensemble(p, 1, 1, 4, process="bridge").values[0]
    assert np.array_equal(y1, b1)


def test_ww_variance_mc():
    p = ModelParams(0.5, 2, 0.5)
    ens = make_ensemble(p, 4, 20_000, base_seed=10)
    sq = ens.values[:, GridSpec(4, 2).index_of(0.25)] ** 2
    assert ww_cov(0.25, 0.25, p, 4) == pytest.approx(0.375)
    assert _within(sq.mean(), 0.375, sq.std() / np.sqrt(sq.size))


def test_ensemble_contracts():
    p = ModelParams(0.7, 2, 0.8)
    one = make_ensemble(p, 9, 1, base_seed=11)
    assert np.array_equal(one.values[0], ww_path(p, 9, substream(11, 0)).values)
    a = make_ensemble(p, 6, CHUNK + 17, base_seed=12, parallelism=1)
    b = make_ensemble(p, 6, CHUNK + 17, base_seed=12, parallelism=8)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ParameterError):
        make_ensemble(p, 6, 0)


def test_ensemble_mean_centered():
    p = ModelParams(0.5, 2, 0.3)
    ens = make_ensemble(p, 6, 10_000, base_seed=13)
    max_var = np.max(np.diag(ww_cov_matrix(GridSpec(6, 2), p).entries))
    assert np.max(np.abs(ens.values.mean(axis=0))) <= 4 * np.sqrt(max_var / 1e4)


def test_path_size_guard():
    with pytest.raises(ResourceError):
        make_ensemble(ModelParams(0.5, 2, 0.3), 23, 1)


def test_wwb1_roundtrip(tmp_path):
    p = ModelParams(0.5, 3, 0.4)
    ens = make_ensemble(p, 4, 5, base_seed=2**63 + 5)
    target = tmp_path / "x.wwb"
    ens.to_binary(target)
    raw = target.read_bytes()
    assert raw[:4] == b"WWB1" and len(raw) == 4 + 4 * 8 + 2 * 8 + 5 * 82 * 8
    back = read_wwb1(target)
    assert back["level"] == 4 and back["b"] == 3 and back["seed"] == 2**63 + 5
    assert np.array_equal(back["values"], ens.values)
    bad = tmp_path / "bad.wwb"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ParameterError):
        read_wwb1(bad)


def test_csv_emission(tmp_path):
    path = PathSample.from_function(lambda t: t**2, 3)
    path.to_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "t,value" and lines[2] == "0.125,0.015625"
