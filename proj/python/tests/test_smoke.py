import json

import numpy as np
import pytest

import sven


def test_dense_svd_reconstructs():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 11))
    u, s, vt = sven.dense_svd(a)
    np.testing.assert_allclose(u @ np.diag(s) @ vt, a, atol=1e-12)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), rtol=1e-12)


def test_randomized_svd_exact_low_rank():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 200))
    _, s, _ = sven.randomized_svd(a, k=3, seed=4)
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False)[:3], rtol=1e-10)


def test_pinv_matches_numpy():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 9))
    np.testing.assert_allclose(sven.pinv(a), np.linalg.pinv(a), atol=1e-12)


def test_sven_step_is_min_norm_solution():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((4, 10))
    r = rng.standard_normal(4)
    theta, s = sven.sven_step(r, m, np.zeros(10), eta=1.0, k=4, rtol=0.0)
    np.testing.assert_allclose(theta, -np.linalg.pinv(m) @ r, atol=1e-12)
    assert len(s) == 4


def test_natgrad_agrees_with_lstsq():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((12, 3))
    r = rng.standard_normal(12)
    theta = sven.natgrad_step(r, m, np.zeros(3), eta=1.0)
    np.testing.assert_allclose(theta, -np.linalg.lstsq(m, r, rcond=None)[0], atol=1e-12)


def test_mlp_param_count_and_predict():
    model = sven.Mlp([1, 16, 16, 16, 1], seed=0)
    assert model.num_params == sven.param_count([1, 16, 16, 16, 1]) == 593
    out = model.predict(np.linspace(-1, 1, 5)[:, None])
    assert out.shape == (5, 1)
    with pytest.raises(sven.ShapeError):
        model.theta = np.zeros(3)


def test_generators_are_deterministic():
    a = sven.gen_sine1d(50, seed=7)
    b = sven.gen_sine1d(50, seed=7)
    np.testing.assert_array_equal(a["train"]["inputs"], b["train"]["inputs"])
    assert sven.gen_poly6(30, seed=1)["val"]["inputs"].shape == (30, 6)


def test_train_writes_metrics(tmp_path):
    rec = sven.train(
        {"n-samples": 256, "epochs": 2, "widths": [8, 8], "seed-model": 1}, str(tmp_path)
    )
    assert len(rec["epochs"]) == 2
    assert rec["final_val_loss"] < rec["initial_val_loss"]
    header = (tmp_path / "metrics.csv").read_text().splitlines()[0]
    assert header == "epoch,train_loss,val_loss,cum_wall_s"
    assert json.loads((tmp_path / "run.json").read_text())["num_params"] == rec["num_params"]


def test_bad_option_raises_config_error():
    with pytest.raises(sven.ConfigError):
        sven.train({"momentum": 0.9})


def test_selftest_passes():
    ok, text = sven.selftest()
    assert ok, text
