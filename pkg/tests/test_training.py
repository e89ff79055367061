"""Trainer: prediction pipeline, gradients, optimization, evaluation."""
import numpy as np
import pytest

from pwsr.circuits import AnsatzConfig
from pwsr.dataset import CASE_I, load_wfset, build_training_set
from pwsr import training
from pwsr.training import TrainConfig, cost, gradient, predict, train
from pwsr.sim import encode_amplitudes, fidelity

import pathlib

_ART = pathlib.Path(__file__).parent / "_artifacts"


@pytest.fixture(scope="module")
def samples():
    path = _ART / "case_i_training.wfset"
    if path.exists():
        return load_wfset(path)[0]
    return build_training_set(CASE_I)


def test_predict_no_ansatz_is_padding(samples):
    s = samples[0]
    out = predict(s, np.zeros(0), AnsatzConfig.none(CASE_I.n_hr), CASE_I)
    pad = encode_amplitudes(s.c_lr, CASE_I.n_hr)
    assert fidelity(out, pad) == pytest.approx(1.0, abs=1e-12)


def test_predict_ansatz2_zero_theta_matches_no_ansatz(samples):
    s = samples[3]
    cfg = AnsatzConfig.ansatz2(CASE_I.n_hr)
    a = predict(s, np.zeros(cfg.n_params), cfg, CASE_I)
    b = predict(s, np.zeros(0), AnsatzConfig.none(CASE_I.n_hr), CASE_I)
    assert np.max(np.abs(a.amps - b.amps)) < 1e-12


def test_cost_range_and_gauge_invariance(samples):
    cfg = AnsatzConfig.ansatz1(CASE_I.n_hr, n_layers=2)
    rng = np.random.default_rng(0)
    theta = rng.uniform(-0.2, 0.2, cfg.n_params)
    c = cost(samples, theta, cfg, CASE_I)
    assert -1.0 <= c <= 0.0
    # global phase on every target leaves the cost exactly unchanged
    import dataclasses
    flipped = [dataclasses.replace(s, c_hr=np.asarray(s.c_hr) * np.exp(0.4j))
               for s in samples]
    assert cost(flipped, theta, cfg, CASE_I) == pytest.approx(c, abs=1e-15)


def test_gradient_adjoint_vs_central_difference(samples):
    subset = samples[:9]
    rng = np.random.default_rng(1)
    for cfg in (AnsatzConfig.ansatz1(CASE_I.n_hr, n_layers=3),
                AnsatzConfig.ansatz2(CASE_I.n_hr, n_layers=2, n_sublayers=2)):
        theta = rng.uniform(-0.5, 0.5, cfg.n_params)
        adj = gradient(subset, theta, cfg, CASE_I)
        fd = gradient(subset, theta, cfg, CASE_I, method="central_difference")
        scale = max(np.max(np.abs(fd)), 1e-12)
        assert np.max(np.abs(adj - fd)) / scale < 1e-5


def test_training_reduces_cost(samples):
    cfg = AnsatzConfig.ansatz2(CASE_I.n_hr, n_layers=1, n_sublayers=1)
    tc = TrainConfig(ansatz=cfg, init="zeros", max_epochs=60)
    before = -cost(samples, np.zeros(cfg.n_params), cfg, CASE_I)
    report = train(samples, tc, CASE_I)
    assert report.average_fidelity > before
    assert report.loss_history[-1] <= report.loss_history[0]
    assert np.all((report.per_sample_fidelities >= 0)
                  & (report.per_sample_fidelities <= 1))
    assert report.average_fidelity == pytest.approx(
        float(np.mean(report.per_sample_fidelities)), abs=1e-12)


def test_training_deterministic(samples):
    cfg = AnsatzConfig.ansatz1(CASE_I.n_hr, n_layers=2)
    tc = TrainConfig(ansatz=cfg, init="uniform", seed=5, max_epochs=25)
    a = train(samples, tc, CASE_I)
    b = train(samples, tc, CASE_I)
    assert np.array_equal(a.final_theta, b.final_theta)
    assert a.loss_history == b.loss_history


def test_multi_seed_selects_best(samples):
    cfg = AnsatzConfig.ansatz1(CASE_I.n_hr, n_layers=2)
    singles = [train(samples, TrainConfig(ansatz=cfg, init="uniform", seed=s,
                                          max_epochs=20), CASE_I)
               for s in (0, 1, 2)]
    multi = train(samples, TrainConfig(ansatz=cfg, init="uniform", seed=0,
                                       n_seeds=3, max_epochs=20), CASE_I)
    assert multi.average_fidelity == pytest.approx(
        max(s.average_fidelity for s in singles), abs=1e-12)


def test_model_save_load_roundtrip(samples, tmp_path):
    cfg = AnsatzConfig.ansatz2(CASE_I.n_hr, n_layers=1, n_sublayers=1)
    tc = TrainConfig(ansatz=cfg, init="zeros", max_epochs=5)
    report = train(samples, tc, CASE_I)
    path = tmp_path / "model.json"
    training.save_model(report, tc, CASE_I, path)
    ans, theta, doc = training.load_model(path)
    assert ans == cfg
    assert theta == pytest.approx(report.final_theta, abs=1e-15)
    assert doc["case"] == CASE_I.label


def test_evaluate_includes_baselines(samples):
    rows, groups = training.evaluate(samples[:6], CASE_I)
    assert {"f_noansatz", "f_interp"} <= set(rows[0])
    assert all(0 <= r["f_noansatz"] <= 1 for r in rows)
    for vals in groups.values():
        assert set(vals) == {"f_noansatz", "f_interp"}


def test_invalid_config_rejected():
    cfg = AnsatzConfig.ansatz1(4, n_layers=1)
    with pytest.raises(ValueError):
        TrainConfig(ansatz=cfg, learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(ansatz=cfg, max_epochs=0)
    with pytest.raises(training.TrainingError):
        training.gradient([], np.zeros(cfg.n_params), cfg, CASE_I)
