import math

import numpy as np
import pytest

import ahfl


def test_closed_forms():
    top = ahfl.TopologyConfig.from_fractions(100, 5)
    assert (top.l, top.m, top.k) == (20, 10, 5)
    assert ahfl.expected_staleness(top) == 19
    assert ahfl.ideal_expected_staleness(ahfl.TopologyConfig.from_fractions(400, 80)) == 319
    assert ahfl.harmonic(4) == pytest.approx(25 / 12)
    tc = ahfl.TimingConfig()
    y = ahfl.expected_cycle_time(tc, top)
    assert ahfl.expected_cloud_rate(tc, top) == pytest.approx(5 / y)
    assert ahfl.min_bound_for_confidence(top, 0.1) == 190


def test_validation_maps_to_value_error():
    with pytest.raises(ValueError):
        ahfl.TopologyConfig.from_fractions(100, 3)
    with pytest.raises(ahfl.ValidationError):
        ahfl.TimingConfig(lam=-1.0)
    with pytest.raises(ahfl.ParseError):
        ahfl.parse_config("timing.lambda = x\n")


def test_timing_sim():
    top = ahfl.TopologyConfig.from_fractions(100, 5)
    tc = ahfl.TimingConfig()
    res = ahfl.run_timing_sim(top, tc, 20000, 1)
    assert res.cloud_version == 20000
    assert abs(res.mean_staleness() / 19 - 1) < 0.05
    cols = res.staleness()
    assert len(cols["staleness"]) == 5 * 20000
    assert min(cols["staleness"]) >= 0
    again = ahfl.run_timing_sim(top, tc, 20000, 1)
    assert again.staleness() == cols


def test_dataset_and_calculus():
    ds = ahfl.generate_dataset(8, 400, 4, 3)
    assert ds.X.shape == (400, 8)
    assert len(ds.shards) == 4
    assert ahfl.loss(ds.w_star, ds) < 1e-20
    theta = np.linspace(-1, 1, 8)
    g = ahfl.gradient(theta, ds)
    h = 1e-6
    e0 = np.zeros(8)
    e0[0] = h
    fd = (ahfl.loss(theta + e0, ds) - ahfl.loss(theta - e0, ds)) / (2 * h)
    assert fd == pytest.approx(g[0], rel=1e-5)
    L = ahfl.smoothness_constant(ds)
    top_eig = 2 / 400 * np.linalg.eigvalsh(ds.X.T @ ds.X).max()
    assert L == pytest.approx(top_eig, rel=1e-6)


def test_training_run():
    cfg = ahfl.RunConfig()
    cfg.topology = ahfl.TopologyConfig.from_fractions(20, 2)
    cfg.d = 10
    cfg.dataset_size = 500
    cfg.T = 300
    cfg.seed = 4
    res = ahfl.run(cfg)
    assert len(res.loss) == 301
    assert res.loss[-1] < 0.1 * res.loss[0]
    assert ahfl.min_gradient_norm(res) == res.min_grad_norm_sq
    assert res.final_model.shape == (10,)
    assert ahfl.updates_to_reach(res, 0.5) is not None
    text = ahfl.write_config(cfg)
    back = ahfl.parse_config(text)
    assert back.topology == cfg.topology and back.T == 300


def test_divergence_raises():
    cfg = ahfl.RunConfig()
    cfg.topology = ahfl.TopologyConfig.from_fractions(20, 2)
    cfg.d = 10
    cfg.dataset_size = 500
    cfg.T = 50
    cfg.learning.eta = 100.0
    cfg.learning.t_tilde = 100
    with pytest.raises(ahfl.DivergenceError):
        ahfl.run(cfg)
    assert math.isfinite(ahfl.staleness_weight(0, 0.1))
