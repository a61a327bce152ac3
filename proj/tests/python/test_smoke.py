import numpy as np
import pytest

import certnet


def test_benchmarks_listed():
    names = certnet.benchmark_names()
    assert "lorenz_ring" in names and "duffing_ring" in names


def test_interaction_gain_matches_svd():
    rng = np.random.default_rng(0)
    d = rng.normal(size=(3, 6))
    assert certnet.interaction_gain(d, 0.7) == pytest.approx(np.linalg.norm(d, 2) ** 2 / 0.7, rel=1e-12)
    assert certnet.interaction_gain(0.01 * np.eye(3), 0.8) == pytest.approx(1.25e-4, rel=1e-12)


def test_toml_and_config_defaults():
    cfg = certnet.parse_toml('[benchmark]\nname = "lu_star"\nQ = 5\n[sim]\nmonitored = 2\n')
    assert cfg == {"benchmark": {"name": "lu_star", "Q": 5}, "sim": {"monitored": 2}}
    assert certnet.monitored_subsystems(10, 4) == [0, 2, 5, 7]
    with pytest.raises(ValueError, match="unknown benchmark"):
        certnet.synthesize({"benchmark": "nope"})


def test_synthesize_verify_simulate_duffing():
    cfg = {"benchmark": {"name": "duffing_ring", "Q": 12}, "data": {"seed": 42}}
    out = certnet.synthesize(cfg)
    assert out["pass"]
    report = out["report"]
    assert 0 < report["eps"] < 0.99
    assert len(out["certificates"]) == 1
    cert = report["templates"][0]["certificate"]
    assert cert["beta"] > cert["gamma"]

    checked = certnet.verify(out["certificates"], cfg, verify__samples=2000)
    assert checked["pass"]

    rep, times, states, record = certnet.simulate(out["certificates"], cfg, sim__runs=2, sim__monitored=3)
    assert rep["pass"] and rep["simulation"]["unsafe_runs"] == 0
    assert record == [0, 4, 8]
    assert states.shape == (len(times), 6)
    assert times[0] == 0 and times[-1] == pytest.approx(5.0)

    open_rep, *_ = certnet.simulate(None, cfg, sim__runs=1)
    assert not open_rep["pass"]


def test_too_few_samples_rejected():
    with pytest.raises(ValueError, match="T >= N \\+ 1"):
        certnet.synthesize({"benchmark": {"name": "lorenz_ring", "Q": 3}, "data": {"T": 9}})
