"""Data-driven compositional safety certificates for networks of polynomial systems."""

import json

import numpy as np

from . import _core

__all__ = [
    "benchmark_names",
    "interaction_gain",
    "load_config",
    "monitored_subsystems",
    "parse_toml",
    "simulate",
    "synthesize",
    "verify",
]

benchmark_names = _core.benchmark_names
monitored_subsystems = _core.monitored_subsystems


def interaction_gain(coupling, pi):
    """Squared spectral norm of the coupling matrix divided by pi."""
    return _core.interaction_gain(np.atleast_2d(np.asarray(coupling, dtype=float)), float(pi))


def parse_toml(text):
    return json.loads(_core.parse_toml(text))


def load_config(path):
    """Run configuration from a .toml or .json file, with defaults filled in."""
    return json.loads(_core.load_config(str(path)))


def _config(config=None, **overrides):
    cfg = json.loads(_core.normalize_config(json.dumps(config or {})))
    for section_key, value in overrides.items():
        section, _, key = section_key.partition("__")
        cfg.setdefault(section, {})[key] = value
    return json.dumps(cfg)


def synthesize(config=None, **overrides):
    """Collect data, synthesize one certificate per template and compose.

    Overrides use section__key names, e.g. benchmark__Q=50 or data__seed=3.
    Returns a dict with "pass", "report" and "certificates".
    """
    return json.loads(_core.synthesize(_config(config, **overrides)))


def verify(certificates, config=None, **overrides):
    """Sampled certificate conditions, witness rechecks and the compose re-check."""
    return json.loads(_core.verify(_config(config, **overrides), json.dumps(certificates)))


def simulate(certificates=None, config=None, **overrides):
    """Simulate the network; returns (report, times, states, recorded subsystem indices).

    Without certificates the run is open loop.
    """
    if not certificates:
        overrides.setdefault("sim__open_loop", True)
    report, times, states, record = _core.simulate(
        _config(config, **overrides), json.dumps(certificates) if certificates else ""
    )
    return json.loads(report), np.asarray(times), np.asarray(states), list(record)
