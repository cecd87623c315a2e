# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock` module
"""
import os
import sys
import importlib

import pytest

import mobius_flock


def test_init_get_option():
    assert mobius_flock.get_option("sim", "dt") == 0.001
    assert mobius_flock.get_option("sim.log_stride") == 10
    with pytest.raises(mobius_flock.FlockConfigError):
        mobius_flock.get_option("sim.xxx")
    with pytest.raises(mobius_flock.FlockConfigError):
        mobius_flock.get_option("sim")


def test_init_set_options_context():
    with mobius_flock.set_options("sim", dt=0.005, **{"monitor.sustain": 2.0}):
        assert mobius_flock.get_option("sim.dt") == 0.005
        assert mobius_flock.get_option("monitor.sustain") == 2.0
        assert mobius_flock.get_option("sim.t_final") == 500.0
    assert mobius_flock.get_option("sim.dt") == 0.001
    assert mobius_flock.get_option("monitor.sustain") == 10.0


def test_init_set_options_invalid():
    with pytest.raises(mobius_flock.FlockConfigError):
        with mobius_flock.set_options("sim", dt=0.5):
            pass
    mobius_flock.reset_options()
    assert mobius_flock.get_option("sim.dt") == 0.001


def test_init_get_output_dir(monkeypatch):
    monkeypatch.delenv(mobius_flock.OUTPUT_DIR_ENV_VAR, raising=False)
    assert mobius_flock.get_output_dir() == "mobius_flock_output"
    monkeypatch.setenv(mobius_flock.OUTPUT_DIR_ENV_VAR, "from_env")
    assert mobius_flock.get_output_dir() == "from_env"
    assert mobius_flock.get_output_dir("from_arg") == "from_arg"


def test_init_get_data_sample():
    samples = mobius_flock.get_data_sample()
    assert "paper_sync.cfg" in samples
    assert "paper_balancing.cfg" in samples
    path = mobius_flock.get_data_sample("paper_sync")
    assert os.path.exists(path)
    assert path == mobius_flock.get_data_sample("paper_sync.cfg")
    with pytest.raises(mobius_flock.FlockError):
        mobius_flock.get_data_sample("xxx")


def test_init_flock_warn():
    with pytest.warns(mobius_flock.FlockWarning, match="careful"):
        mobius_flock.flock_warn("Be careful")


def test_init_show_info(capsys):
    mobius_flock.show_info()
    out = capsys.readouterr().out
    assert "mobius_flock" in out
    assert "[sim]" in out


def test_init_set_option():
    try:
        mobius_flock.set_option("monitor.sustain", 5.0)
        assert mobius_flock.get_option("monitor.sustain") == 5.0
    finally:
        mobius_flock.reset_options()
    assert mobius_flock.get_option("monitor.sustain") == 10.0


@pytest.mark.parametrize("name", ["misc", "geometry", "graph", "control", "config", "sim"])
def test_init_shared_error_classes(name):
    module = importlib.import_module("mobius_flock." + name)
    assert "mobius_flock.__init__" not in sys.modules
    if hasattr(module, "FlockError"):
        assert module.FlockError is mobius_flock.FlockError


def test_init_submodule_errors_are_catchable():
    from mobius_flock import config

    with pytest.raises(mobius_flock.FlockConfigError):
        config.parse_overrides(["no_equal_sign"])
    with pytest.warns(mobius_flock.FlockWarning):
        config.load_sim_config("paper_sync", ["geometry.root=larger"])
