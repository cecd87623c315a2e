# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.verify` module
"""
import pytest

from mobius_flock import FlockError
from mobius_flock import verify


def test_verify_get_check_names():
    assert verify.get_check_names() == [
        "geometry",
        "initial_states",
        "initial_errors",
        "sync_run",
        "balance_run",
        "cross_plane",
        "properties",
        "envelopes",
    ]


@pytest.mark.parametrize("name", ["geometry", "initial_states", "initial_errors", "properties"])
def test_verify_run_check_quick(name):
    result = verify.run_check(name)
    assert result.passed, result.detail
    assert result.name == name
    assert result.elapsed >= 0


@pytest.mark.parametrize("name", ["sync_run", "balance_run", "cross_plane", "envelopes"])
def test_verify_run_check_reference_runs(name):
    result = verify.run_check(name)
    assert result.passed, result.detail


def test_verify_run_check_errors_are_failures():
    result = verify.run_check("initial_errors", patch=["control.kappa1=-1"])
    assert not result.passed
    assert result.detail.startswith("WrongGainSignError")
    result = verify.run_check("initial_states", dt=0.1)
    assert not result.passed
    assert result.detail.startswith("SimError")


def test_verify_load_reference_config():
    config = verify.load_reference_config("paper_balancing", dt=0.002, t_final=10.0)
    assert config.dt == 0.002
    assert config.t_final == 10.0
    config = verify.load_reference_config("paper_sync", verify.FAST_PATCH)
    assert config.gains.s_d == 0.3
    assert config.initial_states.v[0] == 2.0


def test_verify_run_verify():
    results = verify.run_verify(checks=["geometry", "initial_errors"])
    assert [res.name for res in results] == ["geometry", "initial_errors"]
    assert all(res.passed for res in results)
    with pytest.raises(FlockError, match="Unknown checks"):
        verify.run_verify(checks=["geometry", "xxx"])


def test_verify_format_results():
    results = [
        verify.CheckResult("geometry", True, "all good", 0.123),
        verify.CheckResult("sync_run", False, "not converged", 12.0),
    ]
    table = verify.format_results(results)
    lines = table.splitlines()
    assert len(lines) == 3
    assert "status" in lines[0]
    assert "PASS" in lines[1] and "0.12" in lines[1]
    assert "FAIL" in lines[2] and "not converged" in lines[2]
