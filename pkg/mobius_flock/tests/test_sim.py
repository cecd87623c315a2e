# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.sim` module
"""
import math
import functools

import pytest
import numpy as np
import xarray as xr
from hypothesis import given, settings, strategies as st

import mobius_flock
from mobius_flock import FlockWarning
from mobius_flock import geometry
from mobius_flock import graph
from mobius_flock import dynamics
from mobius_flock import control
from mobius_flock import config as mconfig
from mobius_flock import sim

MU = 2.5 ** 0.5


@functools.lru_cache()
def get_ctx(root="smaller"):
    return geometry.get_mobius_context((0.5, MU), root)


def get_gains(K=-0.04):
    return control.ControllerGains(kappa1=0.004, kappa2=10.0, K=K, s_d=0.06, delta_s=0.06)


def get_orbit_config(**kwargs):
    ctx = get_ctx()
    state = dynamics.to_original(ctx, dynamics.TransformedState(0.5, 0.06, math.pi / 2))
    kwargs.setdefault("dt", 0.01)
    kwargs.setdefault("t_final", 10.0)
    return sim.SimConfig(ctx, get_gains(), None, state, **kwargs)


@functools.lru_cache()
def get_reference_config(sample="paper_sync"):
    return mconfig.load_sim_config(sample)


def test_sim_step_open_loop():
    config = sim.SimConfig(
        get_ctx(),
        get_gains(),
        None,
        dynamics.OriginalState(1.25, 0.4, math.pi / 2),
        dt=0.01,
        open_loop=True,
    )
    state = sim.step(config, config.initial_states)
    assert isinstance(state, dynamics.OriginalState)
    np.testing.assert_allclose(state.r, 1.25 + 0.004j, atol=1e-15)
    np.testing.assert_allclose(state.v, 0.4)
    np.testing.assert_allclose(state.theta, math.pi / 2)


def test_sim_step_transformed_orbit():
    config = get_orbit_config()
    state = sim.step(config, dynamics.TransformedState(0.5, 0.06, math.pi / 2))
    assert isinstance(state, dynamics.TransformedState)
    np.testing.assert_allclose(state.rho, 0.5 * np.exp(0.0012j), atol=1e-12)
    np.testing.assert_allclose(state.s, 0.06, atol=1e-12)
    np.testing.assert_allclose(state.gamma, math.pi / 2 + 0.0012, atol=1e-12)


@pytest.mark.parametrize("plane", ["original", "transformed"])
def test_sim_integrate_single_orbit(plane):
    log = sim.integrate(get_orbit_config(plane=plane))
    assert log.sizes == {"time": 101, "agent": 1}
    assert log.attrs["plane"] == plane
    assert log.time.attrs["units"] == "s"
    np.testing.assert_allclose(log.time[-1], 10.0)
    rho = (log.rho_re + 1j * log.rho_im).isel(agent=0).values
    np.testing.assert_allclose(rho, 0.5 * np.exp(0.12j * log.time.values), atol=1e-8)
    np.testing.assert_allclose(log.abs_e, 0, atol=1e-8)
    np.testing.assert_allclose(log.nu, 0, atol=1e-9)
    np.testing.assert_allclose(log.Omega, 0.12, atol=1e-8)
    np.testing.assert_allclose(log.V, 0, atol=1e-10)


def test_sim_integrate_log_layout():
    config = get_reference_config().replace(t_final=1.0)
    log = sim.integrate(config)
    assert set(sim.AGENT_VARIABLES + sim.GROUP_VARIABLES) <= set(log.data_vars)
    assert log.sizes == {"time": 101, "agent": 5}
    np.testing.assert_array_equal(log.agent, [1, 2, 3, 4, 5])
    r0 = sim.positions(log).isel(time=0).values
    np.testing.assert_allclose(r0, config.initial_states.r)
    for name in ("lambda", "mu", "alpha", "sigma", "delta_t", "K", "s_d"):
        assert name in log.attrs
    assert log.attrs["pattern"] == "sync"


@pytest.mark.parametrize(
    "changes,match",
    [
        (dict(dt=0.1), "time step"),
        (dict(dt=0.0), "time step"),
        (dict(dt=0.01, t_final=0.001), "horizon"),
        (dict(log_stride=0), "log stride"),
        (dict(graph=None), "graph is needed"),
        (dict(graph=graph.get_preset_graph("cycle", 4)), "differ"),
    ],
)
def test_sim_config_errors(changes, match):
    with pytest.raises(sim.SimError, match=match):
        get_reference_config().replace(**changes)


def test_sim_config_checks():
    config = get_reference_config()
    assert config.nagents == 5
    assert config.nsteps == 500000
    assert config.plane == sim.planes.original
    assert config.pattern == control.patterns.sync
    with pytest.raises(sim.SimError, match="original plane"):
        config.replace(initial_states=dynamics.to_transformed(config.ctx, config.initial_states))
    with pytest.raises(control.WrongGainSignError):
        config.replace(pattern="balance")
    with pytest.warns(FlockWarning, match="smaller root"):
        config.replace(ctx=get_ctx("larger"))
    balance = get_reference_config("paper_balancing")
    with pytest.warns(FlockWarning, match="circulant"):
        balance.replace(graph=graph.get_preset_graph("path", 5))


def test_sim_determinism():
    config = get_reference_config().replace(t_final=5.0)
    xr.testing.assert_identical(sim.integrate(config), sim.integrate(config))


@pytest.mark.parametrize("sample", ["paper_sync", "paper_balancing"])
def test_sim_short_run_monitors(sample):
    config = get_reference_config(sample).replace(t_final=50.0)
    log, report = sim.run(config)
    assert report.boundary_ok
    assert report.barrier_ok
    assert report.speed_positive
    assert report.lyapunov_monotone
    assert report.envelope_ok, report.envelope_failures
    assert report.cross_divergence is None
    out = report.to_dict()
    assert out["passed"] == report.passed
    assert set(report.flags) <= set(out)


def test_sim_cross_check():
    config = get_reference_config().replace(t_final=20.0)
    assert sim.cross_check(config) < 1e-6
    log, report = sim.run(config.replace(plane="crosscheck"))
    assert log.attrs["plane"] == "original"
    assert report.cross_divergence < 1e-6


def test_sim_run_infeasible():
    config = get_reference_config()
    states = config.initial_states
    bad = dynamics.OriginalState(states.r, states.v * 10, states.theta)
    with pytest.raises(sim.InfeasibleInitialConditionsError, match="agent 0"):
        sim.run(config.replace(initial_states=bad))


def test_sim_check_envelope():
    config = get_reference_config().replace(t_final=10.0)
    log = sim.integrate(config)
    assert sim.check_envelope(config, log) == []
    shifted = log.copy()
    shifted["s"] = shifted.s + 1.0
    assert "transformed speed" in sim.check_envelope(config, shifted)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=1, max_value=8))
def test_sim_random_initial_states(seed, n):
    ctx = get_ctx()
    states = sim.random_initial_states(ctx, get_gains(), n, seed=seed)
    assert len(states) == n
    assert control.feasibility_check(ctx, get_gains(), states).passed
    again = sim.random_initial_states(ctx, get_gains(), n, seed=seed)
    np.testing.assert_array_equal(states.r, again.r)


def get_grazing_config(**kwargs):
    ctx = get_ctx()
    gamma = math.pi / 2 - 0.1
    error = ctx.delta_t - 1e-6
    rho = 0.5 * math.sin(gamma) + math.sqrt(error ** 2 - (0.5 * math.cos(gamma)) ** 2)
    tstate = dynamics.TransformedState(rho, 0.06, gamma)
    kwargs.setdefault("dt", 0.01)
    kwargs.setdefault("t_final", 0.01)
    kwargs.setdefault("log_stride", 1)
    config = sim.SimConfig(
        ctx, get_gains(), None, dynamics.to_original(ctx, tstate), plane="transformed", **kwargs
    )
    return config, tstate


def test_sim_step_near_barrier():
    config, tstate = get_grazing_config()
    assert abs(dynamics.error_transformed(config.ctx, tstate)) < config.ctx.delta_t
    with pytest.raises(control.BarrierViolationError, match="after 0 halvings"):
        sim.step(config.replace(max_halvings=0), tstate)

    state = sim.step(config, tstate)
    assert abs(dynamics.error_transformed(config.ctx, state)) < config.ctx.delta_t
    assert abs(state.s - 0.06) < 0.06


def test_sim_integrate_near_barrier():
    config, tstate = get_grazing_config(t_final=0.1)
    assert config.max_halvings == 20
    log = sim.integrate(config)
    assert log.attrs["rejected_steps"] > 0
    assert log.attrs["finest_dt"] < config.dt
    assert float(log.abs_E.max()) < config.ctx.delta_t
    report = sim.evaluate_monitors(config, log)
    assert report.barrier_ok
    assert report.rejected_steps == log.attrs["rejected_steps"]


def test_sim_config_max_halvings():
    config = get_orbit_config()
    assert config.max_halvings == 20
    with mobius_flock.set_options("sim", max_halvings=3):
        assert get_orbit_config().max_halvings == 3
    with pytest.raises(sim.SimError, match="halvings"):
        config.replace(max_halvings=sim.MAX_HALVINGS + 1)


def test_sim_integrate_order_of_accuracy():
    ctx = get_ctx()
    gains = control.ControllerGains(kappa1=0.1, kappa2=10.0, K=-0.04, s_d=0.3, delta_s=0.3)
    state = dynamics.to_original(ctx, dynamics.TransformedState(0.55, 0.4, math.pi / 2 + 0.1))
    finals = []
    for dt in (0.01, 0.005, 0.0025):
        config = sim.SimConfig(
            ctx, gains, None, state, dt=dt, t_final=2.0, plane="transformed", log_stride=1000
        )
        log = sim.integrate(config)
        assert log.attrs["rejected_steps"] == 0
        assert float(log.time[-1]) == pytest.approx(2.0)
        last = log.isel(time=-1, agent=0)
        finals.append(np.array([float(last[name]) for name in ("rho_re", "rho_im", "s", "gamma")]))
    coarse = np.abs(finals[0] - finals[1]).max()
    fine = np.abs(finals[1] - finals[2]).max()
    assert 11 < coarse / fine < 21


def test_sim_integrate_logs_last_step():
    config = get_orbit_config(t_final=10.05)
    assert config.nsteps == 1005
    np.testing.assert_array_equal(sim.get_log_steps(config)[-3:], [990, 1000, 1005])
    log = sim.integrate(config)
    assert log.sizes == {"time": 102, "agent": 1}
    np.testing.assert_allclose(log.time[-2:], [10.0, 10.05])
    rho = complex(log.rho_re[-1, 0].item(), log.rho_im[-1, 0].item())
    assert rho == pytest.approx(0.5 * np.exp(0.12j * 10.05), abs=1e-8)


def test_sim_lyapunov_increment_over_steps():
    config = get_reference_config().replace(t_final=2.0)
    log = sim.integrate(config)
    assert log.attrs["lyapunov_step_increment"] <= 1e-9
    assert sim.evaluate_monitors(config, log).lyapunov_monotone
    jumpy = log.copy()
    jumpy.attrs["lyapunov_step_increment"] = 1e-3
    report = sim.evaluate_monitors(config, jumpy)
    assert not report.lyapunov_monotone
    assert report.lyapunov_max_increment == 1e-3


def test_sim_cross_plane_flag():
    config = get_reference_config().replace(t_final=1.0, plane="crosscheck")
    log, report = sim.run(config)
    assert report.flags["cross_plane_ok"]
    assert report.cross_tolerance == 1e-6
    with mobius_flock.set_options("monitor", cross_tolerance=0.0):
        log, report = sim.run(config)
    assert report.flags["cross_plane_ok"] is False
    assert not report.passed
    assert report.to_dict()["cross_plane_ok"] is False

    log, report = sim.run(config.replace(plane="original"))
    assert "cross_plane_ok" not in report.flags
    assert report.cross_plane_ok is None


def test_sim_integrate_user_frame():
    config = get_reference_config().replace(t_final=0.1)
    assert "r_user_re" not in sim.integrate(config).data_vars

    frame = geometry.FrameTransform(1 + 2j, 0.3, 0.5)
    log = sim.integrate(config.replace(frame=frame))
    r_user = (log.r_user_re + 1j * log.r_user_im).values
    np.testing.assert_allclose(r_user, frame.from_canonical_point(sim.positions(log).values))
    np.testing.assert_allclose(frame.to_canonical_point(r_user[0]), config.initial_states.r)
    np.testing.assert_allclose(log.v_user, log.v / 0.5)
    np.testing.assert_allclose(log.theta_user, log.theta + 0.3)
    assert log.attrs["frame_scale"] == 0.5
    assert log.attrs["frame_translation_im"] == 2.0
