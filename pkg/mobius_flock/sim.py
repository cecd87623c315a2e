#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Closed-loop simulation of the agents

The closed loop is integrated with a fixed-step fourth order Runge-Kutta
scheme, in the original or in the transformed plane, with a synchronous
evaluation of the controllers of all agents at each stage.
Steps that leave the barriers are redone with halved sub-steps, since the
barrier terms make the closed loop stiff when agents graze them.
Trajectories are logged as :class:`xarray.Dataset` objects and checked by
monitors.
"""
# Copyright 2021 mobius_flock developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import time
import logging
import dataclasses

import numpy as np
import numba
import xarray as xr

from . import FlockError, flock_warn, get_option
from .misc import IntEnumChoices, DefaultEnumMeta
from .num import NOT_CI, phasor, angular_spread
from . import geometry as mgeo
from . import graph as mgraph
from . import dynamics as mdyn
from . import control as mctl

logger = logging.getLogger(__name__)

#: Maximal time step
MAX_DT = 0.01

#: Maximal number of halvings of a time step
MAX_HALVINGS = 40

#: Variables logged per agent
AGENT_VARIABLES = (
    "r_re",
    "r_im",
    "v",
    "theta",
    "rho_re",
    "rho_im",
    "s",
    "gamma",
    "abs_e",
    "abs_E",
    "u",
    "omega",
    "nu",
    "Omega",
)

#: Variables logged for the group
GROUP_VARIABLES = ("V", "abs_q", "U", "edge_sum", "theta_order")

_OK = -1
_NONFINITE = -2


class SimError(FlockError):
    pass


class NonFiniteStateError(SimError):
    pass


class InfeasibleInitialConditionsError(SimError):
    pass


class planes(IntEnumChoices, metaclass=DefaultEnumMeta):
    """Planes in which the closed loop is integrated"""

    #: Unicycles in the original plane with original plane controllers
    original = 0
    #: Unicycles in the transformed plane, mapped back for the log
    transformed = 1
    #: Original plane integration checked against a transformed plane one
    crosscheck = 2


@dataclasses.dataclass(frozen=True, eq=False)
class SimConfig:
    """Configuration of a simulation

    Parameters
    ----------
    ctx: MobiusContext
    gains: ControllerGains
    graph: InteractionGraph, None
        None is only valid for a single agent
    initial_states: OriginalState
        Initial states in the canonical frame
    dt: float
        Time step in seconds
    t_final: float
        Horizon in seconds
    plane: str, planes
    pattern: None, str, patterns
        Defaults to the pattern selected by the sign of the coupling gain
    log_stride: int
        Number of steps between two logged samples
    seed: None, int
        Seed used to draw the initial states, for bookkeeping
    open_loop: bool
        Integrate with null controls
    frame: None, FrameTransform
        Frame of the user coordinates
    max_halvings: None, int
        Number of times a step that leaves the barriers may be halved,
        which defaults to the ``sim.max_halvings`` option
    """

    ctx: mgeo.MobiusContext
    gains: mctl.ControllerGains
    graph: object
    initial_states: mdyn.OriginalState
    dt: float = 1e-3
    t_final: float = 500.0
    plane: planes = planes.original
    pattern: mctl.patterns = None
    log_stride: int = 10
    seed: int = None
    open_loop: bool = False
    frame: mgeo.FrameTransform = None
    max_halvings: int = None

    def __post_init__(self):
        if self.max_halvings is None:
            object.__setattr__(self, "max_halvings", get_option("sim.max_halvings"))
        object.__setattr__(self, "plane", planes(self.plane))
        object.__setattr__(self, "pattern", mctl.check_pattern(self.gains, self.pattern))
        if not 0 < self.dt <= MAX_DT:
            raise SimError(f"The time step must be in ]0, {MAX_DT}]: {self.dt}")
        if self.t_final < self.dt:
            raise SimError(f"The horizon must not be lower than the time step: {self.t_final}")
        if self.log_stride < 1:
            raise SimError(f"Invalid log stride: {self.log_stride}")
        if not 0 <= self.max_halvings <= MAX_HALVINGS:
            raise SimError(f"Invalid number of step halvings: {self.max_halvings}")
        if not isinstance(self.initial_states, mdyn.OriginalState):
            raise SimError("Initial states must be given in the original plane")
        if self.graph is None:
            if self.nagents != 1:
                raise SimError("A graph is needed for more than one agent")
        elif self.graph.n != self.nagents:
            raise SimError(
                f"Graph size and number of agents differ: {self.graph.n} != {self.nagents}"
            )
        if self.ctx.root_kind != mgeo.root_kinds.smaller:
            flock_warn("The closed loop guarantees are only checked with the smaller root")
        if (
            self.pattern == mctl.patterns.balance
            and self.graph is not None
            and not self.graph.circulant
        ):
            flock_warn("Balancing is only guaranteed on circulant graphs")

    @property
    def nagents(self):
        return len(self.initial_states)

    @property
    def nsteps(self):
        return int(round(self.t_final / self.dt))

    def replace(self, **changes):
        """Copy with changes"""
        return dataclasses.replace(self, **changes)


def random_initial_states(ctx, gains, n, seed=None, margin=0.8):
    """Draw feasible initial states

    States are drawn in the transformed plane near the image of the desired
    circle, then mapped to the original plane.

    Parameters
    ----------
    ctx: MobiusContext
    gains: ControllerGains
    n: int
        Number of agents
    seed: None, int
    margin: float
        Fraction of the barrier widths that initial errors may reach

    Return
    ------
    OriginalState
    """
    rng = np.random.default_rng(seed)
    radius = ctx.radius_inner + 0.5 * margin * ctx.delta_t * rng.uniform(-1, 1, n)
    psi = rng.uniform(-np.pi, np.pi, n)
    gamma = (
        psi
        + math.copysign(0.5 * np.pi, ctx.sigma)
        + 0.5 * margin * ctx.delta_t / ctx.radius_inner * rng.uniform(-1, 1, n)
    )
    s = gains.s_d + margin * gains.delta_s * rng.uniform(-1, 1, n)
    states = mdyn.to_original(ctx, mdyn.TransformedState(radius * np.exp(1j * psi), s, gamma))
    report = mctl.feasibility_check(ctx, gains, states)
    if not report.passed:
        raise InfeasibleInitialConditionsError("; ".join(report.failures()))
    return states


# %% Jitted kernels


@numba.njit(cache=NOT_CI)
def _rhs_(x, plane, alpha, params, indptr, indices, open_loop, out):
    n = x.shape[1]
    pos = x[0] + 1j * x[1]
    speed = x[2].copy()
    heading = x[3].copy()
    accel = np.zeros(n)
    turn = np.zeros(n)
    status = _OK
    if not open_loop:
        nu = np.empty(n)
        Omega = np.empty(n)
        if plane == 0:
            status = mctl._original_controls_(
                alpha, pos, speed, heading, indptr, indices, params, accel, turn, nu, Omega
            )
        else:
            status = mctl._transformed_controls_(
                pos, speed, heading, indptr, indices, params, accel, turn
            )
    out[0] = speed * np.cos(heading)
    out[1] = speed * np.sin(heading)
    out[2] = accel
    out[3] = turn
    return status


@numba.njit(cache=NOT_CI)
def _rk4_step_(x, dt, plane, alpha, params, indptr, indices, open_loop):
    k1 = np.empty_like(x)
    k2 = np.empty_like(x)
    k3 = np.empty_like(x)
    k4 = np.empty_like(x)
    s1 = _rhs_(x, plane, alpha, params, indptr, indices, open_loop, k1)
    s2 = _rhs_(x + 0.5 * dt * k1, plane, alpha, params, indptr, indices, open_loop, k2)
    s3 = _rhs_(x + 0.5 * dt * k2, plane, alpha, params, indptr, indices, open_loop, k3)
    s4 = _rhs_(x + dt * k3, plane, alpha, params, indptr, indices, open_loop, k4)
    status = _OK
    for stage_status in (s1, s2, s3, s4):
        if stage_status >= 0:
            status = stage_status
            break
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), status


@numba.njit(cache=NOT_CI)
def _transformed_arrays_(x, plane, alpha):
    n = x.shape[1]
    rho = np.empty(n, dtype=np.complex128)
    s = np.empty(n)
    gamma = np.empty(n)
    for k in range(n):
        pos = x[0, k] + 1j * x[1, k]
        if plane == 0:
            mapped, speed, heading = mdyn._to_transformed_(alpha, pos, x[2, k], x[3, k])
            rho[k] = mapped
            s[k] = speed
            gamma[k] = heading
        else:
            rho[k] = pos
            s[k] = x[2, k]
            gamma[k] = x[3, k]
    return rho, s, gamma


@numba.njit(cache=NOT_CI)
def _lyapunov_(rho, s, gamma, indptr, indices, params, balance, lambda_max):
    """Lyapunov function, potential and edge phasor sum of transformed states

    Also return the index of the first agent outside the barriers, else -1
    """
    sigma, delta_t, kappa1, kk, s_d, delta_s = (
        params[0],
        params[1],
        params[2],
        params[4],
        params[5],
        params[6],
    )
    n = rho.size
    spot = 0.0
    hpot = 0.0
    edge_sum = 0.0
    status = _OK
    for k in range(n):
        eg = phasor(gamma[k])
        bt = delta_t ** 2 - abs(rho[k] + 1j * sigma * eg) ** 2
        st = s[k] - s_d
        bs = delta_s ** 2 - st * st
        if (bt <= 0.0 or bs <= 0.0) and status < 0:
            status = k
        spot += 0.5 * math.log(delta_t ** 2 / max(bt, 1e-14))
        hpot += 0.5 * math.log(delta_s ** 2 / max(bs, 1e-14))
        for i in range(indptr[k], indptr[k + 1]):
            edge_sum += 0.5 * abs(phasor(gamma[indices[i]]) - eg) ** 2
    upot = 0.5 * edge_sum
    if balance:
        lyap = kappa1 * spot + kk * (0.5 * n * lambda_max - upot) + hpot
    else:
        lyap = kappa1 * spot - kk * upot + hpot
    return lyap, upot, edge_sum, status


@numba.njit(cache=NOT_CI)
def _state_lyapunov_(x, plane, alpha, params, indptr, indices, balance, lambda_max):
    rho, s, gamma = _transformed_arrays_(x, plane, alpha)
    lyap, upot, edge_sum, status = _lyapunov_(
        rho, s, gamma, indptr, indices, params, balance, lambda_max
    )
    return lyap, status


@numba.njit(cache=NOT_CI)
def _safe_step_(
    x, lyap, dt, max_halvings, plane, alpha, params, indptr, indices, open_loop, balance, lambda_max
):
    """Integrate over `dt`, halving sub-steps that leave the barriers

    Sub-steps are attempted at ``dt / 2**level``. A rejected sub-step is
    retried one level deeper, an accepted one lets the next sub-step go one
    level up when aligned.

    Return
    ------
    x, lyap, status, max_increment, nrejected, finest_level
    """
    unit = np.int64(1) << max_halvings
    done = np.int64(0)
    level = 0
    nrejected = 0
    finest = 0
    max_increment = -np.inf
    while done < unit:
        h = dt / (np.int64(1) << level)
        xn, status = _rk4_step_(x, h, plane, alpha, params, indptr, indices, open_loop)
        lyap_new = lyap
        if status < 0:
            for value in xn.ravel():
                if not math.isfinite(value):
                    status = _NONFINITE
                    break
        if status == _OK:
            lyap_new, bstatus = _state_lyapunov_(
                xn, plane, alpha, params, indptr, indices, balance, lambda_max
            )
            if not open_loop and bstatus >= 0:
                status = bstatus
        if status != _OK:
            if level == max_halvings:
                return x, lyap, status, max_increment, nrejected, finest
            level += 1
            nrejected += 1
            continue
        max_increment = max(max_increment, lyap_new - lyap)
        x = xn
        lyap = lyap_new
        done += np.int64(1) << (max_halvings - level)
        finest = max(finest, level)
        if level > 0 and (done >> (max_halvings - level)) % 2 == 0:
            level -= 1
    return x, lyap, _OK, max_increment, nrejected, finest


@numba.njit(cache=NOT_CI)
def _integrate_(
    x0,
    dt,
    nsteps,
    stride,
    max_halvings,
    plane,
    alpha,
    params,
    indptr,
    indices,
    open_loop,
    balance,
    lambda_max,
):
    nlog = (nsteps + stride - 1) // stride + 1
    log = np.empty((nlog, x0.shape[0], x0.shape[1]))
    log[0] = x0
    x = x0.copy()
    lyap, status = _state_lyapunov_(x, plane, alpha, params, indptr, indices, balance, lambda_max)
    stats = np.array([-np.inf, 0.0, 0.0])
    for i in range(1, nsteps + 1):
        x, lyap, status, increment, nrejected, finest = _safe_step_(
            x,
            lyap,
            dt,
            max_halvings,
            plane,
            alpha,
            params,
            indptr,
            indices,
            open_loop,
            balance,
            lambda_max,
        )
        stats[0] = max(stats[0], increment)
        stats[1] += nrejected
        stats[2] = max(stats[2], float(finest))
        if status != _OK:
            return log, (i - 1) // stride + 1, status, i, stats
        if i % stride == 0:
            log[i // stride] = x
        elif i == nsteps:
            log[nlog - 1] = x
    return log, nlog, _OK, nsteps, stats


@numba.njit(cache=NOT_CI)
def _diagnose_(log, plane, alpha, params, indptr, indices, open_loop, balance, lambda_max):
    nt, nvar, n = log.shape
    sigma = params[0]
    agents = np.zeros((nt, 14, n))
    group = np.zeros((nt, 5))
    r = np.empty(n, dtype=np.complex128)
    rho = np.empty(n, dtype=np.complex128)
    v = np.empty(n)
    theta = np.empty(n)
    s = np.empty(n)
    gamma = np.empty(n)
    u = np.zeros(n)
    omega = np.zeros(n)
    nu = np.zeros(n)
    Omega = np.zeros(n)
    for it in range(nt):
        x = log[it]
        for k in range(n):
            pos = x[0, k] + 1j * x[1, k]
            if plane == 0:
                mapped, speed, heading = mdyn._to_transformed_(alpha, pos, x[2, k], x[3, k])
                r[k] = pos
                v[k] = x[2, k]
                theta[k] = x[3, k]
                rho[k] = mapped
                s[k] = speed
                gamma[k] = heading
            else:
                mapped, speed, heading = mdyn._to_original_(alpha, pos, x[2, k], x[3, k])
                rho[k] = pos
                s[k] = x[2, k]
                gamma[k] = x[3, k]
                r[k] = mapped
                v[k] = speed
                theta[k] = heading
        if not open_loop:
            if plane == 0:
                mctl._original_controls_(
                    alpha, r, v, theta, indptr, indices, params, u, omega, nu, Omega
                )
            else:
                mctl._transformed_controls_(rho, s, gamma, indptr, indices, params, nu, Omega)
                for k in range(n):
                    u[k] = mctl._u_from_transformed_(alpha, rho[k], s[k], gamma[k], nu[k])
                    omega[k] = mctl._omega_from_transformed_(rho[k], s[k], gamma[k], Omega[k])

        lyap, upot, edge_sum, status = _lyapunov_(
            rho, s, gamma, indptr, indices, params, balance, lambda_max
        )
        q = 0j
        qtheta = 0j
        for k in range(n):
            q += phasor(gamma[k])
            qtheta += phasor(theta[k])
            agents[it, 0, k] = r[k].real
            agents[it, 1, k] = r[k].imag
            agents[it, 2, k] = v[k]
            agents[it, 3, k] = theta[k]
            agents[it, 4, k] = rho[k].real
            agents[it, 5, k] = rho[k].imag
            agents[it, 6, k] = s[k]
            agents[it, 7, k] = gamma[k]
            agents[it, 8, k] = abs(r[k] + 1j * phasor(theta[k]))
            agents[it, 9, k] = abs(rho[k] + 1j * sigma * phasor(gamma[k]))
            agents[it, 10, k] = u[k]
            agents[it, 11, k] = omega[k]
            agents[it, 12, k] = nu[k]
            agents[it, 13, k] = Omega[k]
        group[it, 0] = lyap
        group[it, 1] = abs(q) / n
        group[it, 2] = upot
        group[it, 3] = edge_sum
        group[it, 4] = abs(qtheta) / n
    return agents, group


# %% Integration


def _pack_(states):
    if isinstance(states, mdyn.OriginalState):
        pos, speed, heading = states.r, states.v, states.theta
    else:
        pos, speed, heading = states.rho, states.s, states.gamma
    pos = np.atleast_1d(pos)
    return np.array(
        [pos.real, pos.imag, np.atleast_1d(speed), np.atleast_1d(heading)], dtype="d"
    )


def _kernel_args_(config, plane):
    indptr, indices = mgraph.get_csr(config.graph, config.nagents)
    return (
        int(plane != planes.original),
        config.ctx.alpha,
        mctl.pack_parameters(config.ctx, config.gains),
        indptr,
        indices,
        bool(config.open_loop),
    )


def _lyapunov_args_(config):
    lambda_max = config.graph.lambda_max if config.graph is not None else 0.0
    return config.pattern == mctl.patterns.balance, lambda_max


def _raise_status_(status, t, max_halvings):
    if status == _NONFINITE:
        raise NonFiniteStateError(f"Non finite state at t={t:.6g} s")
    if status >= 0:
        raise mctl.BarrierViolationError(
            f"Agent {status} reached a barrier at t={t:.6g} s "
            f"after {max_halvings} halvings of the time step"
        )


def step(config, states):
    """Integrate the closed loop over a single time step

    A step whose stages leave the barriers is split into halves, at most
    :attr:`SimConfig.max_halvings` times.

    Parameters
    ----------
    config: SimConfig
    states: OriginalState, TransformedState
        The plane of integration is the one of the states

    Return
    ------
    OriginalState, TransformedState
    """
    original = isinstance(states, mdyn.OriginalState)
    plane = planes.original if original else planes.transformed
    x = _pack_(states)
    args = _kernel_args_(config, plane)
    largs = _lyapunov_args_(config)
    lyap = _state_lyapunov_(x, *args[:-1], *largs)[0]
    x, lyap, status, increment, nrejected, finest = _safe_step_(
        x, lyap, config.dt, config.max_halvings, *args, *largs
    )
    _raise_status_(status, config.dt, config.max_halvings)
    cls = mdyn.OriginalState if original else mdyn.TransformedState
    return cls(x[0] + 1j * x[1], x[2], x[3])


def get_log_steps(config):
    """Indices of the logged steps

    The last step is always logged.
    """
    steps = np.arange(0, config.nsteps + 1, config.log_stride)
    if steps[-1] != config.nsteps:
        steps = np.append(steps, config.nsteps)
    return steps


def integrate(config, plane=None):
    """Integrate the closed loop and log the trajectories

    Parameters
    ----------
    config: SimConfig
    plane: None, str, planes
        Plane of integration, which defaults to the one of `config`.
        The cross-check plane integrates in the original plane.

    Return
    ------
    xarray.Dataset
        Trajectory log with ``time`` and ``agent`` dimensions.
        When the configuration has a user frame, positions, speeds and
        headings are also given in this frame.
    """
    plane = planes(config.plane if plane is None else plane)
    if plane == planes.crosscheck:
        plane = planes.original
    ctx = config.ctx
    states = config.initial_states
    if plane == planes.transformed:
        states = mdyn.to_transformed(ctx, states)
    args = _kernel_args_(config, plane)
    largs = _lyapunov_args_(config)

    logger.info(
        "Integrating %d agents over %d steps of %g s in the %s plane",
        config.nagents,
        config.nsteps,
        config.dt,
        plane.name,
    )
    tic = time.perf_counter()
    log, nlog, status, istep, stats = _integrate_(
        _pack_(states),
        config.dt,
        config.nsteps,
        config.log_stride,
        config.max_halvings,
        *args,
        *largs,
    )
    _raise_status_(status, istep * config.dt, config.max_halvings)
    agents, group = _diagnose_(log[:nlog], *args, *largs)
    nrejected, finest = int(stats[1]), int(stats[2])
    if nrejected:
        logger.info(
            "%d sub-steps were rejected near the barriers, down to a step of %g s",
            nrejected,
            config.dt / 2 ** finest,
        )
    logger.info("Integration done in %.2f s", time.perf_counter() - tic)

    coords = {
        "time": ("time", get_log_steps(config) * config.dt, {"units": "s"}),
        "agent": ("agent", np.arange(1, config.nagents + 1)),
    }
    data_vars = {
        name: (("time", "agent"), agents[:, i]) for i, name in enumerate(AGENT_VARIABLES)
    }
    data_vars.update({name: ("time", group[:, i]) for i, name in enumerate(GROUP_VARIABLES)})
    attrs = {
        "plane": plane.name,
        "pattern": config.pattern.name,
        "dt": config.dt,
        "log_stride": config.log_stride,
        "lambda": ctx.pair.lam,
        "mu": ctx.pair.mu,
        "alpha": ctx.alpha,
        "sigma": ctx.sigma,
        "delta_t": ctx.delta_t,
        "kappa1": config.gains.kappa1,
        "kappa2": config.gains.kappa2,
        "K": config.gains.K,
        "s_d": config.gains.s_d,
        "delta_s": config.gains.delta_s,
        "lyapunov_step_increment": float(stats[0]),
        "rejected_steps": nrejected,
        "finest_dt": config.dt / 2 ** finest,
    }
    frame = config.frame
    if frame is not None and not frame.is_identity:
        r_user, v_user, theta_user = frame.from_canonical(
            agents[:, 0] + 1j * agents[:, 1], agents[:, 2], agents[:, 3]
        )
        data_vars.update(
            {
                "r_user_re": (("time", "agent"), r_user.real),
                "r_user_im": (("time", "agent"), r_user.imag),
                "v_user": (("time", "agent"), v_user),
                "theta_user": (("time", "agent"), theta_user),
            }
        )
        attrs.update(
            frame_translation_re=frame.translation.real,
            frame_translation_im=frame.translation.imag,
            frame_rotation=frame.rotation,
            frame_scale=frame.scale,
        )
    return xr.Dataset(data_vars, coords=coords, attrs=attrs)


def positions(log):
    """Complex original plane positions of a trajectory log"""
    return log.r_re + 1j * log.r_im


def cross_check(config):
    """Maximal distance between original plane and transformed plane integrations

    Parameters
    ----------
    config: SimConfig

    Return
    ------
    float
        Maximum over logged samples and agents of the distance between the
        original positions of both integrations
    """
    log_o = integrate(config, planes.original)
    log_t = integrate(config, planes.transformed)
    divergence = float(np.abs(positions(log_o) - positions(log_t)).max())
    logger.info("Cross plane divergence: %.3g", divergence)
    return divergence


# %% Monitors


@dataclasses.dataclass
class MonitorReport:
    """Checks of a trajectory log

    Flags are evaluated on all logged samples, except the Lyapunov
    increment that is also tracked over every integration step.
    The cross plane flag only exists when a cross-check was run.
    """

    boundary_ok: bool
    barrier_ok: bool
    speed_positive: bool
    lyapunov_monotone: bool
    lyapunov_max_increment: float
    envelope_ok: bool
    envelope_failures: list
    converged_at: float
    final_order: float
    final_max_error: float
    gamma_spread: float
    theta_spread: float
    theta_order: float
    cross_divergence: float = None
    cross_tolerance: float = None
    rejected_steps: int = 0
    finest_dt: float = None

    @property
    def converged(self):
        return self.converged_at is not None

    @property
    def cross_plane_ok(self):
        if self.cross_divergence is None:
            return None
        tolerance = self.cross_tolerance
        if tolerance is None:
            tolerance = get_option("monitor.cross_tolerance")
        return bool(self.cross_divergence < tolerance)

    @property
    def flags(self):
        flags = {
            "boundary_ok": self.boundary_ok,
            "barrier_ok": self.barrier_ok,
            "speed_positive": self.speed_positive,
            "lyapunov_monotone": self.lyapunov_monotone,
            "envelope_ok": self.envelope_ok,
            "converged": self.converged,
        }
        if self.cross_divergence is not None:
            flags["cross_plane_ok"] = self.cross_plane_ok
        return flags

    @property
    def passed(self):
        return all(self.flags.values())

    def to_dict(self):
        out = dataclasses.asdict(self)
        out.update(self.flags)
        out["passed"] = self.passed
        return out


def _converged_at_(times, criterion, sustain):
    failed = np.flatnonzero(~criterion)
    start = failed[-1] + 1 if failed.size else 0
    if start >= times.size or times[-1] - times[start] < sustain:
        return None
    return float(times[start])


def check_envelope(config, log, slack=None):
    """Check a trajectory log against its a priori bounds

    Return
    ------
    list(str)
        Violated bounds
    """
    if slack is None:
        slack = get_option("monitor.envelope_slack")
    ctx, gains = config.ctx, config.gains
    env = mctl.bound_envelope(
        config.graph, ctx, gains, max(float(log.V[0]), 0.0), config.pattern
    )
    rho = np.abs(log.rho_re + 1j * log.rho_im)
    r = positions(log).values
    vmin, vmax = env.original_speed_bounds(ctx, r)
    checks = {
        "transformed error": float(log.abs_E.max()) < env.error_max + slack,
        "transformed radius": float(rho.min()) > env.rho_min - slack
        and float(rho.max()) < env.rho_max + slack,
        "transformed speed": float(log.s.min()) > env.speed_min - slack
        and float(log.s.max()) < env.speed_max + slack,
        "edge phasor sum": float(log.edge_sum.min()) > env.edge_sum_min - slack
        and float(log.edge_sum.max()) < env.edge_sum_max + slack,
        "original disc": bool((np.abs(r - env.disc_center) < env.disc_radius + slack).all()),
        "original speed": bool(
            ((log.v.values > vmin - slack) & (log.v.values < vmax + slack)).all()
        ),
    }
    return [name for name, ok in checks.items() if not ok]


def evaluate_monitors(config, log):
    """Evaluate the monitors of a trajectory log

    Parameters
    ----------
    config: SimConfig
    log: xarray.Dataset

    Return
    ------
    MonitorReport
    """
    ctx, gains = config.ctx, config.gains
    r = positions(log)
    rho = np.abs(log.rho_re + 1j * log.rho_im)
    rho_min, rho_max = mgeo.rho_interval(ctx)
    boundary_ok = bool(
        (np.abs(r - ctx.pair.lam) < ctx.pair.mu).all() and ((rho > rho_min) & (rho < rho_max)).all()
    )
    barrier_ok = bool(
        (log.abs_E < ctx.delta_t).all() and (np.abs(log.s - gains.s_d) < gains.delta_s).all()
    )
    speed_positive = bool((log.s > 0).all() and (log.v > 0).all())

    lyap = log.V.values
    increments = np.diff(lyap)
    max_increment = float(increments.max()) if increments.size else 0.0
    max_increment = max(max_increment, log.attrs.get("lyapunov_step_increment", -np.inf))
    lyapunov_monotone = max_increment <= get_option("monitor.lyapunov_rtol") * max(1.0, lyap[0])

    envelope_failures = [] if config.open_loop else check_envelope(config, log)

    max_error = log.abs_e.max("agent").values
    order = log.abs_q.values
    if config.pattern == mctl.patterns.sync:
        pattern_ok = order > get_option("monitor.sync_threshold")
    else:
        pattern_ok = order < get_option("monitor.balance_threshold")
    criterion = (max_error < get_option("monitor.error_threshold")) & pattern_ok
    converged_at = _converged_at_(log.time.values, criterion, get_option("monitor.sustain"))

    report = MonitorReport(
        boundary_ok=boundary_ok,
        barrier_ok=barrier_ok,
        speed_positive=speed_positive,
        lyapunov_monotone=bool(lyapunov_monotone),
        lyapunov_max_increment=max_increment,
        envelope_ok=not envelope_failures,
        envelope_failures=envelope_failures,
        converged_at=converged_at,
        final_order=float(order[-1]),
        final_max_error=float(max_error[-1]),
        gamma_spread=float(angular_spread(log.gamma.values[-1])),
        theta_spread=float(angular_spread(log.theta.values[-1])),
        theta_order=float(log.theta_order.values[-1]),
        rejected_steps=int(log.attrs.get("rejected_steps", 0)),
        finest_dt=log.attrs.get("finest_dt"),
    )
    logger.info("Monitors: %s", report.flags)
    return report


def run(config):
    """Check initial conditions, integrate and monitor the closed loop

    Parameters
    ----------
    config: SimConfig

    Return
    ------
    xarray.Dataset
        Trajectory log
    MonitorReport
    """
    feasibility = mctl.feasibility_check(config.ctx, config.gains, config.initial_states)
    if not feasibility.passed:
        raise InfeasibleInitialConditionsError(
            "Infeasible initial conditions: " + "; ".join(feasibility.failures())
        )
    log = integrate(config)
    report = evaluate_monitors(config, log)
    if config.plane == planes.crosscheck:
        log_t = integrate(config, planes.transformed)
        report.cross_divergence = float(np.abs(positions(log) - positions(log_t)).max())
        report.cross_tolerance = get_option("monitor.cross_tolerance")
        logger.info("Cross plane divergence: %.3g", report.cross_divergence)
    return log, report
