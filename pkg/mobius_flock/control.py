#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Distributed barrier-Lyapunov controllers

Controllers are designed in the transformed plane, where the boundary
constraint is a uniform annulus around the image of the desired circle,
and are expressed back in the original plane.
A negative coupling gain ``K`` synchronizes the phase-shifted headings,
a positive one balances them.
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
import dataclasses

import numpy as np
import numba

from . import FlockError
from .misc import IntEnumChoices, DefaultEnumMeta
from .num import NOT_CI, inner, phasor, apply_kernel
from . import geometry as mgeo
from . import graph as mgraph
from . import dynamics as mdyn

#: Floor of the barrier denominators
BARRIER_FLOOR = 1e-14


class ControlError(FlockError):
    pass


class BarrierViolationError(ControlError):
    pass


class GainError(ControlError):
    pass


class WrongGainSignError(GainError):
    pass


class patterns(IntEnumChoices, metaclass=DefaultEnumMeta):
    """Collective motion patterns"""

    #: All phase-shifted headings equal
    sync = 0
    synchronization = 0
    #: Phase-shifted heading phasors summing to zero
    balance = 1
    balancing = 1


@dataclasses.dataclass(frozen=True)
class ControllerGains:
    """Gains of the controllers

    Parameters
    ----------
    kappa1: float
        Positive gain of the radial barrier term
    kappa2: float
        Positive gain of the speed error
    K: float
        Coupling gain, negative to synchronize, positive to balance
    s_d: float
        Desired speed in the transformed plane
    delta_s: float
        Half-width of the speed error barrier, not greater than `s_d`
        so that speeds remain positive
    """

    kappa1: float
    kappa2: float
    K: float
    s_d: float
    delta_s: float

    def __post_init__(self):
        if self.kappa1 <= 0:
            raise WrongGainSignError(f"kappa1 must be positive: {self.kappa1}")
        if self.kappa2 <= 0:
            raise WrongGainSignError(f"kappa2 must be positive: {self.kappa2}")
        if self.K == 0:
            raise WrongGainSignError("The coupling gain K must be nonzero")
        if self.s_d <= 0 or self.delta_s <= 0:
            raise GainError(f"s_d and delta_s must be positive: {self.s_d}, {self.delta_s}")
        if self.s_d < self.delta_s:
            raise GainError(f"s_d must not be lower than delta_s: {self.s_d} < {self.delta_s}")

    @property
    def pattern(self):
        return patterns.sync if self.K < 0 else patterns.balance


def check_pattern(gains, pattern=None):
    """Check that the sign of the coupling gain matches a pattern

    Return
    ------
    patterns
    """
    if pattern is None:
        return gains.pattern
    pattern = patterns(pattern)
    if pattern != gains.pattern:
        raise WrongGainSignError(
            f"The {pattern.name} pattern requires a "
            + ("negative" if pattern == patterns.sync else "positive")
            + f" coupling gain: K={gains.K}"
        )
    return pattern


def pack_parameters(ctx, gains):
    """Pack the parameters of the jitted kernels in a float array"""
    return np.array(
        [ctx.sigma, ctx.delta_t, gains.kappa1, gains.kappa2, gains.K, gains.s_d, gains.delta_s],
        dtype="d",
    )


# %% Jitted kernels


@numba.njit(cache=NOT_CI)
def _transformed_law_(rho, s, gamma, coupling, params):
    sigma, delta_t, kappa1, kappa2, kk, s_d, delta_s = (
        params[0],
        params[1],
        params[2],
        params[3],
        params[4],
        params[5],
        params[6],
    )
    eg = phasor(gamma)
    err = rho + 1j * sigma * eg
    bt = delta_t * delta_t - abs(err) ** 2
    st = s - s_d
    bs = delta_s * delta_s - st * st
    ok = bt > 0.0 and bs > 0.0
    radial = kappa1 * inner(rho, eg) / max(bt, BARRIER_FLOOR)
    nu = -bs * (radial + kappa2 * st)
    Omega = (s_d + radial + kk / sigma * coupling) / sigma
    return nu, Omega, ok


@numba.njit(cache=NOT_CI)
def _original_law_(alpha, r, v, theta, coupling, params):
    rho, s, gamma = mdyn._to_transformed_(alpha, r, v, theta)
    nu, Omega, ok = _transformed_law_(rho, s, gamma, coupling, params)
    d = 1.0 + alpha * r
    u = abs(d * d / (alpha * (1.0 - alpha * alpha))) * nu + 2.0 * alpha * v * inner(
        d, v * phasor(theta)
    ) / abs(d) ** 2
    omega = Omega - mgeo._chi_dot_(alpha, r, v, theta)
    return u, omega, nu, Omega, ok


@numba.njit(cache=NOT_CI)
def _u_from_transformed_(alpha, rho, s, gamma, nu):
    d = rho - 1.0
    d2 = abs(d) ** 2
    return (
        abs((1.0 - alpha * alpha) / alpha)
        * (d2 * nu - 2.0 * s * inner(d, s * phasor(gamma)))
        / (d2 * d2)
    )


@numba.njit(cache=NOT_CI)
def _omega_from_transformed_(rho, s, gamma, Omega):
    return Omega + mgeo._zeta_dot_(rho, s, gamma)


@numba.njit(cache=NOT_CI)
def _transformed_controls_(rho, s, gamma, indptr, indices, params, nu, Omega):
    """Controls of all agents in the transformed plane

    Return the index of the first agent outside the barriers, else -1
    """
    status = -1
    for k in range(rho.size):
        coupling = mgraph._coupling_(k, gamma, indptr, indices)
        nuk, Omegak, ok = _transformed_law_(rho[k], s[k], gamma[k], coupling, params)
        nu[k] = nuk
        Omega[k] = Omegak
        if not ok and status < 0:
            status = k
    return status


@numba.njit(cache=NOT_CI)
def _original_controls_(alpha, r, v, theta, indptr, indices, params, u, omega, nu, Omega):
    """Controls of all agents in the original plane

    Neighbor phases are the phase-shifted original headings.
    Return the index of the first agent outside the barriers, else -1
    """
    n = r.size
    phases = np.empty(n)
    for k in range(n):
        phases[k] = theta[k] + mgeo._chi_(alpha, r[k])
    status = -1
    for k in range(n):
        coupling = mgraph._coupling_(k, phases, indptr, indices)
        uk, omegak, nuk, Omegak, ok = _original_law_(alpha, r[k], v[k], theta[k], coupling, params)
        u[k] = uk
        omega[k] = omegak
        nu[k] = nuk
        Omega[k] = Omegak
        if not ok and status < 0:
            status = k
    return status


# %% Controllers


def _raise_barrier_(status, where="in the transformed plane"):
    if status >= 0:
        raise BarrierViolationError(f"Agent {status} reached a barrier {where}")


def _squeeze_(values, like):
    return values[0] if np.ndim(like) == 0 else values


def transformed_controls(g, ctx, gains, states):
    """Speed and turn-rate controls of all agents in the transformed plane

    Parameters
    ----------
    g: InteractionGraph, None
        No graph means isolated agents
    ctx: MobiusContext
    gains: ControllerGains
    states: TransformedState

    Return
    ------
    numpy.ndarray
        Linear accelerations :math:`\\nu`
    numpy.ndarray
        Turn rates :math:`\\Omega`
    """
    rho = np.atleast_1d(states.rho).astype("D")
    s = np.atleast_1d(states.s).astype("d")
    gamma = np.atleast_1d(states.gamma).astype("d")
    nu, Omega = np.empty(rho.size), np.empty(rho.size)
    indptr, indices = mgraph.get_csr(g, rho.size)
    status = _transformed_controls_(
        rho, s, gamma, indptr, indices, pack_parameters(ctx, gains), nu, Omega
    )
    _raise_barrier_(status)
    return nu, Omega


def nu_transformed(ctx, gains, state):
    """Linear acceleration control in the transformed plane

    It does not depend on the neighbors.
    """
    return _squeeze_(transformed_controls(None, ctx, gains, state)[0], state.rho)


def Omega_transformed(g, ctx, gains, states, k=None):
    """Turn-rate control in the transformed plane

    Parameters
    ----------
    g: InteractionGraph, None
    ctx: MobiusContext
    gains: ControllerGains
    states: TransformedState
        States of all agents, of which only neighbors of `k` are used
    k: None, int
        Single agent, else all agents
    """
    Omega = transformed_controls(g, ctx, gains, states)[1]
    return Omega[k] if k is not None else _squeeze_(Omega, states.rho)


def original_controls(g, ctx, gains, states):
    """Controls of all agents expressed with original plane quantities

    Parameters
    ----------
    g: InteractionGraph, None
    ctx: MobiusContext
    gains: ControllerGains
    states: OriginalState

    Return
    ------
    numpy.ndarray
        Linear accelerations :math:`u`
    numpy.ndarray
        Turn rates :math:`\\omega`
    numpy.ndarray
        Transformed linear accelerations :math:`\\nu`
    numpy.ndarray
        Transformed turn rates :math:`\\Omega`
    """
    r = mgeo._check_forward_(ctx, np.atleast_1d(states.r))
    v = np.atleast_1d(states.v).astype("d")
    theta = np.atleast_1d(states.theta).astype("d")
    n = r.size
    u, omega, nu, Omega = (np.empty(n) for i in range(4))
    indptr, indices = mgraph.get_csr(g, n)
    status = _original_controls_(
        ctx.alpha, r, v, theta, indptr, indices, pack_parameters(ctx, gains), u, omega, nu, Omega
    )
    _raise_barrier_(status, "from the original plane")
    return u, omega, nu, Omega


def u_original(g, ctx, gains, states, k=None):
    """Linear acceleration control in the original plane"""
    u = original_controls(g, ctx, gains, states)[0]
    return u[k] if k is not None else _squeeze_(u, states.r)


def omega_original(g, ctx, gains, states, k=None):
    """Turn-rate control in the original plane"""
    omega = original_controls(g, ctx, gains, states)[1]
    return omega[k] if k is not None else _squeeze_(omega, states.r)


def u_from_transformed(ctx, state, nu):
    """Original linear acceleration from a transformed state and control"""
    rho = mgeo._check_inverse_(state.rho)
    return apply_kernel(
        _u_from_transformed_, ctx.alpha, rho, np.asarray(state.s, "d"), state.gamma, nu
    )


def omega_from_transformed(ctx, state, Omega):
    """Original turn rate from a transformed state and control"""
    rho = mgeo._check_inverse_(state.rho)
    return apply_kernel(_omega_from_transformed_, rho, np.asarray(state.s, "d"), state.gamma, Omega)


# %% Feasibility


@dataclasses.dataclass(frozen=True, eq=False)
class FeasibilityReport:
    """Feasibility of initial conditions

    Attributes
    ----------
    error: numpy.ndarray
        Moduli of the errors with respect to the image of the desired circle
    speed_error: numpy.ndarray
        Moduli of the transformed speed errors
    inside_boundary: numpy.ndarray
        Whether agents are strictly inside the boundary circle
    positive_speed: numpy.ndarray
        Whether the speeds are positive
    """

    error: np.ndarray
    speed_error: np.ndarray
    inside_boundary: np.ndarray
    positive_speed: np.ndarray
    delta_t: float
    delta_s: float

    @property
    def agents_ok(self):
        return (
            (self.error < self.delta_t)
            & (self.speed_error < self.delta_s)
            & self.inside_boundary
            & self.positive_speed
        )

    @property
    def passed(self):
        return bool(self.agents_ok.all())

    def failures(self):
        """Human readable list of problems"""
        msgs = []
        for k in np.flatnonzero(~self.agents_ok):
            if self.error[k] >= self.delta_t:
                msgs.append(f"agent {k}: |E|={self.error[k]:.4g} >= delta_T={self.delta_t:.4g}")
            if self.speed_error[k] >= self.delta_s:
                msgs.append(
                    f"agent {k}: |s-s_d|={self.speed_error[k]:.4g} >= delta_S={self.delta_s:.4g}"
                )
            if not self.inside_boundary[k]:
                msgs.append(f"agent {k}: outside the boundary circle")
            if not self.positive_speed[k]:
                msgs.append(f"agent {k}: non positive speed")
        return msgs


def feasibility_check(ctx, gains, states):
    """Check initial conditions in the original plane against the barriers

    Parameters
    ----------
    ctx: MobiusContext
    gains: ControllerGains
    states: OriginalState

    Return
    ------
    FeasibilityReport
    """
    r = np.atleast_1d(states.r)
    v = np.atleast_1d(states.v)
    theta = np.atleast_1d(states.theta)
    dfdr = mgeo.forward_derivative(ctx, r)
    error = mgeo.forward_map(ctx, r) + 1j * ctx.sigma * np.exp(1j * (theta + np.angle(dfdr)))
    return FeasibilityReport(
        error=np.abs(error),
        speed_error=np.abs(np.abs(dfdr) * v - gains.s_d),
        inside_boundary=np.abs(r - ctx.pair.lam) < ctx.pair.mu,
        positive_speed=v > 0,
        delta_t=ctx.delta_t,
        delta_s=gains.delta_s,
    )


# %% Lyapunov functions


def _log_barrier_(bound, values):
    gap = bound ** 2 - np.asarray(values) ** 2
    if np.any(gap <= 0):
        raise BarrierViolationError("State outside the barriers")
    return 0.5 * float(np.sum(np.log(bound ** 2 / gap)))


def barrier_potential(ctx, states):
    """Logarithmic barrier of the errors to the image of the desired circle"""
    return _log_barrier_(ctx.delta_t, np.abs(mdyn.error_transformed(ctx, states)))


def speed_potential(gains, states):
    """Logarithmic barrier of the speed errors"""
    return _log_barrier_(gains.delta_s, np.asarray(states.s) - gains.s_d)


def lyapunov_sync(g, ctx, gains, states):
    """Lyapunov function of the synchronization controllers

    Parameters
    ----------
    g: InteractionGraph, None
    ctx: MobiusContext
    gains: ControllerGains
        With a negative coupling gain
    states: TransformedState

    Return
    ------
    float
    """
    check_pattern(gains, patterns.sync)
    upot = mgraph.potential_u(g, states.gamma) if g is not None else 0.0
    return (
        gains.kappa1 * barrier_potential(ctx, states)
        - gains.K * upot
        + speed_potential(gains, states)
    )


def lyapunov_balance(g, ctx, gains, states):
    """Lyapunov function of the balancing controllers

    The graph must be circulant so that the maximum of the phase potential
    is reached at balanced phases.
    """
    check_pattern(gains, patterns.balance)
    if g is None:
        raise mgraph.NotCirculantError("Balancing guarantees require an interaction graph")
    if not g.circulant:
        raise mgraph.NotCirculantError("Balancing guarantees require a circulant graph")
    return (
        gains.kappa1 * barrier_potential(ctx, states)
        + gains.K * (0.5 * g.n * g.lambda_max - mgraph.potential_u(g, states.gamma))
        + speed_potential(gains, states)
    )


def lyapunov(g, ctx, gains, states):
    """Lyapunov function that matches the sign of the coupling gain"""
    if gains.pattern == patterns.sync:
        return lyapunov_sync(g, ctx, gains, states)
    return lyapunov_balance(g, ctx, gains, states)


def lyapunov_rate(g, ctx, gains, states):
    """Analytic time derivative of the closed-loop Lyapunov function"""
    rho = np.atleast_1d(states.rho)
    gamma = np.atleast_1d(states.gamma)
    eg = np.exp(1j * gamma)
    err = np.abs(np.atleast_1d(mdyn.error_transformed(ctx, states)))
    radial = gains.kappa1 * np.real(rho.conj() * eg) / (ctx.delta_t ** 2 - err ** 2)
    coupling = mgraph.neighbor_coupling(g, gamma)
    st = np.atleast_1d(states.s) - gains.s_d
    return -float(np.sum((radial + gains.K / ctx.sigma * coupling) ** 2 + gains.kappa2 * st ** 2))


# %% Bounds


@dataclasses.dataclass(frozen=True)
class BoundEnvelope:
    """A priori bounds of closed-loop trajectories given an initial Lyapunov value"""

    c: float
    ell: float
    eta_plus: float
    eta_minus: float
    V0: float
    error_max: float
    rho_min: float
    rho_max: float
    speed_min: float
    speed_max: float
    edge_sum_min: float
    edge_sum_max: float
    disc_center: float
    disc_radius: float

    def original_speed_bounds(self, ctx, r):
        """Bounds of original plane speeds at positions `r`"""
        scale = 1 / np.abs(mgeo.forward_derivative(ctx, r))
        return self.speed_min * scale, self.speed_max * scale


def bound_envelope(g, ctx, gains, V0, pattern=None):
    """Compute the :class:`BoundEnvelope` of closed-loop trajectories

    Parameters
    ----------
    g: InteractionGraph, None
    ctx: MobiusContext
    gains: ControllerGains
    V0: float
        Initial value of the Lyapunov function
    pattern: None, str, patterns
        Defaults to the pattern of the gains

    Return
    ------
    BoundEnvelope
    """
    if V0 < 0:
        raise ControlError(f"Negative Lyapunov value: {V0}")
    pattern = check_pattern(gains, pattern)
    c = math.sqrt(-math.expm1(-2 * V0 / gains.kappa1))
    ell = math.sqrt(-math.expm1(-2 * V0))
    inner_, outer = ctx.radius_inner, ctx.radius_outer
    eta_plus = (1 - c) * inner_ + c * outer
    eta_minus = (1 + c) * inner_ - c * outer

    if g is None:
        edge_sum_min = edge_sum_max = 0.0
    elif pattern == patterns.sync:
        edge_sum_min = 0.0
        edge_sum_max = min(-2 * V0 / gains.K, 4 * g.nedges)
    else:
        edge_sum_max = g.n * g.lambda_max
        edge_sum_min = max(0.0, edge_sum_max - 2 * V0 / gains.K)

    alpha = ctx.alpha
    return BoundEnvelope(
        c=c,
        ell=ell,
        eta_plus=eta_plus,
        eta_minus=eta_minus,
        V0=V0,
        error_max=ctx.delta_t * c,
        rho_min=min(eta_plus, eta_minus),
        rho_max=max(eta_plus, eta_minus),
        speed_min=gains.s_d - gains.delta_s * ell,
        speed_max=gains.s_d + gains.delta_s * ell,
        edge_sum_min=edge_sum_min,
        edge_sum_max=edge_sum_max,
        disc_center=-(alpha ** 2 - eta_plus ** 2) / (alpha * (1 - eta_plus ** 2)),
        disc_radius=abs(eta_plus * (1 - alpha ** 2) / (alpha * (1 - eta_plus ** 2))),
    )
