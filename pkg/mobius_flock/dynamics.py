#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Unicycle agents in the original and transformed planes

States hold scalars for a single agent or arrays for a group of agents.
Headings are stored unwrapped.
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
import collections

import numpy as np
import numba

from .misc import Choices
from .num import NOT_CI
from . import geometry as mgeo

DIRECTIONS = Choices(
    {"anticlockwise": "counterclockwise motion", "clockwise": "clockwise motion"},
    parameter="direction",
    description="Sense of rotation along the desired circle",
)

#: Time derivative of a state
StateDerivative = collections.namedtuple("StateDerivative", ["position", "speed", "heading"])


def _as_state_array_(value, dtype):
    value = np.asarray(value, dtype=dtype)
    return value[()] if value.ndim == 0 else value


@dataclasses.dataclass(frozen=True, eq=False)
class OriginalState:
    """State of unicycles in the original plane

    Parameters
    ----------
    r: complex, array_like
        Positions
    v: float, array_like
        Speeds
    theta: float, array_like
        Headings in radians
    """

    r: complex
    v: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "r", _as_state_array_(self.r, "D"))
        object.__setattr__(self, "v", _as_state_array_(self.v, "d"))
        object.__setattr__(self, "theta", _as_state_array_(self.theta, "d"))

    @property
    def phi(self):
        """Polar angle of positions"""
        return np.angle(self.r)

    def __len__(self):
        return np.size(self.r)

    def __getitem__(self, index):
        return OriginalState(
            np.atleast_1d(self.r)[index],
            np.atleast_1d(self.v)[index],
            np.atleast_1d(self.theta)[index],
        )


@dataclasses.dataclass(frozen=True, eq=False)
class TransformedState:
    """State of unicycles in the transformed plane

    Parameters
    ----------
    rho: complex, array_like
        Positions
    s: float, array_like
        Speeds
    gamma: float, array_like
        Headings in radians
    """

    rho: complex
    s: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "rho", _as_state_array_(self.rho, "D"))
        object.__setattr__(self, "s", _as_state_array_(self.s, "d"))
        object.__setattr__(self, "gamma", _as_state_array_(self.gamma, "d"))

    @property
    def psi(self):
        """Polar angle of positions"""
        return np.angle(self.rho)

    def __len__(self):
        return np.size(self.rho)

    def __getitem__(self, index):
        return TransformedState(
            np.atleast_1d(self.rho)[index],
            np.atleast_1d(self.s)[index],
            np.atleast_1d(self.gamma)[index],
        )


@dataclasses.dataclass(frozen=True)
class PhaseOrder:
    """Mean unit phasor of a group"""

    q: complex

    @property
    def magnitude(self):
        return abs(self.q)

    @property
    def resultant_angle(self):
        return math.atan2(self.q.imag, self.q.real)


def original_derivatives(state, u, omega):
    """Unicycle kinematics in the original plane

    Parameters
    ----------
    state: OriginalState
    u: float, array_like
        Linear acceleration
    omega: float, array_like
        Turn rate

    Return
    ------
    StateDerivative
    """
    return StateDerivative(state.v * np.exp(1j * state.theta), np.asarray(u), np.asarray(omega))


def transformed_derivatives(state, nu, Omega):
    """Unicycle kinematics in the transformed plane"""
    return StateDerivative(
        state.s * np.exp(1j * state.gamma), np.asarray(nu), np.asarray(Omega)
    )


@numba.njit(cache=NOT_CI)
def _to_transformed_(alpha, r, v, theta):
    d = mgeo._forward_derivative_(alpha, r)
    return mgeo._forward_map_(alpha, r), abs(d) * v, theta + math.atan2(d.imag, d.real)


@numba.njit(cache=NOT_CI)
def _to_original_(alpha, rho, s, gamma):
    d = mgeo._inverse_derivative_(alpha, rho)
    return mgeo._inverse_map_(alpha, rho), abs(d) * s, gamma + math.atan2(d.imag, d.real)


def to_transformed(ctx, state):
    """Map an :class:`OriginalState` to the transformed plane

    Example
    -------
    .. ipython:: python

        @suppress
        import numpy as np
        from mobius_flock.geometry import get_mobius_context
        from mobius_flock.dynamics import OriginalState, to_transformed
        ctx = get_mobius_context((0.5, 2.5**0.5))
        to_transformed(ctx, OriginalState(1.25, 0.4, np.pi/2))
    """
    d = mgeo.forward_derivative(ctx, state.r)
    return TransformedState(
        rho=mgeo.forward_map(ctx, state.r),
        s=np.abs(d) * state.v,
        gamma=state.theta + np.angle(d),
    )


def to_original(ctx, state):
    """Map a :class:`TransformedState` to the original plane"""
    d = mgeo.inverse_derivative(ctx, state.rho)
    return OriginalState(
        r=mgeo.inverse_map(ctx, state.rho),
        v=np.abs(d) * state.s,
        theta=state.gamma + np.angle(d),
    )


def _sign_(direction):
    return 1 if DIRECTIONS[direction] == "anticlockwise" else -1


@DIRECTIONS.format_function_docstring
def error_original(state, direction="anticlockwise"):
    """Error of agents with respect to the desired unit circle

    It is null for an agent moving along the unit circle in the
    requested direction.

    Parameters
    ----------
    state: OriginalState
    {direction}

    Return
    ------
    complex, numpy.ndarray
    """
    return state.r + _sign_(direction) * 1j * np.exp(1j * state.theta)


def error_transformed(ctx, state, direction="anticlockwise"):
    """Error of agents with respect to the image of the desired circle

    The sense of rotation is the one of the original plane: it is reversed
    by the larger root.
    """
    return state.rho + _sign_(direction) * 1j * ctx.sigma * np.exp(1j * state.gamma)


def phase_order(phases):
    """:class:`PhaseOrder` of raw phases"""
    return PhaseOrder(complex(np.mean(np.exp(1j * np.asarray(phases, "d")))))


def order_parameter(ctx, states):
    """Phase-shifted order parameter of agents in the original plane

    Headings are shifted by :func:`~mobius_flock.geometry.chi` so that the
    result equals the order parameter of the transformed headings.

    Parameters
    ----------
    ctx: MobiusContext
    states: OriginalState

    Return
    ------
    PhaseOrder
    """
    return phase_order(np.atleast_1d(states.theta + mgeo.chi(ctx, states.r)))
