"""
Low level numeric utilities

The numerical inputs and outputs of all these routines are of scalar
or numpy.ndarray type.
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
import os
import math

import numpy as np
import numba

NOT_CI = os.environ.get("CI", "false") == "false"


@numba.njit(cache=NOT_CI)
def inner(z1, z2):
    """Real inner product of two complex numbers

    Parameters
    ----------
    z1: complex
    z2: complex

    Return
    ------
    float
        :math:`\\Re(\\bar{z}_1 z_2)`
    """
    return z1.real * z2.real + z1.imag * z2.imag


@numba.njit(cache=NOT_CI)
def phasor(angle):
    """Unit complex number of argument `angle`"""
    return complex(math.cos(angle), math.sin(angle))


def apply_kernel(kernel, *args, otype=float):
    """Apply a scalar jitted kernel element-wise over broadcasted arguments

    Parameters
    ----------
    kernel: callable
        Scalar function, typically decorated with :func:`numba.njit`
    args:
        Scalars or arrays that are broadcasted against each other
    otype: type
        Output type

    Return
    ------
    scalar, numpy.ndarray
        A scalar when all arguments are scalars
    """
    out = np.vectorize(kernel, otypes=[otype])(*args)
    if out.ndim == 0:
        return out[()]
    return out


def wrap_angle(angle):
    """Wrap angles to the :math:`]-\\pi,\\pi]` interval"""
    return -np.remainder(np.pi - np.asarray(angle), 2 * np.pi) + np.pi


def angular_spread(angles, axis=-1):
    """Largest angular distance of angles to their circular mean

    Parameters
    ----------
    angles: array_like
        Angles in radians, possibly unwrapped
    axis: int
        Axis along which the spread is computed

    Return
    ------
    float, numpy.ndarray
        Spread in radians, in :math:`[0,\\pi]`
    """
    angles = np.asarray(angles, dtype="d")
    mean = np.angle(np.exp(1j * angles).mean(axis=axis, keepdims=True))
    return np.abs(wrap_angle(angles - mean)).max(axis=axis)
