#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Möbius transformation of a nonconcentric circle pair

The desired circle is the unit circle centered at the origin and the boundary
circle of radius :math:`\\mu` is centered at :math:`\\lambda` on the real axis.
The real Möbius map

.. math:: f(z) = \\alpha \\frac{z+\\alpha}{1+\\alpha z}

sends both circles onto circles centered at the origin when :math:`\\alpha`
is one of the two real roots of
:math:`\\lambda\\alpha^2 + (\\lambda^2-\\mu^2+1)\\alpha + \\lambda = 0`.
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
import logging
import dataclasses

import numpy as np
import numba

from . import FlockError
from .misc import IntEnumChoices, DefaultEnumMeta
from .num import NOT_CI, apply_kernel

logger = logging.getLogger(__name__)

#: Absolute tolerance of the singularity and degeneracy guards
TOLERANCE = 1e-12


class GeometryError(FlockError):
    pass


class ConcentricCirclesError(GeometryError):
    pass


class GeometryViolationError(GeometryError):
    pass


class IntersectingCirclesError(GeometryViolationError):
    pass


class DegenerateRootError(GeometryError):
    pass


class SingularityError(GeometryError):
    pass


class root_kinds(IntEnumChoices, metaclass=DefaultEnumMeta):
    """Supported roots of the circle-pair equation"""

    #: Root of smallest modulus, that preserves interiors
    smaller = 0
    #: Root of largest modulus, that swaps interiors and exteriors
    larger = 1


@dataclasses.dataclass(frozen=True)
class CanonicalCirclePair:
    """Desired unit circle at the origin and boundary circle at `lam` of radius `mu`

    Parameters
    ----------
    lam: float
        Real offset of the boundary circle center
    mu: float
        Radius of the boundary circle
    enclosing: bool
        Require the boundary circle to strictly enclose the desired circle.
        When false, any nonconcentric pair is accepted and the admissibility
        is only checked by :func:`solve_alpha`.
    """

    lam: float
    mu: float
    enclosing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))
        if abs(self.lam) < TOLERANCE:
            raise ConcentricCirclesError(
                "Concentric circles: the boundary constraint is already uniform"
            )
        if self.mu <= 0:
            raise GeometryViolationError(f"The boundary radius must be positive: {self.mu}")
        if self.enclosing and self.mu - (1 + abs(self.lam)) <= TOLERANCE:
            raise GeometryViolationError(
                "The boundary circle must enclose the desired circle without touching it: "
                f"mu={self.mu} <= 1+|lambda|={1 + abs(self.lam)}"
            )


@dataclasses.dataclass(frozen=True)
class FrameTransform:
    """Similarity that maps user coordinates to the canonical frame

    A point :math:`z` is sent to :math:`s e^{-i\\varphi}(z + t)`, with
    :math:`t` the `translation`, :math:`\\varphi` the `rotation` and
    :math:`s` the `scale`.
    """

    translation: complex = 0j
    rotation: float = 0.0
    scale: float = 1.0

    @property
    def is_identity(self):
        return self.translation == 0 and self.rotation == 0 and self.scale == 1

    def to_canonical_point(self, z):
        return self.scale * np.exp(-1j * self.rotation) * (np.asarray(z) + self.translation)

    def from_canonical_point(self, w):
        return np.exp(1j * self.rotation) * np.asarray(w) / self.scale - self.translation

    def to_canonical(self, r, v, theta):
        """Convert a position, speed and heading to the canonical frame"""
        return (
            self.to_canonical_point(r),
            np.asarray(v) * self.scale,
            np.asarray(theta) - self.rotation,
        )

    def from_canonical(self, r, v, theta):
        """Convert a position, speed and heading from the canonical frame"""
        return (
            self.from_canonical_point(r),
            np.asarray(v) / self.scale,
            np.asarray(theta) + self.rotation,
        )


def normalize_circles(desired_center, desired_radius, boundary_center, boundary_radius):
    """Normalize a pair of circles to the canonical configuration

    Parameters
    ----------
    desired_center: complex
    desired_radius: float
    boundary_center: complex
    boundary_radius: float

    Return
    ------
    CanonicalCirclePair
    FrameTransform
        Frame that translates the desired center to the origin, rotates the
        center offset onto the positive real axis and scales the desired
        radius to unity.

    Example
    -------
    .. ipython:: python

        @suppress
        from mobius_flock.geometry import normalize_circles
        normalize_circles(1+1j, 2, 2+1j, 2*2.5**0.5)
    """
    if desired_radius <= 0 or boundary_radius <= 0:
        raise GeometryViolationError("Circle radii must be positive")
    offset = complex(boundary_center) - complex(desired_center)
    lam = abs(offset) / desired_radius
    mu = boundary_radius / desired_radius
    if lam < TOLERANCE:
        raise ConcentricCirclesError(
            "Concentric circles: the boundary constraint is already uniform"
        )
    frame = FrameTransform(
        translation=-complex(desired_center),
        rotation=math.atan2(offset.imag, offset.real),
        scale=1.0 / desired_radius,
    )
    return CanonicalCirclePair(lam, mu), frame


def solve_alpha(pair):
    """Get both real roots of the circle-pair equation

    Parameters
    ----------
    pair: CanonicalCirclePair

    Return
    ------
    float
        Smaller root in modulus
    float
        Larger root in modulus, inverse of the smaller one
    """
    lam, mu = pair.lam, pair.mu
    b = lam ** 2 - mu ** 2 + 1
    disc = b ** 2 - 4 * lam ** 2
    if disc <= TOLERANCE:
        raise IntersectingCirclesError(
            f"Touching or intersecting circles: lambda={lam}, mu={mu}"
        )
    # Stable quadratic roots
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    alphas = sorted([q / lam, lam / q], key=abs)
    for alpha in alphas:
        if abs(abs(alpha) - 1) < TOLERANCE:
            raise DegenerateRootError(f"Degenerate root: {alpha}")
    return alphas[0], alphas[1]


def residual(pair, alpha):
    """Residual of the circle-pair equation at `alpha`"""
    return pair.lam * alpha ** 2 + (pair.lam ** 2 - pair.mu ** 2 + 1) * alpha + pair.lam


@dataclasses.dataclass(frozen=True)
class MobiusContext:
    """Circle pair with the chosen root of the Möbius map

    Use :func:`get_mobius_context` to build it.
    """

    pair: CanonicalCirclePair
    alpha: float
    root_kind: root_kinds = root_kinds.smaller

    @property
    def beta(self):
        return 1 / self.alpha

    @property
    def sigma(self):
        """Signed radius of the desired circle image, negative for the larger root"""
        return abs(self.alpha) if self.root_kind == root_kinds.smaller else -abs(self.alpha)

    @property
    def radius_inner(self):
        """Radius of the image of the desired circle"""
        return abs(self.alpha)

    @property
    def radius_outer(self):
        """Radius of the image of the boundary circle"""
        return abs((self.pair.lam + self.alpha) / self.pair.mu)

    @property
    def delta_t(self):
        return delta_t(self)


def get_mobius_context(pair, root=None):
    """Get a :class:`MobiusContext` from a circle pair

    Parameters
    ----------
    pair: CanonicalCirclePair, tuple
        Circle pair or ``(lam, mu)``
    root: None, str, root_kinds
        Root kind, which defaults to the smaller root

    Return
    ------
    MobiusContext
    """
    if not isinstance(pair, CanonicalCirclePair):
        pair = CanonicalCirclePair(*pair)
    kind = root_kinds(root)
    alpha = solve_alpha(pair)[int(kind)]
    if abs(residual(pair, alpha)) > TOLERANCE * max(1.0, alpha ** 2):
        raise DegenerateRootError(f"Inaccurate root {alpha}: residual={residual(pair, alpha)}")
    ctx = MobiusContext(pair, alpha, kind)
    if delta_t(ctx) <= 0:
        raise GeometryViolationError("Degenerate annulus in the transformed plane")
    logger.debug("Möbius context: lambda=%s mu=%s alpha=%s", pair.lam, pair.mu, alpha)
    return ctx


def delta_t(ctx):
    """Width of the annulus between the images of the two circles"""
    if ctx.root_kind == root_kinds.smaller:
        return ctx.radius_outer - ctx.radius_inner
    return ctx.radius_inner - ctx.radius_outer


def rho_interval(ctx):
    """Open interval of admissible moduli of transformed positions

    Positions whose error with respect to the image of the desired circle
    stays below :func:`delta_t` have a modulus within
    :math:`]|\\alpha|-\\delta_T, |\\alpha|+\\delta_T[`.
    """
    return ctx.radius_inner - ctx.delta_t, ctx.radius_inner + ctx.delta_t


# %% Jitted kernels


@numba.njit(cache=NOT_CI)
def _forward_map_(alpha, z):
    return alpha * (z + alpha) / (1.0 + alpha * z)


@numba.njit(cache=NOT_CI)
def _inverse_map_(alpha, w):
    return (alpha * alpha - w) / (alpha * (w - 1.0))


@numba.njit(cache=NOT_CI)
def _forward_derivative_(alpha, z):
    d = 1.0 + alpha * z
    return alpha * (1.0 - alpha * alpha) / (d * d)


@numba.njit(cache=NOT_CI)
def _inverse_derivative_(alpha, w):
    d = w - 1.0
    return (1.0 - alpha * alpha) / (alpha * d * d)


@numba.njit(cache=NOT_CI)
def _chi_(alpha, r):
    d = _forward_derivative_(alpha, r)
    return math.atan2(d.imag, d.real)


@numba.njit(cache=NOT_CI)
def _zeta_(alpha, rho):
    d = _inverse_derivative_(alpha, rho)
    return math.atan2(d.imag, d.real)


@numba.njit(cache=NOT_CI)
def _chi_dot_(alpha, r, v, theta):
    phi = math.atan2(r.imag, r.real)
    return (
        -2.0
        * alpha
        * v
        * (math.sin(theta) + alpha * abs(r) * math.sin(theta - phi))
        / abs(1.0 + alpha * r) ** 2
    )


@numba.njit(cache=NOT_CI)
def _zeta_dot_(rho, s, gamma):
    psi = math.atan2(rho.imag, rho.real)
    return -2.0 * s * (abs(rho) * math.sin(gamma - psi) - math.sin(gamma)) / abs(rho - 1.0) ** 2


# %% Public API


def _check_forward_(ctx, z):
    z = np.asarray(z, dtype="D")
    if np.any(np.abs(1 + ctx.alpha * z) <= TOLERANCE):
        raise SingularityError(f"Position at the pole {-ctx.beta} of the Möbius map")
    return z


def _check_inverse_(w):
    w = np.asarray(w, dtype="D")
    if np.any(np.abs(w - 1) <= TOLERANCE):
        raise SingularityError("Position at the pole 1 of the inverse Möbius map")
    return w


def forward_map(ctx, z):
    """Möbius map from the original to the transformed plane

    Parameters
    ----------
    ctx: MobiusContext
    z: complex, array_like

    Return
    ------
    complex, numpy.ndarray
    """
    return apply_kernel(_forward_map_, ctx.alpha, _check_forward_(ctx, z), otype="D")


def inverse_map(ctx, w):
    """Möbius map from the transformed to the original plane"""
    return apply_kernel(_inverse_map_, ctx.alpha, _check_inverse_(w), otype="D")


def forward_derivative(ctx, z):
    """Complex derivative of :func:`forward_map`"""
    return apply_kernel(_forward_derivative_, ctx.alpha, _check_forward_(ctx, z), otype="D")


def inverse_derivative(ctx, w):
    """Complex derivative of :func:`inverse_map`"""
    return apply_kernel(_inverse_derivative_, ctx.alpha, _check_inverse_(w), otype="D")


def chi(ctx, r):
    """Phase shift of headings from the original to the transformed plane

    It is the argument of :func:`forward_derivative`, in :math:`]-\\pi,\\pi]`.

    See also
    --------
    chi_closed_form
    """
    return apply_kernel(_chi_, ctx.alpha, _check_forward_(ctx, r))


def zeta(ctx, rho):
    """Phase shift of headings from the transformed to the original plane"""
    return apply_kernel(_zeta_, ctx.alpha, _check_inverse_(rho))


def chi_closed_form(ctx, r):
    """Arctangent form of :func:`chi`

    It is only equal to :func:`chi` modulo :math:`2\\pi` where the real
    part of :math:`(1+\\alpha r)^2` is positive.
    """
    a = ctx.alpha
    r = _check_forward_(ctx, r)
    mod, phi = np.abs(r), np.angle(r)
    num = 2 * a * mod * np.sin(phi) + a ** 2 * mod ** 2 * np.sin(2 * phi)
    den = 1 + 2 * a * mod * np.cos(phi) + a ** 2 * mod ** 2 * np.cos(2 * phi)
    return np.angle(a * (1 - a ** 2)) - np.arctan(num / den)


def zeta_closed_form(ctx, rho):
    """Arctangent form of :func:`zeta`, see :func:`chi_closed_form`"""
    a = ctx.alpha
    rho = _check_inverse_(rho)
    mod, psi = np.abs(rho), np.angle(rho)
    num = -2 * mod * np.sin(psi) + mod ** 2 * np.sin(2 * psi)
    den = 1 - 2 * mod * np.cos(psi) + mod ** 2 * np.cos(2 * psi)
    return np.angle((1 - a ** 2) / a) - np.arctan(num / den)


def chi_dot(ctx, r, v, theta):
    """Time derivative of :func:`chi` for an agent at `r` moving at speed `v` along `theta`"""
    r = _check_forward_(ctx, r)
    return apply_kernel(_chi_dot_, ctx.alpha, r, np.asarray(v, "d"), np.asarray(theta, "d"))


def zeta_dot(ctx, rho, s, gamma):
    """Time derivative of :func:`zeta` for an agent at `rho` moving at speed `s` along `gamma`

    It is the exact derivative of the argument of :func:`inverse_derivative`,
    which does not depend on the root.
    """
    rho = _check_inverse_(rho)
    return apply_kernel(_zeta_dot_, rho, np.asarray(s, "d"), np.asarray(gamma, "d"))
