# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.geometry` module
"""
import math

import pytest
import numpy as np
from hypothesis import given, settings, assume, strategies as st

from mobius_flock import geometry

MU = 2.5 ** 0.5

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def circle_pairs(draw):
    lam = draw(st.floats(min_value=0.05, max_value=2.0, **finite))
    gap = draw(st.floats(min_value=0.05, max_value=2.0, **finite))
    return geometry.CanonicalCirclePair(lam, 1 + lam + gap)


positions = st.builds(
    complex,
    st.floats(min_value=-3.0, max_value=3.0, **finite),
    st.floats(min_value=-3.0, max_value=3.0, **finite),
)
angles = st.floats(min_value=-math.pi, max_value=math.pi, **finite)
speeds = st.floats(min_value=0.05, max_value=1.0, **finite)


def test_geometry_solve_alpha_reference():
    pair = geometry.CanonicalCirclePair(0.5, MU)
    small, large = geometry.solve_alpha(pair)
    assert small == pytest.approx(0.5, abs=1e-12)
    assert large == pytest.approx(2.0, abs=1e-12)
    assert abs(geometry.residual(pair, small)) < 1e-12
    assert abs(geometry.residual(pair, large)) < 1e-12


def test_geometry_mobius_context_reference():
    ctx = geometry.get_mobius_context((0.5, MU))
    assert ctx.root_kind == geometry.root_kinds.smaller
    assert ctx.alpha == pytest.approx(0.5)
    assert ctx.beta == pytest.approx(2.0)
    assert ctx.sigma == pytest.approx(0.5)
    assert ctx.radius_inner == pytest.approx(0.5)
    assert ctx.radius_outer == pytest.approx(0.4 ** 0.5)
    assert ctx.delta_t == pytest.approx(0.13246, abs=1e-4)
    assert geometry.delta_t(ctx) == ctx.delta_t
    rho_min, rho_max = geometry.rho_interval(ctx)
    assert rho_min == pytest.approx(0.5 - ctx.delta_t)
    assert rho_max == pytest.approx(0.4 ** 0.5)


def test_geometry_mobius_context_larger_root():
    ctx = geometry.get_mobius_context((0.5, MU), "larger")
    assert ctx.alpha == pytest.approx(2.0)
    assert ctx.sigma == pytest.approx(-2.0)
    assert ctx.radius_outer == pytest.approx(2.5 / MU)
    assert ctx.delta_t == pytest.approx(2.0 - 2.5 / MU)


@pytest.mark.parametrize(
    "lam,mu,error",
    [
        (0.0, 2.0, geometry.ConcentricCirclesError),
        (0.5, 1.5, geometry.GeometryViolationError),
        (0.5, 1.2, geometry.GeometryViolationError),
        (0.5, -2.0, geometry.GeometryViolationError),
    ],
)
def test_geometry_circle_pair_errors(lam, mu, error):
    with pytest.raises(error):
        geometry.CanonicalCirclePair(lam, mu)


def test_geometry_non_enclosing_pairs():
    with pytest.raises(geometry.IntersectingCirclesError):
        geometry.solve_alpha(geometry.CanonicalCirclePair(0.5, 1.0, enclosing=False))
    pair = geometry.CanonicalCirclePair(0.2, 0.5, enclosing=False)
    small, large = geometry.solve_alpha(pair)
    assert small * large == pytest.approx(1.0)
    assert abs(geometry.residual(pair, small)) < 1e-12


def test_geometry_normalize_circles():
    pair, frame = geometry.normalize_circles(1 + 1j, 2.0, 1 + 2j, 2 * MU)
    assert pair.lam == pytest.approx(0.5)
    assert pair.mu == pytest.approx(MU)
    assert frame.rotation == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(frame.to_canonical_point(1 + 1j), 0, atol=1e-15)
    np.testing.assert_allclose(frame.to_canonical_point(1 + 2j), 0.5, atol=1e-15)

    r, v, theta = frame.to_canonical(3 + 1j, 0.4, 0.3)
    np.testing.assert_allclose(r, -1j, atol=1e-15)
    assert v == pytest.approx(0.2)
    assert theta == pytest.approx(0.3 - math.pi / 2)
    rb, vb, thetab = frame.from_canonical(r, v, theta)
    np.testing.assert_allclose([rb, vb, thetab], [3 + 1j, 0.4, 0.3], atol=1e-14)

    pair, frame = geometry.normalize_circles(0, 1, 0.5, MU)
    assert frame.is_identity
    with pytest.raises(geometry.ConcentricCirclesError):
        geometry.normalize_circles(1j, 1, 1j, 2)


def test_geometry_maps_reference():
    ctx = geometry.get_mobius_context((0.5, MU))
    assert geometry.forward_map(ctx, 1.25) == pytest.approx(0.5 * 1.75 / 1.625)
    assert geometry.inverse_map(ctx, 0.5 * 1.75 / 1.625) == pytest.approx(1.25)
    np.testing.assert_allclose(
        geometry.forward_derivative(ctx, 1.25) * geometry.inverse_derivative(
            ctx, geometry.forward_map(ctx, 1.25)
        ),
        1.0,
    )

    circle = np.exp(1j * np.linspace(0, 2 * np.pi, 50))
    np.testing.assert_allclose(np.abs(geometry.forward_map(ctx, circle)), ctx.radius_inner)
    np.testing.assert_allclose(
        np.abs(geometry.forward_map(ctx, 0.5 + MU * circle)), ctx.radius_outer
    )


def test_geometry_singularities():
    ctx = geometry.get_mobius_context((0.5, MU))
    with pytest.raises(geometry.SingularityError):
        geometry.forward_map(ctx, -2.0)
    with pytest.raises(geometry.SingularityError):
        geometry.inverse_map(ctx, 1.0)
    with pytest.raises(geometry.SingularityError):
        geometry.zeta(ctx, [0.5, 1.0])


def test_geometry_closed_forms():
    ctx = geometry.get_mobius_context((0.5, MU))
    r = np.array([0.3 + 0.2j, 1.25, -0.2 - 0.4j])
    np.testing.assert_allclose(geometry.chi_closed_form(ctx, r), geometry.chi(ctx, r), atol=1e-12)
    rho = geometry.forward_map(ctx, r)
    np.testing.assert_allclose(
        geometry.zeta_closed_form(ctx, rho), geometry.zeta(ctx, rho), atol=1e-12
    )


@settings(max_examples=100, deadline=None)
@given(circle_pairs())
def test_geometry_root_product(pair):
    small, large = geometry.solve_alpha(pair)
    assert abs(small) < 1 < abs(large)
    assert small * large == pytest.approx(1.0, abs=1e-12)
    ctx = geometry.get_mobius_context(pair)
    assert ctx.delta_t > 0


@settings(max_examples=100, deadline=None)
@given(circle_pairs(), positions)
def test_geometry_round_trip(pair, z):
    ctx = geometry.get_mobius_context(pair)
    assume(abs(1 + ctx.alpha * z) > 0.1)
    rho = geometry.forward_map(ctx, z)
    assert abs(geometry.inverse_map(ctx, rho) - z) < 1e-12 * max(1.0, abs(z))


@settings(max_examples=100, deadline=None)
@given(circle_pairs(), positions, st.sampled_from(["smaller", "larger"]))
def test_geometry_phase_shifts_cancel(pair, z, root):
    ctx = geometry.get_mobius_context(pair, root)
    assume(abs(1 + ctx.alpha * z) > 0.1)
    shift = geometry.chi(ctx, z) + geometry.zeta(ctx, geometry.forward_map(ctx, z))
    assert abs(np.angle(np.exp(1j * shift))) < 1e-10


@settings(max_examples=100, deadline=None)
@given(circle_pairs(), positions, speeds, angles)
def test_geometry_chi_dot(pair, z, v, theta):
    ctx = geometry.get_mobius_context(pair)
    assume(abs(1 + ctx.alpha * z) > 0.1)
    h = 1e-6
    dz = h * v * np.exp(1j * theta)
    fd = np.angle(np.exp(1j * (geometry.chi(ctx, z + dz) - geometry.chi(ctx, z - dz)))) / (2 * h)
    assert geometry.chi_dot(ctx, z, v, theta) == pytest.approx(fd, abs=1e-6 * max(1, abs(fd)))


@settings(max_examples=100, deadline=None)
@given(circle_pairs(), positions, speeds, angles, st.sampled_from(["smaller", "larger"]))
def test_geometry_zeta_dot(pair, rho, s, gamma, root):
    ctx = geometry.get_mobius_context(pair, root)
    assume(abs(rho - 1) > 0.1)
    h = 1e-6
    drho = h * s * np.exp(1j * gamma)
    fd = np.angle(
        np.exp(1j * (geometry.zeta(ctx, rho + drho) - geometry.zeta(ctx, rho - drho)))
    ) / (2 * h)
    assert geometry.zeta_dot(ctx, rho, s, gamma) == pytest.approx(fd, abs=1e-6 * max(1, abs(fd)))
