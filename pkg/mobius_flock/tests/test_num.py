# -*- coding: utf-8 -*-
"""
Test the :mod:`mobius_flock.num` module
"""
import math

import pytest
import numpy as np

from mobius_flock import num


def test_num_inner():
    assert num.inner(1 + 2j, 3 - 1j) == 1.0
    assert num.inner(1j, 1.0 + 0j) == 0.0


def test_num_phasor():
    np.testing.assert_allclose(num.phasor(math.pi / 2), 1j, atol=1e-15)


def test_num_apply_kernel():
    out = num.apply_kernel(num.inner, np.array([1 + 1j, 2j]), 1j, otype=float)
    np.testing.assert_allclose(out, [1.0, 2.0])
    assert np.isscalar(num.apply_kernel(num.inner, 1 + 1j, 1j))


@pytest.mark.parametrize(
    "angle,expected",
    [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi / 2, -math.pi / 2)],
)
def test_num_wrap_angle(angle, expected):
    np.testing.assert_allclose(num.wrap_angle(angle), expected, atol=1e-14)


def test_num_angular_spread():
    assert num.angular_spread([1.0, 1.0 + 2 * np.pi, 1.0 - 4 * np.pi]) < 1e-12
    np.testing.assert_allclose(num.angular_spread([-0.1, 0.1]), 0.1, atol=1e-14)
    spreads = num.angular_spread(np.array([[0.0, 0.2], [np.pi - 0.1, -np.pi + 0.1]]))
    np.testing.assert_allclose(spreads, [0.1, 0.1], atol=1e-12)
