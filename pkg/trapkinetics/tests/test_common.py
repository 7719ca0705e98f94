# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the common value types."""

# pylint: disable=protected-access,missing-docstring

import math

import numpy as np
from absl.testing import absltest, parameterized

from trapkinetics import common


class TestTestFunction(parameterized.TestCase):
    def test_triangle_values(self):
        f = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 0.5)
        np.testing.assert_allclose(f([0.0, 0.25, 0.5, 1.0]), [1.0, 0.5, 0.0, 0.0])

    def test_cosine_values(self):
        f = common.TestFunction(common.BumpKind.COSINE_SQUARED, (1.0, 1.0), 2.0)
        self.assertAlmostEqual(f([1.0, 1.0])[0], 1.0)
        self.assertAlmostEqual(f([2.0, 1.0])[0], 0.5)

    @parameterized.named_parameters(
        ("_1d", 1, 0.5, 0.5),
        ("_2d", 2, 1.0, math.pi / 3),
    )
    def test_triangle_integral(self, d, radius, expected):
        f = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,) * d, radius)
        self.assertAlmostEqual(f.integral(), expected, places=10)

    def test_cosine_integral_1d(self):
        f = common.TestFunction(common.BumpKind.COSINE_SQUARED, (0.0,), 1.0)
        self.assertAlmostEqual(f.integral(), 1.0, places=10)

    def test_identifier(self):
        f = common.TestFunction(common.BumpKind.TRIANGLE, (0.0, 0.5), 0.25)
        self.assertEqual(f.identifier, "triangle@0,0.5/0.25")
        self.assertEqual(f.translated((1.0, 1.0)).center, (1.0, 1.0))

    @parameterized.parameters(0.0, -1.0)
    def test_invalid_radius(self, radius):
        with self.assertRaises(ValueError):
            common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), radius)

    def test_wrong_dimension(self):
        f = common.TestFunction(common.BumpKind.TRIANGLE, (0.0, 0.0), 1.0)
        with self.assertRaises(ValueError):
            f(np.zeros((3, 3)))


class TestProfile(parameterized.TestCase):
    def test_constant(self):
        profile = common.Profile(level=0.3)
        self.assertTrue(profile.is_constant)
        np.testing.assert_allclose(profile(np.zeros((4, 2))), [0.3] * 4)

    def test_bump(self):
        bump = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 1.0)
        profile = common.Profile(level=0.2, amplitude=0.5, bump=bump)
        np.testing.assert_allclose(profile([0.0, 0.5, 2.0]), [0.7, 0.45, 0.2])

    @parameterized.named_parameters(
        ("_above", 0.8, 0.5),
        ("_below", 0.2, -0.5),
        ("_level", 1.5, 0.0),
    )
    def test_out_of_range(self, level, amplitude):
        bump = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 1.0)
        with self.assertRaises(ValueError):
            common.Profile(level=level, amplitude=amplitude, bump=bump)


class TestEstimates(absltest.TestCase):
    def test_estimate(self):
        estimate = common.estimate([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(estimate.mean, 2.5)
        self.assertAlmostEqual(estimate.se, math.sqrt(5.0 / 3.0) / 2.0)
        self.assertEqual(estimate.samples, 4)
        self.assertTrue(estimate.within(3.0, 1.0))
        self.assertFalse(estimate.within(5.0, 1.0))

    def test_single_value(self):
        self.assertEqual(common.estimate([7.0]), common.Estimate(7.0, 0.0, 1))

    def test_empty(self):
        with self.assertRaises(ValueError):
            common.estimate([])

    def test_slope(self):
        x = np.array([1.0, 10.0, 100.0])
        self.assertAlmostEqual(common.fit_loglog_slope(x, 3.0 * x**0.5), 0.5)

    def test_slope_skips_zero(self):
        self.assertAlmostEqual(
            common.fit_loglog_slope([0.0, 1.0, 4.0], [0.0, 1.0, 16.0]), 2.0
        )
        with self.assertRaises(ValueError):
            common.fit_loglog_slope([0.0, 1.0], [0.0, 1.0])

    def test_sphere_area(self):
        self.assertAlmostEqual(common.sphere_area(1), 2.0)
        self.assertAlmostEqual(common.sphere_area(2), 2.0 * math.pi)
        self.assertAlmostEqual(common.sphere_area(3), 4.0 * math.pi)


if __name__ == "__main__":
    absltest.main()
