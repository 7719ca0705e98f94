# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the single trap walker."""

# pylint: disable=protected-access,missing-docstring

import io
import math
from unittest import mock

import numpy as np
from absl.testing import absltest, parameterized

from trapkinetics import btm_walker, common, environment, exceptions
from trapkinetics.support import markov

RING = environment.Environment.from_depths([2, 5, 3])


class TestRates(parameterized.TestCase):
    @parameterized.named_parameters(
        ("_escape", [4, 1, 1], 0.0, 0.25),
        ("_attraction", [2, 3, 1], 1.0, 3.0),
        ("_symmetric", [4, 9, 1], 0.5, 1.5),
    )
    def test_rate_to_right_neighbour(self, depths, a, expected):
        env = environment.Environment.from_depths(depths)
        rates = dict(btm_walker.btm_rates(env, a, 0))
        self.assertAlmostEqual(rates[1], expected)

    @parameterized.parameters(-0.1, 1.5)
    def test_invalid_a(self, a):
        with self.assertRaises(exceptions.InvalidParameter):
            btm_walker.btm_rates(RING, a, 0)

    @parameterized.parameters(0.0, 0.3, 1.0)
    def test_detailed_balance(self, a):
        env = environment.build_environment(2, 2, environment.TailLaw(0.5), seed=3)
        matrix = btm_walker.generator(env, a)
        markov.check_generator(matrix)
        self.assertLess(markov.reversibility_violation(matrix, env.alpha), 1e-12)


class TestSimulation(parameterized.TestCase):
    def test_zero_horizon(self):
        path = btm_walker.simulate_btm(RING, 0.0, 1, 0.0, np.random.default_rng(0))
        self.assertLen(path, 0)
        self.assertEqual(path.end_site, 1)
        self.assertEqual(path.position_at(0.0), 1)

    def test_negative_horizon(self):
        with self.assertRaises(exceptions.InvalidParameter):
            btm_walker.simulate_btm(RING, 0.0, 1, -1.0, np.random.default_rng(0))

    def test_mean_sojourn(self):
        env = environment.Environment.from_depths([4, 4, 4])
        rng = np.random.default_rng(5)
        holds = [
            btm_walker.simulate_btm(env, 0.0, 0, 200.0, rng).times[0]
            for _ in range(2000)
        ]
        estimate = common.estimate(holds)
        self.assertTrue(estimate.within(2.0, 4.0), msg=str(estimate))

    def test_path_is_nearest_neighbour(self):
        env = environment.build_environment(2, 3, environment.TailLaw(0.5), seed=8)
        path = btm_walker.simulate_btm(
            env, 0.5, env.origin, 50.0, np.random.default_rng(1)
        )
        steps = np.diff(
            np.vstack([np.zeros((1, 2), dtype=np.int64), path.displacements]), axis=0
        )
        np.testing.assert_array_equal(np.abs(steps).sum(axis=1), 1)
        for previous, site in zip(path.visited()[:-1], path.sites):
            self.assertIn(int(site), env.neighbors(int(previous)))
        self.assertAlmostEqual(path.sojourns().sum(), 50.0)

    def test_event_cap(self):
        env = environment.Environment.from_depths([1, 1, 1])
        with self.assertRaises(exceptions.ResourceExhausted) as context:
            btm_walker.simulate_btm(env, 0.0, 0, 1e6, np.random.default_rng(2), 5)
        self.assertLen(context.exception.partial, 5)

    def test_invalid_path(self):
        with self.assertRaises(ValueError):
            btm_walker.WalkerPath(0, 1.0, [0.5, 0.2], [1, 2], [[1], [2]])

    def test_write_csv(self):
        path = btm_walker.simulate_btm(RING, 0.0, 0, 5.0, np.random.default_rng(3))
        buffer = io.StringIO()
        path.write_csv(buffer, RING)
        lines = buffer.getvalue().splitlines()
        self.assertEqual(lines[0], "# trapkinetics:walker-path v1")
        self.assertEqual(lines[1], "time,site,x_1")
        self.assertLen(lines, len(path) + 3)

    def test_law_matches_matrix_exponential(self):
        law = btm_walker.one_particle_law(RING, 0.0, 0, 1.0)
        self.assertAlmostEqual(law.sum(), 1.0)
        replicas = 4000
        sites, _ = btm_walker.sample_positions(
            RING, 0.0, 0, [1.0], np.random.default_rng(7), replicas=replicas
        )
        frequencies = np.bincount(sites[:, 0], minlength=RING.size) / replicas
        se = np.sqrt(law * (1 - law) / replicas)
        np.testing.assert_array_less(np.abs(frequencies - law), 4 * se + 1e-3)

    def test_stationary_law(self):
        weights = RING.alpha / RING.alpha.sum()
        matrix = btm_walker.generator(RING, 0.0)
        moved = markov.expm_action(matrix.T, weights, 3.0)
        np.testing.assert_allclose(moved, weights, atol=1e-12)


class TestClock(parameterized.TestCase):
    def test_unit_depths(self):
        env = environment.Environment.from_depths([1, 1, 1, 1])
        path = btm_walker.simulate_rcm_clock(
            env, 0.0, 0, 10.0, np.random.default_rng(4)
        )
        np.testing.assert_allclose(path.clock, path.times)
        self.assertAlmostEqual(path.end_clock, 10.0)

    def test_event_cap_keeps_clock_path(self):
        with self.assertRaises(exceptions.ResourceExhausted) as context:
            btm_walker.simulate_rcm_clock(
                RING, 0.5, 0, 1e6, np.random.default_rng(2), max_events=5
            )
        partial = context.exception.partial
        self.assertIsInstance(partial, btm_walker.ClockPath)
        self.assertLen(partial.times, 5)
        self.assertLen(partial.clock, 5)
        self.assertEqual(partial.horizon, partial.times[-1])
        self.assertEqual(partial.displacements.shape, (5, 1))

    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_clock_is_integral(self, a):
        path = btm_walker.simulate_rcm_clock(RING, a, 0, 20.0, np.random.default_rng(6))
        np.testing.assert_allclose(path.clock, path.reintegrate(RING))

    def test_time_change_round_trip(self):
        path = btm_walker.simulate_btm(RING, 0.3, 2, 15.0, np.random.default_rng(9))
        clock = btm_walker.clock_from_walker(path, RING)
        back = btm_walker.time_change(clock)
        np.testing.assert_allclose(back.times, path.times)
        np.testing.assert_array_equal(back.sites, path.sites)
        self.assertAlmostEqual(back.horizon, path.horizon)

    def test_sojourns_scale_with_depth(self):
        path = btm_walker.simulate_btm(RING, 0.0, 0, 15.0, np.random.default_rng(10))
        clock = btm_walker.clock_from_walker(path, RING)
        y_holds = np.diff(np.concatenate([[0.0], clock.times, [clock.horizon]]))
        np.testing.assert_allclose(
            y_holds * RING.alpha[path.visited()], path.sojourns()
        )


class TestSemigroup(parameterized.TestCase):
    def test_time_zero(self):
        g = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 2.0)
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        estimate = btm_walker.estimate_semigroup(
            env, 0.0, 2, 0.0, g, 3, 10, np.random.default_rng(0)
        )
        self.assertEqual(estimate.se, 0.0)
        self.assertAlmostEqual(estimate.mean, float(g(env.scaled_points(2)[3])[0]))

    def test_constant(self):
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        estimate = btm_walker.estimate_semigroup(
            env, 0.5, 2, 0.3, np.ones(5), 0, 50, np.random.default_rng(0)
        )
        self.assertEqual(estimate.mean, 1.0)

    def test_forward_initial_and_constant(self):
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        values = np.array([0.1, 0.4, 0.2, 0.9, 0.5])
        result = btm_walker.solve_one_particle_forward(env, 0.0, 2, [0.0, 0.5], values)
        np.testing.assert_array_equal(result[0], values)
        flat = btm_walker.solve_one_particle_forward(
            env, 0.0, 2, [0.5], np.full(5, 0.3)
        )
        np.testing.assert_allclose(flat[0], 0.3, atol=1e-12)

    @parameterized.parameters("explicit", "implicit")
    def test_forward_matches_exponential(self, solver):
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        values = np.array([0.1, 0.4, 0.2, 0.9, 0.5])
        law = markov.transition_matrix(btm_walker.generator(env, 0.5), 2.0)
        expected = law @ values
        (result,) = btm_walker.solve_one_particle_forward(
            env, 0.5, 1, [2.0], values, solver=solver, scaled=False
        )
        np.testing.assert_allclose(result, expected, atol=1e-6)

    def test_forward_against_monte_carlo(self):
        env = environment.build_environment(1, 10, environment.TailLaw(0.5), seed=2)
        g = common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 0.5)
        t, n = 0.2, 4
        (exact,) = btm_walker.solve_one_particle_forward(env, 0.0, n, [t], g)
        estimate = btm_walker.estimate_semigroup(
            env, 0.0, n, t, g, env.origin, 3000, np.random.default_rng(12)
        )
        self.assertTrue(
            estimate.within(exact[env.origin], 4.0, 1e-9), msg=str(estimate)
        )

    def test_forward_limits(self):
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        with self.assertRaises(exceptions.StateSpaceTooLarge):
            btm_walker.solve_one_particle_forward(
                env, 0.0, 2, [1.0], np.ones(5), max_sites=4
            )
        with self.assertRaises(exceptions.StiffnessFailure):
            btm_walker.solve_one_particle_forward(
                env, 0.0, 1, [1e3], np.ones(5), budget=10, scaled=False
            )
        with self.assertRaises(exceptions.InvalidParameter):
            btm_walker.solve_one_particle_forward(
                env, 0.0, 2, [1.0], np.ones(5), solver="rk4"
            )

    @parameterized.named_parameters(("_rounding", 1e-12, False), ("_drift", 1e-3, True))
    def test_forward_excursion(self, offset, fails):
        env = environment.Environment.from_depths([2, 5, 3, 4, 2])
        values = np.array([0.1, 0.4, 0.2, 0.9, 0.5])
        with mock.patch.object(
            btm_walker.markov, "expm_action", return_value=values + offset
        ):
            if fails:
                with self.assertRaises(exceptions.NumericalFailure):
                    btm_walker.solve_one_particle_forward(
                        env, 0.5, 1, [1.0], values, scaled=False
                    )
            else:
                (result,) = btm_walker.solve_one_particle_forward(
                    env, 0.5, 1, [1.0], values, scaled=False
                )
                self.assertLessEqual(result.max(), 0.9)

    def test_boundary_mass(self):
        env = environment.Environment.from_depths([2, 3, 2, 5, 2, 3, 4, 2, 3])
        self.assertEqual(env.L, 4)
        self.assertAlmostEqual(btm_walker.boundary_mass(env, 0.0, env.origin, 0.0), 0.0)
        outside = np.abs(env.coordinates[:, 0]) > 2.0
        stationary = env.alpha[outside].sum() / env.alpha.sum()
        self.assertAlmostEqual(
            btm_walker.boundary_mass(env, 0.0, env.origin, 500.0), stationary, places=6
        )


class TestMsd(parameterized.TestCase):
    def test_simple_walk(self):
        env = environment.Environment.from_depths(np.ones(201, dtype=int))
        curve = btm_walker.msd_curve(
            [env], 0.0, [4.0, 0.0, 1.0], 2000, np.random.default_rng(13)
        )
        np.testing.assert_array_equal(curve.times, [4.0, 0.0, 1.0])
        self.assertEqual(curve.mean[1], 0.0)
        np.testing.assert_array_less(
            np.abs(curve.mean - [8.0, 0.0, 2.0]), 4 * curve.se + 1e-9
        )
        self.assertEqual(curve.samples, 2000)

    def test_from_squares(self):
        one = btm_walker.MsdCurve.from_squares([1.0], [np.array([[1.0], [3.0]])])
        self.assertEqual(one.mean[0], 2.0)
        self.assertAlmostEqual(one.se[0], 1.0)
        pooled = btm_walker.MsdCurve.from_squares(
            [1.0], [np.array([[1.0], [3.0]]), np.array([[6.0], [6.0]])]
        )
        self.assertEqual(pooled.mean[0], 4.0)
        self.assertAlmostEqual(pooled.se[0], 2.0)
        self.assertEqual(pooled.samples, 4)

    def test_diffusivity(self):
        times = np.array([1.0, 10.0, 100.0])
        mean = 2 * 2 * 0.7 * times**0.5 / math.gamma(1.5)
        curve = btm_walker.MsdCurve(times, mean, np.zeros(3))
        self.assertAlmostEqual(btm_walker.estimate_diffusivity(curve, 0.5, 2), 0.7)
        self.assertAlmostEqual(curve.slope(), 0.5)

    def test_diffusivity_needs_positive_times(self):
        curve = btm_walker.MsdCurve([0.0], [0.0], [0.0])
        with self.assertRaises(exceptions.InvalidParameter):
            btm_walker.estimate_diffusivity(curve, 0.5, 1)

    def test_no_environments(self):
        with self.assertRaises(exceptions.InvalidParameter):
            btm_walker.msd_curve([], 0.0, [1.0], 1, np.random.default_rng(0))


if __name__ == "__main__":
    absltest.main()
