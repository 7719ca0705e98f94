# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the exact duality checks on enumerable boxes."""

# pylint: disable=protected-access,missing-docstring

import json

import numpy as np
from absl.testing import absltest, parameterized

from trapkinetics import btm_walker, duality, environment, exceptions
from trapkinetics.support import markov, statespace

PAIR = environment.Environment.from_depths([2, 3])
TRIPLE = environment.Environment.from_depths([2, 1, 3])


class TestFullGenerator(parameterized.TestCase):
    def test_block_sizes(self):
        full = duality.build_full_generator(PAIR, 0.0)
        self.assertEqual(full.size, 12)
        self.assertEqual(
            full.block_sizes(), {0: 1, 1: 2, 2: 3, 3: 3, 4: 2, 5: 1}
        )

    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_conserves_particles(self, a):
        full = duality.build_full_generator(TRIPLE, a)
        totals = full.codec.states().sum(axis=1)
        matrix = full.matrix.tocoo()
        for row, column, value in zip(matrix.row, matrix.col, matrix.data):
            if row != column and value:
                self.assertEqual(totals[row], totals[column])
        np.testing.assert_allclose(full.dense().sum(axis=1), 0.0, atol=1e-12)

    def test_full_traps_have_no_exits(self):
        full = duality.build_full_generator(PAIR, 0.5)
        top = full.codec.encode([2, 3])
        self.assertEqual(full.dense()[top, top], 0.0)

    def test_transition_rate(self):
        full = duality.build_full_generator(PAIR, 0.0)
        source = full.codec.encode([1, 1])
        target = full.codec.encode([0, 2])
        self.assertAlmostEqual(full.dense()[source, target], 1.0 / 3.0)

    def test_too_large(self):
        with self.assertRaises(exceptions.StateSpaceTooLarge):
            duality.build_full_generator(TRIPLE, 0.0, limit=10)

    def test_semigroup_defect(self):
        self.assertLess(duality.semigroup_defect(TRIPLE, 0.5, 0.3, 0.7), 1e-10)


class TestDualGenerator(parameterized.TestCase):
    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_single_particle_is_the_walker(self, a):
        dual = duality.build_kparticle_generator(TRIPLE, a, 1)
        self.assertEqual(dual.codec.states, ((0,), (1,), (2,)))
        np.testing.assert_allclose(
            dual.dense(), btm_walker.generator(TRIPLE, a).toarray()
        )

    def test_diagonal_excluded_on_single_slot(self):
        dual = duality.build_kparticle_generator(TRIPLE, 0.0, 2)
        self.assertNotIn((1, 1), dual.codec)
        self.assertIn((0, 0), dual.codec)
        self.assertEqual(dual.size, 8)

    def test_three_particles(self):
        with self.assertRaises(exceptions.InvalidParameter):
            duality.build_kparticle_generator(TRIPLE, 0.0, 3)

    @parameterized.parameters((0.0, 1), (0.5, 2), (1.0, 2))
    def test_reversible(self, a, k):
        self.assertLess(duality.kparticle_reversibility(TRIPLE, a, k), 1e-12)

    def test_weights(self):
        codec = statespace.labeled_positions([2, 3], 2)
        weights = duality.kparticle_weights(PAIR, codec)
        self.assertEqual(weights[codec.encode((0, 0))], 2.0)
        self.assertEqual(weights[codec.encode((0, 1))], 6.0)
        self.assertEqual(weights[codec.encode((1, 1))], 6.0)


class TestRelations(parameterized.TestCase):
    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_one_particle(self, a):
        for x in range(TRIPLE.size):
            report = duality.verify_duality_one(TRIPLE, a, [1, 1, 2], x, 0.8)
            self.assertEqual(report.status, duality.Status.PASS, msg=str(report))

    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_two_particles(self, a):
        full = duality.build_full_generator(TRIPLE, a)
        for x, y in [(0, 0), (0, 1), (2, 2), (1, 2)]:
            report = duality.verify_duality_two(
                TRIPLE, a, [2, 0, 1], x, y, 1.3, full=full
            )
            self.assertTrue(report.passed, msg=str(report))

    def test_time_zero(self):
        report = duality.verify_duality_one(TRIPLE, 0.0, [2, 1, 0], 0, 0.0)
        self.assertAlmostEqual(report.lhs, 2.0)
        self.assertAlmostEqual(report.rhs, 2.0)

    def test_exclusion_of_simple_walkers(self):
        # With unit depths this is the simple exclusion process.
        env = environment.Environment.from_depths([1, 1, 1, 1])
        eta = np.array([1, 0, 1, 0])
        law = markov.transition_matrix(btm_walker.generator(env, 0.0), 0.6)
        expected = law @ eta
        for x in range(env.size):
            self.assertAlmostEqual(
                duality.expected_falling_factorial(env, 0.0, eta, (x,), 0.6),
                expected[x],
            )

    def test_undefined_diagonal(self):
        report = duality.verify_duality_two(TRIPLE, 0.0, [1, 1, 1], 1, 1, 0.5)
        self.assertEqual(report.status, duality.Status.UNDEFINED)
        self.assertFalse(report.passed)
        record = report.as_record()
        self.assertIsNone(record["gap"])
        self.assertEqual(record["status"], "undefined")

    def test_undefined_expectation(self):
        with self.assertRaises(exceptions.UndefinedDuality):
            duality.expected_falling_factorial(TRIPLE, 0.0, [1, 1, 1], (1, 1), 0.5)

    def test_uniformization_agrees(self):
        pade = duality.expected_falling_factorial(TRIPLE, 0.5, [2, 1, 3], (0, 2), 0.9)
        uniform = duality.expected_falling_factorial(
            TRIPLE, 0.5, [2, 1, 3], (0, 2), 0.9, method="uniformization"
        )
        self.assertAlmostEqual(pade, uniform, places=9)

    def test_unknown_method(self):
        with self.assertRaises(exceptions.InvalidParameter):
            duality.expected_falling_factorial(
                TRIPLE, 0.5, [2, 1, 3], (0,), 0.9, method="taylor"
            )

    def test_invalid_configuration(self):
        with self.assertRaises(exceptions.InvalidParameter):
            duality.verify_duality_one(TRIPLE, 0.0, [3, 0, 0], 0, 1.0)

    def test_failing_report(self):
        report = duality._report("one", 1.0, 1.5, 1e-10)
        self.assertEqual(report.status, duality.Status.FAIL)
        self.assertAlmostEqual(report.gap, 0.5)
        self.assertAlmostEqual(report.relative_gap, 1.0 / 3.0)


class TestVarianceBound(parameterized.TestCase):
    @parameterized.parameters(0.0, 0.5, 1.0)
    def test_holds(self, a):
        report = duality.verify_variance_bound(
            TRIPLE, a, [2, 1, 1], np.array([0.3, 1.0, 0.5]), 2, 0.1
        )
        self.assertTrue(report.holds, msg=str(report))
        self.assertGreaterEqual(report.lhs, -1e-12)

    def test_deterministic_start_at_time_zero(self):
        report = duality.verify_variance_bound(
            TRIPLE, 0.0, [2, 1, 1], np.array([0.3, 1.0, 0.5]), 2, 0.0
        )
        self.assertAlmostEqual(report.lhs, 0.0, places=12)
        self.assertAlmostEqual(report.rhs, 0.0, places=12)


class TestBattery(absltest.TestCase):
    def test_cases_are_small(self):
        for case in range(20):
            draw = duality.battery_case(5, case)
            self.assertBetween(draw.env.size, 2, 3)
            self.assertLessEqual(draw.env.alpha.max(), 3)
            self.assertTrue(np.all(draw.eta <= draw.env.alpha))
            self.assertIn(draw.a, (0.0, 0.5, 1.0))
            self.assertGreater(draw.t, 0.0)

    def test_reproducible(self):
        first = duality.battery_case(5, 3)
        second = duality.battery_case(5, 3)
        np.testing.assert_array_equal(first.eta, second.eta)
        self.assertEqual(first.t, second.t)

    def test_battery_passes(self):
        result = duality.run_battery(12, seed=5)
        self.assertLen(result.reports, 24)
        self.assertEqual(result.failed, 0)
        self.assertEqual(result.variance_violations, 0)
        self.assertEqual(result.passed + result.undefined, 24)

    def test_write_json_lines(self):
        result = duality.run_battery(2, seed=7, first_case=4)
        path = self.create_tempfile().full_path
        result.write_json_lines(path)
        with open(path, encoding="utf-8") as lines:
            records = [json.loads(line) for line in lines]
        self.assertLen(records, 4)
        self.assertEqual({record["case"] for record in records}, {4, 5})


if __name__ == "__main__":
    absltest.main()
