# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for finite Markov semigroups."""

# pylint: disable=protected-access,missing-docstring

import math

import numpy as np
from absl.testing import absltest, parameterized

from trapkinetics import exceptions
from trapkinetics.support import markov

# Two-state chain 0 -> 1 at rate 2, 1 -> 0 at rate 1.
TWO_STATE = markov.from_rates(2, [0, 1], [1, 0], [2.0, 1.0])


class TestGenerators(parameterized.TestCase):
    def test_from_rates(self):
        np.testing.assert_allclose(TWO_STATE.toarray(), [[-2.0, 2.0], [1.0, -1.0]])

    def test_duplicates_summed(self):
        matrix = markov.from_rates(2, [0, 0, 1], [1, 1, 1], [1.0, 0.5, 3.0])
        np.testing.assert_allclose(matrix.toarray(), [[-1.5, 1.5], [0.0, 0.0]])

    def test_check_generator(self):
        markov.check_generator(TWO_STATE)
        with self.assertRaises(ValueError):
            markov.check_generator(np.array([[-1.0, 2.0], [1.0, -1.0]]))
        with self.assertRaises(ValueError):
            markov.check_generator(np.array([[1.0, -1.0], [0.0, 0.0]]))
        with self.assertRaises(ValueError):
            markov.check_generator(np.zeros((2, 3)))

    def test_exit_rate(self):
        self.assertEqual(markov.exit_rate(TWO_STATE), 2.0)
        self.assertEqual(markov.exit_rate(np.zeros((2, 2))), 0.0)


class TestSemigroups(parameterized.TestCase):
    @parameterized.parameters(0.0, 0.1, 1.0, 5.0)
    def test_two_state(self, t):
        stay = (1.0 + 2.0 * math.exp(-3.0 * t)) / 3.0
        back = (1.0 - math.exp(-3.0 * t)) / 3.0
        expected = np.array([[stay, 1.0 - stay], [back, 1.0 - back]])
        np.testing.assert_allclose(markov.transition_matrix(TWO_STATE, t), expected)
        np.testing.assert_allclose(
            markov.uniformized_matrix(TWO_STATE, t), expected, atol=1e-12
        )
        np.testing.assert_allclose(
            markov.expm_action(TWO_STATE, [1.0, 0.0], t), expected[:, 0], atol=1e-12
        )

    def test_adjoint(self):
        law = markov.uniformized_action(TWO_STATE, [1.0, 0.0], 0.7, adjoint=True)
        expected = markov.transition_matrix(TWO_STATE, 0.7)[0]
        np.testing.assert_allclose(law, expected, atol=1e-12)

    def test_large_mean_skips_leading_terms(self):
        first, weights = markov.uniformization_terms(10.0, 20.0, 1e-14)
        self.assertGreater(first, 0)
        self.assertAlmostEqual(weights.sum(), 1.0, places=12)
        self.assertEqual(markov.uniformization_terms(1.0, 0.0, 1e-14)[0], 0)

    def test_long_horizon(self):
        values = markov.uniformized_action(TWO_STATE, [1.0, 0.0], 30.0)
        np.testing.assert_allclose(values, [1.0 / 3.0, 1.0 / 3.0], atol=1e-12)

    def test_budget(self):
        with self.assertRaises(exceptions.StiffnessFailure):
            markov.uniformized_action(TWO_STATE, [1.0, 0.0], 1e4, budget=100)

    def test_semigroup_defect(self):
        self.assertLess(markov.semigroup_defect(TWO_STATE, 0.4, 1.1), 1e-12)

    def test_reversibility(self):
        self.assertLess(markov.reversibility_violation(TWO_STATE, [1.0, 2.0]), 1e-15)
        self.assertAlmostEqual(
            markov.reversibility_violation(TWO_STATE, [1.0, 1.0]), 0.5
        )
        self.assertEqual(markov.reversibility_violation(np.zeros((2, 2)), [1, 1]), 0.0)


if __name__ == "__main__":
    absltest.main()
