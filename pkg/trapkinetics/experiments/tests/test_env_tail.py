# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the env-tail experiment."""

# pylint: disable=protected-access,missing-docstring

import pathlib

from absl.testing import absltest

from trapkinetics import harness
from trapkinetics.experiments import env_tail
from trapkinetics.support import config as config_lib
from trapkinetics.support import output


class TestEnvTail(absltest.TestCase):
    def test_run(self):
        config = config_lib.ExperimentConfig.from_mapping(
            {"kind": "env-tail", "seed": 7, "L": 20, "n": [2, 4], "replicas": 3}
        )
        directory = pathlib.Path(self.create_tempdir().full_path)
        manifest = harness.run_experiment(config, directory, workers=1)

        self.assertEqual(manifest.files, ["laplace.csv", "tail.csv", "tail.svg"])
        self.assertEqual(manifest.passed + manifest.failed, len(env_tail.THRESHOLDS))
        self.assertEqual(manifest.summary["sites"], 3 * 41)

        schema, rows = output.read_csv(directory / "tail.csv")
        self.assertEqual(schema, "depth-tail")
        self.assertEqual([int(row["m"]) for row in rows], list(env_tail.THRESHOLDS))
        self.assertAlmostEqual(float(rows[2]["exact"]), 0.5)

        _, laplace = output.read_csv(directory / "laplace.csv")
        self.assertEqual([int(row["n"]) for row in laplace], [2, 4])
        for row in laplace:
            self.assertBetween(float(row["estimate"]), 0.0, 1.0)
            self.assertBetween(float(row["limit"]), 0.0, 1.0)


if __name__ == "__main__":
    absltest.main()
