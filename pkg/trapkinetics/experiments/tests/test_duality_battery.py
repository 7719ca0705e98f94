# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the duality-battery experiment."""

# pylint: disable=protected-access,missing-docstring

import json
import pathlib

import attr
from absl.testing import absltest, parameterized

from trapkinetics import duality, experiment, harness
from trapkinetics.experiments import duality_battery
from trapkinetics.support import config as config_lib


def _config(cases, replicas):
    return config_lib.ExperimentConfig.from_mapping(
        {"kind": "duality-battery", "seed": 5, "cases": cases, "replicas": replicas}
    )


class TestDualityBattery(parameterized.TestCase):
    @parameterized.parameters(
        (7, 3, [(0, 3), (3, 2), (5, 2)]),
        (4, 4, [(0, 1), (1, 1), (2, 1), (3, 1)]),
        (2, 10, [(0, 1), (1, 1)]),
    )
    def test_chunks(self, cases, replicas, expected):
        runner = duality_battery.Runner(_config(cases, replicas))
        self.assertEqual([runner._chunk(i) for i in range(runner.units())], expected)

    def test_run(self):
        directory = pathlib.Path(self.create_tempdir().full_path)
        manifest = harness.run_experiment(_config(6, 4), directory, workers=1)

        self.assertEqual(manifest.files, ["battery.jsonl"])
        self.assertEqual(manifest.passed, 6)
        self.assertEqual(manifest.failed, 0)
        self.assertEqual(manifest.summary["cases"], 6)
        self.assertEqual(manifest.summary["variance_violations"], 0)
        with open(directory / "battery.jsonl", encoding="utf-8") as lines:
            records = [json.loads(line) for line in lines]
        self.assertLen(records, 18)
        variance = [r for r in records if r["relation"] == "variance"]
        self.assertEqual([r["case"] for r in variance], list(range(6)))

    def test_variance_violation_names_its_case(self):
        config = _config(2, 1)
        battery = duality.run_battery(2, config.seed, config.tolerance, first_case=3)
        broken = attr.evolve(battery.variance[1], lhs=battery.variance[1].rhs + 1.0)
        payload = duality.BatteryResult(
            battery.reports, [battery.variance[0], broken]
        )
        directory = pathlib.Path(self.create_tempdir().full_path)
        outcome = duality_battery.Runner(config).finalize(
            [experiment.ReplicaResult(0, 1, payload)], directory
        )
        self.assertEqual(outcome.passed, 1)
        self.assertEqual(outcome.failed, 1)
        with open(directory / "battery.jsonl", encoding="utf-8") as lines:
            records = [json.loads(line) for line in lines]
        (failing,) = [r for r in records if r.get("holds") is False]
        self.assertEqual(failing["case"], 4)

    def test_chunks_do_not_change_cases(self):
        split = pathlib.Path(self.create_tempdir().full_path)
        whole = pathlib.Path(self.create_tempdir().full_path)
        harness.run_experiment(_config(5, 3), split, workers=1)
        harness.run_experiment(_config(5, 1), whole, workers=1)
        self.assertEqual(
            (split / "battery.jsonl").read_text(encoding="utf-8").splitlines()[:10],
            (whole / "battery.jsonl").read_text(encoding="utf-8").splitlines()[:10],
        )


if __name__ == "__main__":
    absltest.main()
