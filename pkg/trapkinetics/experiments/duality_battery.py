# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Randomized battery of exact duality checks on tiny environments.

Every case draws a box of two or three sites with depths between 1 and 3, a
configuration, sites and a time, then checks both duality relations against
the matrix exponential of the full particle generator, and the variance bound
through the dual chains. The cases depend only on the master seed and their
index; `replicas` splits them into contiguous chunks.

A case passes when no relation fails and the variance bound holds; a relation
whose duality function is undefined is counted separately.

Outputs: battery.jsonl.
"""

import pathlib
from collections.abc import Sequence

import attr

from trapkinetics import duality, experiment
from trapkinetics.support import output


class Runner(experiment.Experiment):
    def units(self) -> int:
        return min(self.config.replicas, self.config.cases)

    def _chunk(self, index: int) -> tuple[int, int]:
        size, extra = divmod(self.config.cases, self.units())
        first = index * size + min(index, extra)
        return first, size + (index < extra)

    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        first, count = self._chunk(index)
        result = duality.run_battery(
            count, self.config.seed, self.config.tolerance, first_case=first
        )
        return experiment.ReplicaResult(index, seed, result)

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        reports = [report for r in results for report in r.payload.reports]
        variance = [report for r in results for report in r.payload.variance]
        merged = duality.BatteryResult(reports, variance)
        path = directory / "battery.jsonl"
        output.write_json_lines(
            path,
            [report.as_record() for report in reports]
            + [
                {"relation": "variance", **attr.asdict(report), "holds": report.holds}
                for report in variance
            ],
        )

        failing_cases = {
            report.provenance["case"]
            for report in reports
            if report.status == duality.Status.FAIL
        }
        failing_cases.update(report.case for report in variance if not report.holds)
        cases = sorted({report.provenance["case"] for report in reports})
        outcome = experiment.Outcome(
            files=[str(path)],
            passed=len(cases) - len(failing_cases),
            failed=len(failing_cases),
            summary={
                "cases": len(cases),
                "relations_passed": merged.passed,
                "relations_failed": merged.failed,
                "relations_undefined": merged.undefined,
                "variance_violations": merged.variance_violations,
                "tolerance": self.config.tolerance,
            },
        )
        return outcome
