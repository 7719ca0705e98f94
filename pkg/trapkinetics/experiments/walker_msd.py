# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Mean squared displacement of the trap walker.

Each unit builds one environment and runs `replicas` walkers from the origin,
observed at the configured times, which are read as physical walker times.
The annealed curve is fitted with a log-log slope, to compare with beta in
d >= 2 and 2 beta / (1 + beta) in d = 1, and with the diffusivity D in
MSD = 2 d D t^beta / Gamma(1 + beta).

Every unit reports the walker mass outside half the box at the last time
when the box is small enough for the forward solver.

Outputs: msd.csv, msd.svg.
"""

import logging
import pathlib
from collections.abc import Sequence

import numpy as np

from trapkinetics import btm_walker, exceptions, experiment, fractional
from trapkinetics.support import charts


def expected_exponent(d: int, beta: float) -> float:
    return fractional.fin_exponent(beta) if d == 1 else beta


class Runner(experiment.Experiment):
    def units(self) -> int:
        return self.config.environments

    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        env = self.environment(seed)
        times = list(self.config.times)
        _, displacement = btm_walker.sample_positions(
            env,
            self.config.a,
            env.origin,
            times,
            self.noise(seed),
            self.config.max_events,
            self.config.replicas,
        )
        squares = (displacement.astype(float) ** 2).sum(axis=2)
        diagnostics = {}
        try:
            diagnostics["boundary_mass"] = btm_walker.boundary_mass(
                env, self.config.a, env.origin, times[-1], self.config.solver
            )
        except (exceptions.StateSpaceTooLarge, exceptions.NumericalFailure) as error:
            logging.info("No boundary diagnostic for unit %d: %s", index, error)
        return experiment.ReplicaResult(index, seed, squares, diagnostics=diagnostics)

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        outcome = experiment.Outcome()
        if not results:
            return outcome
        curve = btm_walker.MsdCurve.from_squares(
            self.config.times, [result.payload for result in results]
        )
        table = directory / "msd.csv"
        curve.write_csv(table)

        exponent = expected_exponent(self.config.d, self.config.beta)
        positive = curve.times > 0
        summary = {"expected_exponent": exponent}
        try:
            slope = curve.slope()
            summary["slope"] = slope
            summary["diffusivity"] = btm_walker.estimate_diffusivity(
                curve, self.config.beta, self.config.d
            )
        except (ValueError, exceptions.InvalidParameter) as error:
            logging.warning("No slope fit for the walker curve: %s", error)
            slope = None

        series = [
            charts.Series(
                "msd", curve.times[positive], curve.mean[positive], curve.se[positive]
            )
        ]
        if slope is not None and positive.any():
            anchor = curve.times[positive][0]
            reference = curve.mean[positive][0] * (
                curve.times[positive] / anchor
            ) ** exponent
            series.append(
                charts.Series(f"t^{exponent:.3g}", curve.times[positive], reference)
            )
        chart = charts.line_chart(
            directory / "msd.svg",
            series,
            title=f"walker MSD, d={self.config.d} beta={self.config.beta:g}",
            xlabel="t",
            ylabel="E|X_t|^2",
            logx=True,
            logy=True,
        )
        summary["samples"] = curve.samples
        summary["final_msd"] = float(np.asarray(curve.mean)[-1])
        outcome.files = [str(table), str(chart)]
        outcome.summary = summary
        return outcome
