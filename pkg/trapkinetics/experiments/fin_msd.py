# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Mean squared displacement of the one-dimensional quasi-diffusion.

Each unit samples a truncated Poisson speed measure on [-half_width,
half_width], builds its birth-death chain and runs `replicas` walkers from
the atom nearest the origin. The annealed curve is fitted with a log-log
slope, to compare with 2 beta / (1 + beta).

The slope passes within 0.1 of the exponent; a curve too short to fit is
reported without a verdict.

Outputs: msd.csv, msd.svg.
"""

import logging
import pathlib
from collections.abc import Sequence

import numpy as np

from trapkinetics import btm_walker, experiment, fractional
from trapkinetics.support import charts

SLOPE_TOLERANCE = 0.1


class Runner(experiment.Experiment):
    def units(self) -> int:
        return self.config.environments

    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        curve = fractional.fin_msd(
            self.config.beta,
            self.config.times,
            1,
            self.config.replicas,
            self.noise(seed),
            self.config.half_width,
            self.config.eps,
        )
        return experiment.ReplicaResult(index, seed, curve)

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        outcome = experiment.Outcome()
        if not results:
            return outcome
        curve = results[0].payload
        if len(results) > 1:
            # Units keep only their mean curve; the error comes from their spread.
            pooled = btm_walker.MsdCurve.from_squares(
                self.config.times,
                [np.atleast_2d(result.payload.mean) for result in results],
            )
            curve = btm_walker.MsdCurve(
                pooled.times,
                pooled.mean,
                pooled.se,
                sum(result.payload.samples for result in results),
            )
        table = directory / "msd.csv"
        curve.write_csv(table)

        exponent = fractional.fin_exponent(self.config.beta)
        summary = {"expected_exponent": exponent, "samples": curve.samples}
        series = []
        positive = curve.times > 0
        try:
            slope = curve.slope()
        except ValueError as error:
            logging.warning("No slope fit for the quasi-diffusion: %s", error)
        else:
            ok = abs(slope - exponent) <= SLOPE_TOLERANCE
            outcome.passed += ok
            outcome.failed += not ok
            summary["slope"] = slope
            anchor = curve.times[positive][0]
            ratio = curve.times[positive] / anchor
            series.append(
                charts.Series(
                    f"t^{exponent:.3g}",
                    curve.times[positive],
                    curve.mean[positive][0] * ratio**exponent,
                )
            )
        series.insert(
            0,
            charts.Series(
                "msd", curve.times[positive], curve.mean[positive], curve.se[positive]
            ),
        )
        chart = charts.line_chart(
            directory / "msd.svg",
            series,
            title=f"quasi-diffusion MSD, beta={self.config.beta:g}",
            xlabel="t",
            ylabel="E Z(t)^2",
            logx=True,
            logy=True,
        )
        outcome.files = [str(table), str(chart)]
        outcome.summary = summary
        return outcome
