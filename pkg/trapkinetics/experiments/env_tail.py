# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tail of the trap depths and the Laplace functional of the rescaled environment.

Each unit builds one environment and counts the sites deeper than m for
m = 1, 2, 4, ..., 1024. The pooled frequencies are checked against the exact
tail P(alpha > m) = m^(-beta) within four standard errors.

Each unit also pairs the rescaled environment W^n with every test function, for
every n of the configuration; the report compares the Monte Carlo estimate of
E[exp(-<W^n|f>)] with the Laplace functional of the limiting Poisson measure.

Outputs: tail.csv, laplace.csv, tail.svg.
"""

import math
import pathlib
from collections.abc import Sequence

import numpy as np

from trapkinetics import common, environment, experiment
from trapkinetics.support import charts, output

THRESHOLDS = tuple(2**k for k in range(11))
SIGMAS = 4.0


class Runner(experiment.Experiment):
    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        env = self.environment(seed)
        exceed = [int(np.count_nonzero(env.alpha > m)) for m in THRESHOLDS]
        pairings = {}
        for n in self.config.n:
            measure = environment.rescaled_measure(self.environment(seed, n), n)
            for f in self.config.functions:
                pairings[(n, f.identifier)] = environment.pair(measure, f)
        payload = {"sites": env.size, "exceed": exceed, "pairings": pairings}
        return experiment.ReplicaResult(index, seed, payload)

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        outcome = experiment.Outcome()
        if not results:
            return outcome
        law = environment.TailLaw(self.config.beta)
        sites = sum(result.payload["sites"] for result in results)
        exceed = np.sum([result.payload["exceed"] for result in results], axis=0)

        tail_rows = []
        empirical, exact = [], []
        for m, count in zip(THRESHOLDS, exceed):
            p = environment.tail_probability(law, m)
            se = math.sqrt(p * (1.0 - p) / sites)
            frequency = count / sites
            ok = abs(frequency - p) <= SIGMAS * se + 1e-12
            outcome.passed += ok
            outcome.failed += not ok
            tail_rows.append([m, frequency, p, se, ok])
            empirical.append(frequency)
            exact.append(p)
        tail_path = directory / "tail.csv"
        output.write_csv(
            tail_path, "depth-tail", ["m", "empirical", "exact", "se", "ok"], tail_rows
        )

        laplace_rows = []
        for n in self.config.n:
            for f in self.config.functions:
                values = [
                    math.exp(-result.payload["pairings"][(n, f.identifier)])
                    for result in results
                ]
                estimate = common.estimate(values)
                limit = environment.laplace_functional_W(f, self.config.beta)
                laplace_rows.append(
                    [n, f.identifier, estimate.mean, estimate.se, limit]
                )
        laplace_path = directory / "laplace.csv"
        output.write_csv(
            laplace_path,
            "laplace-functional",
            ["n", "f_id", "estimate", "se", "limit"],
            laplace_rows,
        )

        chart = charts.line_chart(
            directory / "tail.svg",
            [
                charts.Series("empirical", THRESHOLDS, empirical),
                charts.Series("exact", THRESHOLDS, exact),
            ],
            title=f"P(alpha > m), beta={self.config.beta:g}",
            xlabel="m",
            ylabel="tail",
            logx=True,
            logy=True,
        )
        outcome.files = [str(tail_path), str(laplace_path), str(chart)]
        outcome.summary = {"sites": sites}
        return outcome
