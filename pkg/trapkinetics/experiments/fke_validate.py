# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Consistency of the fractional kinetics solvers.

Three checks, all against independent oracles:

- a single Fourier mode 1/2 + delta cos(k x) on a periodic line decays as
  delta E_beta(-D_eff k^2 t^beta) under the L1 solver;
- the subordination Monte Carlo solution agrees with the L1 solution of the
  configured profile at five probe points around the bump, on the box
  [-L/n, L/n]^d with spacing 1/n for the smallest n;
- E[exp(-lambda V_beta^-1(t))] agrees with E_beta(-lambda t^beta) for
  lambda in {0.5, 1, 2}.

D_eff defaults to 1 when the configuration leaves it unset.

Outputs: mode.csv, fke.csv, laplace.csv, mode.svg.
"""

import logging
import math
import pathlib
from collections.abc import Sequence

import numpy as np

from trapkinetics import common, experiment, fractional
from trapkinetics.support import charts, output

MODE_AMPLITUDE = 0.1
# Absolute error allowed on the mode amplitude, from the time and space steps.
MODE_TOLERANCE = 1e-3
SIGMAS = 4.0
# Slack added to the Monte Carlo error bars for the L1 discretization.
DISCRETIZATION_SLACK = 1e-3
LAMBDAS = (0.5, 1.0, 2.0)
PROBE_OFFSETS = (-0.5, -0.25, 0.0, 0.25, 0.5)


class Runner(experiment.Experiment):
    def units(self) -> int:
        return 1

    @property
    def d_eff(self) -> float:
        return self.config.d_eff if self.config.d_eff is not None else 1.0

    @property
    def positive_times(self) -> list[float]:
        return sorted(t for t in self.config.times if t > 0)

    def grid(self, d: int) -> fractional.Grid:
        n = min(self.config.n)
        return fractional.Grid(
            (2 * self.config.L + 1,) * d,
            1.0 / n,
            periodic=True,
            origin=(-self.config.L / n,) * d,
        )

    def solve(self, grid: fractional.Grid, rho0: np.ndarray, t: float) -> np.ndarray:
        steps = self.config.steps
        return fractional.fke_solve_l1(
            grid, self.config.beta, self.d_eff, rho0, t / steps, steps
        )[-1]

    def mode_rows(self) -> list[list[float]]:
        grid = self.grid(1)
        period = grid.shape[0] * grid.spacing
        wavenumber = 2.0 * math.pi / period
        rho0 = 0.5 + MODE_AMPLITUDE * np.cos(wavenumber * grid.nodes[:, 0])
        rows = []
        for t in self.positive_times:
            amplitude = fractional.fourier_mode_amplitude(
                grid, self.solve(grid, rho0, t), wavenumber
            )
            expected = MODE_AMPLITUDE * fractional.mittag_leffler(
                self.config.beta, -self.d_eff * wavenumber**2 * t**self.config.beta
            )
            error = abs(amplitude - expected)
            rows.append([t, amplitude, expected, error, error <= MODE_TOLERANCE])
        return rows

    def probe_points(self) -> np.ndarray:
        d = self.config.d
        bump = self.config.profile.bump
        center = np.zeros(d) if bump is None else np.asarray(bump.center, dtype=float)
        radius = 1.0 if bump is None else bump.radius
        points = np.tile(center, (len(PROBE_OFFSETS), 1))
        points[:, 0] += radius * np.asarray(PROBE_OFFSETS)
        return points

    def solver_rows(self, rng: np.random.Generator) -> list[list[object]]:
        grid = self.grid(self.config.d)
        rho0 = grid.evaluate(self.config.profile)
        points = self.probe_points()
        nearest = [
            int(np.argmin(((grid.nodes - point) ** 2).sum(axis=1)))
            for point in points
        ]
        rows = []
        for t in self.positive_times:
            solution = self.solve(grid, rho0, t)
            for node in nearest:
                x = grid.nodes[node]
                estimate = fractional.fke_subordination(
                    self.config.profile,
                    self.config.beta,
                    self.d_eff,
                    t,
                    x,
                    self.config.samples,
                    rng,
                )
                value = float(solution[node])
                ok = estimate.within(value, SIGMAS, DISCRETIZATION_SLACK)
                rows.append(
                    [t, *x.tolist(), value, estimate.mean, estimate.se, ok]
                )
        return rows

    def laplace_rows(self, rng: np.random.Generator) -> list[list[object]]:
        rows = []
        for t in self.positive_times:
            clock = fractional.sample_inverse_subordinator(
                self.config.beta, t, rng, self.config.samples
            ).values
            for lam in LAMBDAS:
                estimate = common.estimate(np.exp(-lam * clock))
                exact = fractional.laplace_inverse_subordinator(
                    self.config.beta, lam, t
                )
                ok = estimate.within(exact, SIGMAS)
                rows.append([t, lam, estimate.mean, estimate.se, exact, ok])
        return rows

    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        rng = self.noise(seed)
        payload = {
            "mode": self.mode_rows(),
            "solver": self.solver_rows(rng),
            "laplace": self.laplace_rows(rng),
        }
        return experiment.ReplicaResult(index, seed, payload)

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        outcome = experiment.Outcome()
        if not results:
            return outcome
        payload = results[0].payload
        axes = [f"x{axis}" for axis in range(self.config.d)]
        tables = [
            ("mode", "mode-decay", ["t", "amplitude", "expected", "error", "ok"]),
            ("solver", "fke", ["t", *axes, "l1", "mc", "mc_se", "ok"]),
            (
                "laplace",
                "laplace-subordinator",
                ["t", "lambda", "mc", "se", "exact", "ok"],
            ),
        ]
        names = {"mode": "mode.csv", "solver": "fke.csv", "laplace": "laplace.csv"}
        for key, schema, columns in tables:
            path = directory / names[key]
            output.write_csv(path, schema, columns, payload[key])
            outcome.files.append(str(path))
            for row in payload[key]:
                outcome.passed += bool(row[-1])
                outcome.failed += not row[-1]

        mode = payload["mode"]
        chart = charts.line_chart(
            directory / "mode.svg",
            [
                charts.Series("L1", [r[0] for r in mode], [r[1] for r in mode]),
                charts.Series(
                    "delta E_beta", [r[0] for r in mode], [r[2] for r in mode]
                ),
            ],
            title=f"Fourier mode decay, beta={self.config.beta:g}",
            xlabel="t",
            ylabel="amplitude",
            logx=True,
        )
        outcome.files.append(str(chart))
        worst = max((r[3] for r in mode), default=0.0)
        if worst > MODE_TOLERANCE:
            logging.warning("Mode amplitude off by %.3g; refine steps or n", worst)
        outcome.summary = {
            "d_eff": self.d_eff,
            "steps": self.config.steps,
            "spacing": 1.0 / min(self.config.n),
            "worst_mode_error": worst,
        }
        return outcome
