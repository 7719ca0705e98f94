# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Frequency field of the exclusion process against its limiting profile.

Runs the same ensembles as hydro-density and compares the frequency pairing
<Z^n_t|f> with the Riemann sum of the limiting profile: in d = 1 the
quasi-diffusion with speed measure W^n, in d >= 2 the fractional kinetics
equation solved on the lattice nodes.

The fractional kinetics equation needs the effective diffusivity D_eff. When
the configuration leaves it unset, every environment estimates it from `samples`
walkers observed at t theta_n, with displacements rescaled by 1/n.

The reference is a limit, so the comparison is recorded without a verdict;
the exact per-snapshot identities are still checked.

Outputs: fields.csv, comparison.csv, fields.svg, and d_eff.jsonl in d >= 2.
"""

import logging
import pathlib
from collections.abc import Sequence
from typing import Any

import numpy as np

from trapkinetics import btm_walker, common, environment, experiment, fields
from trapkinetics.exclusion_ips import SnapshotSeries
from trapkinetics.experiments import hydro_density
from trapkinetics.support import output


class Runner(hydro_density.FieldRunner):
    pairing_name = "Z"
    exact_reference = False

    def pairing(self, sample: fields.FieldSample) -> float:
        return sample.Z

    def estimate_d_eff(
        self, env: environment.Environment, n: int, rng: np.random.Generator
    ) -> float:
        """Walker estimate of D_eff in MSD = 2 d D_eff t^beta / Gamma(1 + beta)."""
        times = [t for t in fields.observation_times(self.config.times) if t > 0]
        scale = fields.theta_n(n, env.d, env.beta)
        _, displacement = btm_walker.sample_positions(
            env,
            self.config.a,
            env.origin,
            [t * scale for t in times],
            rng,
            self.config.max_events,
            self.config.samples,
        )
        squares = (displacement.astype(float) ** 2).sum(axis=2) / float(n) ** 2
        curve = btm_walker.MsdCurve.from_squares(times, [squares])
        return btm_walker.estimate_diffusivity(curve, env.beta, env.d)

    def scale_context(
        self, env: environment.Environment, n: int, rng: np.random.Generator
    ) -> dict[str, Any]:
        if env.d == 1:
            return {}
        if self.config.d_eff is not None:
            return {"d_eff": self.config.d_eff, "d_eff_source": "config"}
        d_eff = self.estimate_d_eff(env, n, rng)
        logging.info("Walker estimate of D_eff at n=%d: %.4g", n, d_eff)
        return {"d_eff": d_eff, "d_eff_source": "walkers"}

    def reference(
        self,
        env: environment.Environment,
        n: int,
        t: float,
        f: common.TestFunction,
        rng: np.random.Generator,
        context: dict[str, Any],
    ) -> fields.Reference:
        return fields.frequency_reference(
            env,
            n,
            t,
            self.config.profile,
            f,
            context.get("d_eff", 1.0),
            self.config.steps,
            rng,
        )

    def extra(
        self,
        env: environment.Environment,
        n: int,
        ensemble: Sequence[SnapshotSeries],
        rng: np.random.Generator,
    ) -> dict[str, Any]:
        return {}

    def write_extras(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> list[str]:
        records = [
            {"environment": result.index, "n": n, **extra}
            for result in results
            for n, extra in sorted(result.payload["extras"].items())
            if extra
        ]
        if not records:
            return []
        path = directory / "d_eff.jsonl"
        output.write_json_lines(path, records)
        return [str(path)]
