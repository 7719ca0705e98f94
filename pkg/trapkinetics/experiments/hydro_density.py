# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Density field of the exclusion process against its mean reference.

Each unit builds one environment per scale n, with the box grown in
proportion to n, and runs `replicas` exclusion processes from product
Binomial(alpha_x, rho0(x/n)) starts up to every observation time t theta_n.
The density pairing <X^n_t|f> is compared with the deterministic reference
<P^n_t rho0 W^n|f>, and split into its martingale and initial-fluctuation
parts. The pairings are also checked against their saturation bounds, and
the frequency pairing against its rewriting through the density pairing,
exactly on every snapshot.

Outputs: fields.csv, decomposition.jsonl, comparison.csv, fields.svg.
"""

import collections
import logging
import math
import pathlib
from collections.abc import Sequence
from typing import Any

import numpy as np

from trapkinetics import common, environment, experiment, fields, harness
from trapkinetics.exclusion_ips import SnapshotSeries
from trapkinetics.support import charts, output

# Standard errors allowed between the ensemble mean and the exact mean.
MEAN_SIGMAS = 3.0
# Relative tolerance of the exact per-snapshot identities.
IDENTITY_TOLERANCE = 1e-9


def _identity_checks(
    ensemble: Sequence[SnapshotSeries],
    env: environment.Environment,
    n: int,
    functions: Sequence[common.TestFunction],
) -> tuple[int, int]:
    passed = failed = 0
    for f in functions:
        values = f(env.scaled_points(n))
        density_bound, frequency_bound = fields.saturation_bounds(env, n, values)
        slack = IDENTITY_TOLERANCE * max(1.0, density_bound, frequency_bound)
        for series in ensemble:
            for snapshot in series.snapshots:
                x = fields.density_pair(snapshot, env, n, values)
                z = fields.frequency_pair(snapshot, env, n, values)
                rewritten = fields.frequency_from_density(snapshot, env, n, values)
                ok = (
                    x <= density_bound + slack
                    and -slack <= z <= frequency_bound + slack
                    and abs(z - rewritten) <= slack
                )
                passed += ok
                failed += not ok
    return passed, failed


class FieldRunner(experiment.Experiment):
    """Runs exclusion ensembles per scale n and compares a pairing to a reference."""

    pairing_name = "X"
    # Whether the reference is the exact mean of the pairing, checked per environment.
    exact_reference = True

    def units(self) -> int:
        return self.config.environments

    def pairing(self, sample: fields.FieldSample) -> float:
        return sample.X

    def reference(
        self,
        env: environment.Environment,
        n: int,
        t: float,
        f: common.TestFunction,
        rng: np.random.Generator,
        context: dict[str, Any],
    ) -> fields.Reference:
        return fields.mean_reference(
            env, self.config.a, n, t, self.config.profile, f, rng
        )

    def scale_context(
        self, env: environment.Environment, n: int, rng: np.random.Generator
    ) -> dict[str, Any]:
        """Quantities shared by the references of one scale, recorded in the output."""
        return {}

    def extra(
        self,
        env: environment.Environment,
        n: int,
        ensemble: Sequence[SnapshotSeries],
        rng: np.random.Generator,
    ) -> dict[str, Any]:
        """Per-scale diagnostics; the density runner adds its decomposition."""
        records = []
        times = fields.observation_times(self.config.times)
        for position, t in enumerate(times):
            if t == 0:
                continue
            at_t = [fields.at_time(series, position) for series in ensemble]
            for f in self.config.functions:
                decomposition = fields.decomposition_diagnostics(
                    at_t, env, n, t, f, self.config.profile, self.config.a, rng
                )
                records.append(decomposition.as_record())
        return {"decomposition": records}

    def run_replica(self, index: int, seed: int) -> experiment.ReplicaResult:
        rng = self.noise(seed)
        times = fields.observation_times(self.config.times)
        samples: list[fields.FieldSample] = []
        references: dict[tuple[int, float, str], tuple[float, str]] = {}
        extras: dict[int, dict[str, Any]] = {}
        passed = failed = 0
        for n in self.config.n:
            env = self.environment(seed, n)
            ensemble = fields.simulate_ensemble(
                env,
                self.config.a,
                n,
                self.config.times,
                self.config.profile,
                self.config.replicas,
                rng,
                self.config.max_events,
            )
            for replica, series in enumerate(ensemble):
                samples.extend(
                    fields.field_samples(
                        series,
                        env,
                        n,
                        times,
                        self.config.functions,
                        index * self.config.replicas + replica,
                    )
                )
            checked = _identity_checks(ensemble, env, n, self.config.functions)
            passed += checked[0]
            failed += checked[1]
            context = self.scale_context(env, n, rng)
            for t in times:
                for f in self.config.functions:
                    reference = self.reference(env, n, t, f, rng, context)
                    references[(n, t, f.identifier)] = (reference.value, reference.mode)
            extras[n] = {**context, **self.extra(env, n, ensemble, rng)}
        payload = {
            "samples": samples,
            "references": references,
            "extras": extras,
            "checks": (passed, failed),
        }
        return experiment.ReplicaResult(index, seed, payload)

    def comparison(
        self, results: Sequence[experiment.ReplicaResult]
    ) -> tuple[list[harness.ComparisonRow], int, int]:
        """Per (n, t, f): the field against the reference, one environment at a time.

        The gap is the mean over environments of the quenched differences; its
        standard error combines the per-environment errors.
        """
        grouped: dict[tuple[int, float, str], list[tuple[common.Estimate, float]]]
        grouped = collections.defaultdict(list)
        for result in results:
            values = collections.defaultdict(list)
            for sample in result.payload["samples"]:
                values[(sample.n, sample.t, sample.f_id)].append(self.pairing(sample))
            for key, pairings in values.items():
                reference, _ = result.payload["references"][key]
                grouped[key].append((common.estimate(pairings), reference))

        ratios = self.variance_ratios(results)
        rows = []
        passed = failed = 0
        for key in sorted(grouped):
            entries = grouped[key]
            differences = [estimate.mean - reference for estimate, reference in entries]
            gap_se = math.sqrt(sum(e.se**2 for e, _ in entries)) / len(entries)
            for estimate, reference in entries:
                if not self.exact_reference:
                    break
                ok = estimate.within(reference, MEAN_SIGMAS, IDENTITY_TOLERANCE)
                passed += ok
                failed += not ok
            n, t, f_id = key
            rows.append(
                harness.ComparisonRow(
                    n=n,
                    t=t,
                    f_id=f_id,
                    field=float(np.mean([e.mean for e, _ in entries])),
                    field_se=gap_se,
                    reference=float(np.mean([r for _, r in entries])),
                    gap=abs(float(np.mean(differences))),
                    gap_se=gap_se,
                    variance_ratio=ratios.get(key, math.nan),
                )
            )
        return rows, passed, failed

    def variance_ratios(
        self, results: Sequence[experiment.ReplicaResult]
    ) -> dict[tuple[int, float, str], float]:
        """Empirical variance of the martingale part over its bound, averaged."""
        ratios = collections.defaultdict(list)
        for result in results:
            for extra in result.payload["extras"].values():
                for record in extra.get("decomposition", []):
                    if record["var_I_bound"] > 0:
                        key = (record["n"], record["t"], record["f_id"])
                        ratios[key].append(record["var_I"] / record["var_I_bound"])
        return {key: float(np.mean(values)) for key, values in ratios.items()}

    def write_extras(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> list[str]:
        records = []
        for result in results:
            for n in sorted(result.payload["extras"]):
                for record in result.payload["extras"][n].get("decomposition", []):
                    records.append({"environment": result.index, **record})
        path = directory / "decomposition.jsonl"
        output.write_json_lines(path, records)
        return [str(path)]

    def finalize(
        self, results: Sequence[experiment.ReplicaResult], directory: pathlib.Path
    ) -> experiment.Outcome:
        outcome = experiment.Outcome()
        if not results:
            return outcome
        samples = sorted(
            (sample for result in results for sample in result.payload["samples"]),
            key=lambda s: (s.n, s.replica, s.t, s.f_id),
        )
        samples_path = directory / "fields.csv"
        fields.write_field_samples(samples_path, samples)

        rows, passed, failed = self.comparison(results)
        comparison_path = harness.write_comparison(directory, rows)
        for result in results:
            passed += result.payload["checks"][0]
            failed += result.payload["checks"][1]

        series = []
        for n in self.config.n:
            for f in self.config.functions:
                selected = [r for r in rows if r.n == n and r.f_id == f.identifier]
                series.append(
                    charts.Series(
                        f"n={n} {f.identifier}",
                        [r.t for r in selected],
                        [r.field for r in selected],
                        [r.field_se for r in selected],
                    )
                )
                series.append(
                    charts.Series(
                        f"n={n} {f.identifier} reference",
                        [r.t for r in selected],
                        [r.reference for r in selected],
                    )
                )
        chart = charts.line_chart(
            directory / "fields.svg",
            series,
            title=f"<{self.pairing_name}^n_t|f> against its reference",
            xlabel="t",
            ylabel=f"<{self.pairing_name}|f>",
        )
        modes = sorted(
            {mode for r in results for _, mode in r.payload["references"].values()}
        )
        spread = {
            f"{n}:{t:g}:{f_id}": float(np.std(values))
            for (n, t, f_id), values in self._reference_values(results).items()
        }
        if "monte-carlo" in modes:
            logging.info("Some references were computed by Monte Carlo")
        outcome.files = [str(samples_path), str(comparison_path), str(chart)]
        outcome.files += self.write_extras(results, directory)
        outcome.passed = passed
        outcome.failed = failed
        outcome.summary = {
            "pairing": self.pairing_name,
            "reference_modes": modes,
            "environments": len(results),
            "reference_spread": spread,
        }
        return outcome

    @staticmethod
    def _reference_values(
        results: Sequence[experiment.ReplicaResult],
    ) -> dict[tuple[int, float, str], list[float]]:
        values = collections.defaultdict(list)
        for result in results:
            for key, (value, _) in result.payload["references"].items():
                values[key].append(value)
        return values


class Runner(FieldRunner):
    pass
