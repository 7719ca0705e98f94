#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Utility to simulate trap models and their exclusion processes."""

import argparse
import logging
import pathlib
import sys

from trapkinetics import (
    btm_walker,
    common,
    duality,
    environment,
    exceptions,
    exclusion_ips,
    experiment,
    fields,
    fractional,
    harness,
)
from trapkinetics.support import config as config_lib
from trapkinetics.support import output, streams

DEFAULT_SEED = 1


def _model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--d", action="store", type=int, default=1, help="Lattice dimension."
    )
    parser.add_argument(
        "--beta",
        action="store",
        type=float,
        default=0.5,
        help="Tail index of the trap depths, in (0, 1).",
    )
    parser.add_argument(
        "--L",
        action="store",
        type=int,
        default=20,
        help="Half-width of the box; every axis has 2L+1 sites.",
    )


def _dynamics_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--a",
        action="store",
        type=float,
        default=0.0,
        help="Symmetrization exponent of the jump rates, in [0, 1].",
    )
    parser.add_argument(
        "--times",
        action="store",
        type=float,
        nargs="+",
        default=[0.0, 1.0],
        help="Observation times.",
    )
    parser.add_argument(
        "--replicas",
        action="store",
        type=int,
        default=10,
        help="Number of independent runs.",
    )


def _print_csv(schema: str, header, rows) -> None:
    output.write_csv(sys.stdout, schema, header, rows)


def main(argv=None):
    if sys.version_info < (3, 11):
        raise Exception("Unsupported Python version, please use at least Python 3.11")

    parser = argparse.ArgumentParser()
    subparsers = parser.add_subparsers(dest="action")

    parser.add_argument(
        "--vlog",
        action="store",
        required=False,
        type=int,
        help=(
            "Python logging level. See the levels at "
            "https://docs.python.org/3/library/logging.html#logging-levels"
        ),
    )
    parser.add_argument(
        "--seed",
        action="store",
        required=False,
        type=int,
        help="Master seed; overrides the seed of a configuration file.",
    )

    parser_env = subparsers.add_parser(
        "env", help="Sample an environment and describe its trap depths."
    )
    _model_arguments(parser_env)
    parser_env.add_argument(
        "--n",
        action="store",
        type=int,
        help="Print the rescaled measure W^n as CSV instead of the summary.",
    )
    parser_env.add_argument(
        "--save", action="store", help="Write the environment as JSON to this path."
    )

    parser_walk = subparsers.add_parser(
        "walk", help="Mean squared displacement of trap walkers from the origin."
    )
    _model_arguments(parser_walk)
    _dynamics_arguments(parser_walk)

    parser_ips = subparsers.add_parser(
        "ips", help="Run the exclusion process from a constant density profile."
    )
    _model_arguments(parser_ips)
    _dynamics_arguments(parser_ips)
    parser_ips.add_argument(
        "--density",
        action="store",
        type=float,
        default=0.5,
        help="Initial density: every site holds Binomial(alpha_x, density).",
    )

    parser_duality = subparsers.add_parser(
        "duality", help="Run the randomized duality battery on tiny environments."
    )
    parser_duality.add_argument(
        "--cases", action="store", type=int, default=duality.BATTERY_CASES
    )
    parser_duality.add_argument(
        "--tolerance", action="store", type=float, default=duality.DEFAULT_TOLERANCE
    )
    parser_duality.add_argument(
        "--save", action="store", help="Write every report as JSON lines to this path."
    )

    parser_fields = subparsers.add_parser(
        "fields", help="Density and frequency pairings at macroscopic times."
    )
    _model_arguments(parser_fields)
    _dynamics_arguments(parser_fields)
    parser_fields.add_argument(
        "--n", action="store", type=int, default=10, help="Scale parameter."
    )
    parser_fields.add_argument(
        "--density", action="store", type=float, default=0.5, help="Initial density."
    )

    parser_fke = subparsers.add_parser(
        "fke",
        help=(
            "Solve the fractional kinetics equation for a triangle bump at the "
            "origin, by subordination at a point."
        ),
    )
    parser_fke.add_argument("--beta", action="store", type=float, default=0.5)
    parser_fke.add_argument("--D-eff", dest="d_eff", type=float, default=1.0)
    parser_fke.add_argument("--times", type=float, nargs="+", default=[1.0])
    parser_fke.add_argument(
        "--x", type=float, nargs="+", default=[0.0], help="Evaluation point."
    )
    parser_fke.add_argument("--samples", type=int, default=10000)

    parser_fin = subparsers.add_parser(
        "fin", help="Mean squared displacement of the one-dimensional quasi-diffusion."
    )
    parser_fin.add_argument("--beta", action="store", type=float, default=0.5)
    parser_fin.add_argument("--times", type=float, nargs="+", default=[10.0, 100.0])
    parser_fin.add_argument("--environments", type=int, default=4)
    parser_fin.add_argument("--replicas", type=int, default=50)
    parser_fin.add_argument("--half-width", type=float, default=50.0)
    parser_fin.add_argument("--eps", type=float, default=1e-2)

    parser_run = subparsers.add_parser(
        "run", help="Run an experiment described by a TOML configuration."
    )
    parser_run.add_argument("config", help="Path to the configuration file.")
    parser_run.add_argument(
        "--output", action="store", help="Directory for the run's artifacts."
    )
    parser_run.add_argument(
        "--workers",
        action="store",
        type=int,
        help=f"Worker processes; defaults to ${harness.WORKERS_VARIABLE} or 1.",
    )

    parser_report = subparsers.add_parser(
        "report", help="Convergence report over runs at several scales n."
    )
    parser_report.add_argument("runs", nargs="+", help="Run directories.")
    parser_report.add_argument(
        "--output", action="store", default="report", help="Report directory."
    )

    subparsers.add_parser("kinds", help="List the experiment kinds.")

    args = parser.parse_args(argv)

    logging.basicConfig(level=args.vlog)

    if not args.action:
        parser.print_help()
        return 0

    seed = args.seed if args.seed is not None else DEFAULT_SEED

    try:
        if args.action == "kinds":
            for kind in experiment.available_kinds():
                try:
                    help_string = experiment.load_experiment(kind).help
                except ImportError as e:
                    logging.error("Error importing experiment %s: %s", kind, e)
                    continue
                print(f"{kind}: {help_string.splitlines()[0]}")
        elif args.action == "run":
            config = config_lib.load(args.config)
            if args.seed is not None:
                config = config.with_seed(args.seed)
            directory = pathlib.Path(args.output) if args.output else None
            manifest = harness.run_experiment(config, directory, args.workers)
            print(
                f"{manifest.kind}: {manifest.passed} passed, {manifest.failed} "
                f"failed, {manifest.replica_errors} unit errors"
            )
            if manifest.failed or manifest.replica_errors:
                return 1
        elif args.action == "report":
            report = harness.report_convergence(args.runs, args.output)
            for label, trend in sorted(report.trends.items()):
                print(f"{label}: gap slope {trend:.3f}")
        elif args.action == "env":
            env = environment.build_environment(
                args.d, args.L, environment.TailLaw(args.beta), seed
            )
            if args.save:
                pathlib.Path(args.save).write_text(env.to_json(), encoding="utf-8")
            if args.n is not None:
                environment.rescaled_measure(env, args.n).write_csv(sys.stdout)
            else:
                print(env, end="")
        elif args.action == "walk":
            env = environment.build_environment(
                args.d, args.L, environment.TailLaw(args.beta), seed
            )
            curve = btm_walker.msd_curve(
                [env],
                args.a,
                args.times,
                args.replicas,
                streams.generator(seed, streams.NOISE_STREAM),
            )
            curve.write_csv(sys.stdout)
        elif args.action == "ips":
            env = environment.build_environment(
                args.d, args.L, environment.TailLaw(args.beta), seed
            )
            rng = streams.generator(seed, streams.NOISE_STREAM)
            start = exclusion_ips.sample_binomial_profile(
                env, common.Profile(level=args.density), 1, rng
            )
            schedule = exclusion_ips.EventSchedule(sorted(args.times))
            for _ in range(args.replicas):
                exclusion_ips.simulate_ips(env, args.a, start, schedule, rng).write_csv(
                    sys.stdout
                )
        elif args.action == "duality":
            result = duality.run_battery(args.cases, seed, args.tolerance)
            if args.save:
                result.write_json_lines(args.save)
            print(
                f"{result.passed} relations passed, {result.failed} failed, "
                f"{result.undefined} undefined; "
                f"{result.variance_violations} variance violations"
            )
            if result.failed or result.variance_violations:
                return 1
        elif args.action == "fields":
            env = environment.build_environment(
                args.d, args.L, environment.TailLaw(args.beta), seed
            )
            rng = streams.generator(seed, streams.NOISE_STREAM)
            times = fields.observation_times(args.times)
            ensemble = fields.simulate_ensemble(
                env,
                args.a,
                args.n,
                args.times,
                common.Profile(level=args.density),
                args.replicas,
                rng,
            )
            bump = config_lib.default_function(args.d)
            samples = [
                sample
                for replica, series in enumerate(ensemble)
                for sample in fields.field_samples(
                    series, env, args.n, times, [bump], replica
                )
            ]
            fields.write_field_samples(sys.stdout, samples)
        elif args.action == "fke":
            rng = streams.generator(seed, streams.NOISE_STREAM)
            rho0 = config_lib.default_function(len(args.x))
            rows = []
            for t in args.times:
                estimate = fractional.fke_subordination(
                    rho0, args.beta, args.d_eff, t, args.x, args.samples, rng
                )
                rows.append([t, *args.x, estimate.mean, estimate.se])
            axes = [f"x{axis}" for axis in range(len(args.x))]
            _print_csv("fke-point", ["t", *axes, "value", "se"], rows)
        elif args.action == "fin":
            curve = fractional.fin_msd(
                args.beta,
                args.times,
                args.environments,
                args.replicas,
                streams.generator(seed, streams.NOISE_STREAM),
                args.half_width,
                args.eps,
            )
            curve.write_csv(sys.stdout)
        else:
            return 1
    except exceptions.Error as err:
        print(f"Error while executing '{args.action}': {err}")
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
