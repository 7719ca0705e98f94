# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Reproducible experiment runs and convergence reports.

A run splits an experiment into units of work, each seeded from the master
seed, the kind and its index. Units run inline or on a process pool; their
results are aggregated in index order and the manifest is written once, at
the end, so the outputs do not depend on the number of workers.
"""

import collections
import concurrent.futures
import importlib.metadata
import itertools
import logging
import math
import os
import pathlib
import time
from collections.abc import Sequence
from typing import Any, Optional, Union

import attr

from trapkinetics import common, exceptions, experiment
from trapkinetics.support import charts
from trapkinetics.support import config as config_lib
from trapkinetics.support import output, streams

WORKERS_VARIABLE = "TRAPKINETICS_WORKERS"
MANIFEST_NAME = "manifest.json"
COMPARISON_NAME = "comparison.csv"
BOUNDARY_MASS_THRESHOLD = 0.01

COMPARISON_COLUMNS = [
    "n",
    "t",
    "f_id",
    "field",
    "field_se",
    "reference",
    "gap",
    "gap_se",
    "variance_ratio",
]


def code_version() -> str:
    try:
        return importlib.metadata.version("trapkinetics")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def worker_count() -> int:
    value = os.environ.get(WORKERS_VARIABLE, "1")
    try:
        workers = int(value)
    except ValueError:
        raise exceptions.ConfigError(
            f"{WORKERS_VARIABLE} must be an integer, got {value!r}"
        )
    if workers < 1:
        raise exceptions.ConfigError(
            f"{WORKERS_VARIABLE} must be >= 1, got {workers}"
        )
    return workers


@attr.s(auto_attribs=True, frozen=True)
class RunManifest:
    kind: str
    config_hash: str
    config: dict[str, Any]
    code_version: str
    seeds: list[dict[str, Any]]
    wall_clock: float
    files: list[str]
    passed: int
    failed: int
    replica_errors: int
    summary: dict[str, Any] = attr.Factory(dict)
    clipped_depths: int = 0

    def as_record(self) -> dict[str, Any]:
        return attr.asdict(self, recurse=False)

    def write(self, directory: pathlib.Path) -> pathlib.Path:
        path = directory / MANIFEST_NAME
        output.write_json(path, self.as_record())
        return path

    @classmethod
    def read(cls, directory: Union[str, pathlib.Path]) -> "RunManifest":
        path = pathlib.Path(directory) / MANIFEST_NAME
        try:
            record = output.read_json(path)
        except OSError as error:
            raise exceptions.MismatchedRuns(f"No manifest in {directory}: {error}")
        return cls(**record)

    def experiment_config(self) -> config_lib.ExperimentConfig:
        return config_lib.ExperimentConfig.from_mapping(self.config)


def _execute(record: dict[str, Any], index: int, seed: int) -> experiment.ReplicaResult:
    config = config_lib.ExperimentConfig.from_mapping(record)
    runner = experiment.load_experiment(config.kind).runner(config)
    logging.info("Unit %d of %s starts with seed %d", index, config.kind, seed)
    try:
        result = runner.run_replica(index, seed)
    except exceptions.Error as error:
        logging.warning("Unit %d of %s failed: %s", index, config.kind, error)
        result = experiment.ReplicaResult(
            index, seed, error=f"{type(error).__name__}: {error}"
        )
    if runner.clipped_depths:
        diagnostics = {**result.diagnostics, "clipped_depths": runner.clipped_depths}
        result = attr.evolve(result, diagnostics=diagnostics)
    return result


def _check_diagnostics(result: experiment.ReplicaResult) -> None:
    mass = result.diagnostics.get("boundary_mass")
    if mass is not None and mass > BOUNDARY_MASS_THRESHOLD:
        logging.warning(
            "Unit %d: walker mass %.3g outside half the box; enlarge L",
            result.index,
            mass,
        )


def run_experiment(
    config: config_lib.ExperimentConfig,
    directory: Optional[pathlib.Path] = None,
    workers: Optional[int] = None,
) -> RunManifest:
    """Runs every unit of an experiment and writes its artifacts and manifest.

    Raises:
      ConfigError: if the experiment kind has no implementation.
    """
    started = time.perf_counter()
    try:
        kind = experiment.load_experiment(config.kind)
    except ImportError as error:
        raise exceptions.ConfigError(
            f"No implementation for kind {config.kind!r}: {error}"
        )
    runner = kind.runner(config)
    directory = pathlib.Path(directory or config.output_directory())
    directory.mkdir(parents=True, exist_ok=True)
    workers = workers if workers is not None else worker_count()

    units = runner.units()
    seeds = [
        streams.replica_seed(config.seed, config.kind, index) for index in range(units)
    ]
    record = config.as_record()
    logging.info(
        "Running %s (%s) with %d units on %d workers",
        config.kind,
        config.digest[:12],
        units,
        workers,
    )
    if workers == 1 or units == 1:
        results = [_execute(record, index, seed) for index, seed in enumerate(seeds)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(_execute, itertools.repeat(record), range(units), seeds)
            )

    for result in results:
        _check_diagnostics(result)
    outcome = runner.finalize([result for result in results if result.ok], directory)
    errors = [result for result in results if not result.ok]

    manifest = RunManifest(
        kind=config.kind,
        config_hash=config.digest,
        config=record,
        code_version=code_version(),
        seeds=[
            {"index": result.index, "seed": result.seed, "error": result.error}
            for result in results
        ],
        wall_clock=round(time.perf_counter() - started, 3),
        files=sorted(pathlib.Path(name).name for name in outcome.files),
        passed=outcome.passed,
        failed=outcome.failed,
        replica_errors=len(errors),
        summary=outcome.summary,
        clipped_depths=sum(
            int(result.diagnostics.get("clipped_depths", 0)) for result in results
        ),
    )
    path = manifest.write(directory)
    logging.info(
        "Finished %s: %d passed, %d failed, %d unit errors; manifest %s",
        config.kind,
        manifest.passed,
        manifest.failed,
        manifest.replica_errors,
        path,
    )
    return manifest


@attr.s(auto_attribs=True, frozen=True)
class ComparisonRow:
    """Field mean against its reference at one (n, t, f)."""

    n: int
    t: float
    f_id: str
    field: float
    field_se: float
    reference: float
    gap: float
    gap_se: float
    variance_ratio: float

    def csv_row(self) -> list[Any]:
        return [getattr(self, column) for column in COMPARISON_COLUMNS]

    @classmethod
    def from_csv(cls, row: dict[str, str]) -> "ComparisonRow":
        return cls(
            n=int(row["n"]),
            t=float(row["t"]),
            f_id=row["f_id"],
            field=float(row["field"]),
            field_se=float(row["field_se"]),
            reference=float(row["reference"]),
            gap=float(row["gap"]),
            gap_se=float(row["gap_se"]),
            variance_ratio=float(row["variance_ratio"]),
        )


def write_comparison(
    directory: pathlib.Path, rows: Sequence[ComparisonRow]
) -> pathlib.Path:
    path = directory / COMPARISON_NAME
    output.write_csv(
        path, "comparison", COMPARISON_COLUMNS, [r.csv_row() for r in rows]
    )
    return path


def read_comparison(directory: pathlib.Path) -> list[ComparisonRow]:
    path = directory / COMPARISON_NAME
    if not path.exists():
        raise exceptions.MismatchedRuns(f"{directory} has no {COMPARISON_NAME}")
    _, rows = output.read_csv(path)
    return [ComparisonRow.from_csv(row) for row in rows]


@attr.s(auto_attribs=True, frozen=True)
class ConvergenceReport:
    kind: str
    rows: list[ComparisonRow]
    trends: dict[str, float]
    files: list[str]


def report_convergence(
    directories: Sequence[Union[str, pathlib.Path]],
    destination: Union[str, pathlib.Path],
) -> ConvergenceReport:
    """Summarizes field-to-reference gaps across runs at several scales n.

    Writes convergence.csv with every row and convergence.svg with the gap
    against n, one series per (t, f). The trend of a series is the fitted
    log-log slope of its gaps.

    Raises:
      MismatchedRuns: if the runs differ in anything but n, seed and output,
        are not field experiments, or cover fewer than two values of n.
    """
    if not directories:
        raise exceptions.MismatchedRuns("No runs given")
    manifests = [RunManifest.read(directory) for directory in directories]
    configs = [manifest.experiment_config() for manifest in manifests]
    if len({c.comparison_key() for c in configs}) != 1:
        raise exceptions.MismatchedRuns("Runs were made with different configurations")
    kind = configs[0].kind
    if kind not in ("hydro-density", "hydro-frequency"):
        raise exceptions.MismatchedRuns(f"Runs of kind {kind!r} carry no field gaps")

    rows: dict[tuple[int, float, str], ComparisonRow] = {}
    for directory in directories:
        for row in read_comparison(pathlib.Path(directory)):
            rows.setdefault((row.n, row.t, row.f_id), row)
    scales = sorted({n for n, _, _ in rows})
    if len(scales) < 2:
        raise exceptions.MismatchedRuns(
            f"Convergence needs at least two values of n, got {scales}"
        )

    destination = pathlib.Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    ordered = [rows[key] for key in sorted(rows)]
    series: dict[str, list[ComparisonRow]] = collections.defaultdict(list)
    for row in ordered:
        if row.t > 0:
            series[f"t={row.t:g} {row.f_id}"].append(row)

    trends = {}
    for label, entries in series.items():
        gaps = [entry.gap for entry in entries]
        ns = [entry.n for entry in entries]
        try:
            trends[label] = common.fit_loglog_slope(ns, gaps)
        except ValueError:
            trends[label] = math.nan

    table = destination / "convergence.csv"
    output.write_csv(
        table, "convergence", COMPARISON_COLUMNS, [r.csv_row() for r in ordered]
    )
    chart = charts.line_chart(
        destination / "convergence.svg",
        [
            charts.Series(
                label,
                [entry.n for entry in entries],
                [entry.gap for entry in entries],
                [entry.gap_se for entry in entries],
            )
            for label, entries in series.items()
        ],
        title=f"{kind}: gap to reference",
        xlabel="n",
        ylabel="|field - reference|",
        logx=True,
    )
    output.write_json(destination / "trends.json", trends)
    files = [str(table), str(chart), str(destination / "trends.json")]
    logging.info("Convergence report over n=%s written to %s", scales, destination)
    return ConvergenceReport(kind, ordered, trends, files)
