# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT

import abc
import dataclasses
import importlib
import inspect
import pathlib
import pkgutil
from collections.abc import Sequence
from typing import Any, Optional

import attr

from trapkinetics import environment
from trapkinetics.support import config as config_lib
from trapkinetics.support import streams


@attr.s(auto_attribs=True, frozen=True)
class ReplicaResult:
    """What one unit of work produced, or why it failed."""

    index: int
    seed: int
    payload: Any = None
    error: Optional[str] = None
    diagnostics: dict[str, float] = attr.Factory(dict)

    @property
    def ok(self) -> bool:
        return self.error is None


@attr.s(auto_attribs=True)
class Outcome:
    """Files an experiment wrote and how many of its checks passed."""

    files: list[str] = attr.Factory(list)
    passed: int = 0
    failed: int = 0
    summary: dict[str, Any] = attr.Factory(dict)


class Experiment(abc.ABC):
    def __init__(self, config: config_lib.ExperimentConfig) -> None:
        self.config = config
        self.clipped_depths = 0

    def units(self) -> int:
        """Number of independent units of work, each with its own seed."""
        return self.config.replicas

    def environment(
        self, seed: int, n: Optional[int] = None
    ) -> environment.Environment:
        """The environment of a unit, with its box grown in proportion to n."""
        half_width = self.config.L
        if n is not None:
            half_width = -(-self.config.L * n // min(self.config.n))
        env = environment.build_environment(
            self.config.d,
            half_width,
            environment.TailLaw(self.config.beta),
            seed,
        )
        self.clipped_depths += env.clipped
        return env

    @staticmethod
    def noise(seed: int) -> Any:
        return streams.generator(seed, streams.NOISE_STREAM)

    @abc.abstractmethod
    def run_replica(self, index: int, seed: int) -> ReplicaResult:
        """Runs one unit of work; errors propagate to the harness."""
        pass

    @abc.abstractmethod
    def finalize(
        self, results: Sequence[ReplicaResult], directory: pathlib.Path
    ) -> Outcome:
        """Aggregates the successful units, in index order, into output files."""
        pass


@dataclasses.dataclass
class ExperimentKind:
    runner: type[Experiment]
    help: str


def module_name(kind: str) -> str:
    return f"trapkinetics.experiments.{kind.replace('-', '_')}"


def load_experiment(kind: str) -> ExperimentKind:
    experiment_module = importlib.import_module(module_name(kind))
    help_string = inspect.getdoc(experiment_module)
    assert help_string is not None

    return ExperimentKind(getattr(experiment_module, "Runner"), help_string)


def available_kinds() -> list[str]:
    from trapkinetics import experiments

    return sorted(
        info.name.replace("_", "-")
        for info in pkgutil.iter_modules(experiments.__path__)
        if not info.ispkg
    )
