# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Experiment configuration files.

Configurations are TOML documents. Unknown keys are refused, the seed is
mandatory, and the hash of a configuration is the SHA-256 of its canonical
JSON form, so it does not depend on the order of keys in the file.
"""

import hashlib
import pathlib
import tomllib
from collections.abc import Mapping
from typing import Any, Optional, Union

import attr

from trapkinetics import common, environment, exceptions
from trapkinetics.support import output

KINDS = (
    "env-tail",
    "walker-msd",
    "duality-battery",
    "hydro-density",
    "hydro-frequency",
    "fke-validate",
    "fin-msd",
)

SOLVERS = ("explicit", "implicit")

# Keys that may differ between runs compared in one convergence report.
PER_RUN_KEYS = frozenset({"n", "output", "seed"})


def _ints(value: Any) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in value)


def _floats(value: Any) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


def parse_function(table: Mapping[str, Any]) -> common.TestFunction:
    try:
        return common.TestFunction(
            kind=common.BumpKind(table.get("kind", "triangle")),
            center=table["center"],
            radius=table["radius"],
            height=table.get("height", 1.0),
            name=table.get("name", ""),
        )
    except (KeyError, ValueError, TypeError) as error:
        raise exceptions.ConfigError(f"Invalid test function {dict(table)}: {error}")


def default_function(d: int) -> common.TestFunction:
    """A triangle of radius 1/2 at the origin."""
    return common.TestFunction(common.BumpKind.TRIANGLE, (0.0,) * d, 0.5)


def _function_record(f: common.TestFunction) -> dict[str, Any]:
    record: dict[str, Any] = {
        "kind": f.kind.value,
        "center": list(f.center),
        "radius": f.radius,
        "height": f.height,
    }
    if f.name:
        record["name"] = f.name
    return record


def parse_profile(table: Mapping[str, Any]) -> common.Profile:
    try:
        bump = table.get("bump")
        return common.Profile(
            level=table.get("level", 0.0),
            amplitude=table.get("amplitude", 0.0),
            bump=parse_function(bump) if bump is not None else None,
        )
    except (ValueError, TypeError) as error:
        raise exceptions.ConfigError(f"Invalid profile {dict(table)}: {error}")


def _profile_record(rho0: common.Profile) -> dict[str, Any]:
    record: dict[str, Any] = {"level": rho0.level, "amplitude": rho0.amplitude}
    if rho0.bump is not None:
        record["bump"] = _function_record(rho0.bump)
    return record


@attr.s(auto_attribs=True, frozen=True)
class ExperimentConfig:
    """A validated experiment configuration.

    Only `kind` and `seed` are required; everything else has a desk-scale
    default. `d_eff` left unset makes the frequency experiment estimate the
    diffusivity from walker runs.
    """

    kind: str
    seed: int
    d: int = 1
    beta: float = 0.5
    a: float = 0.0
    n: tuple[int, ...] = attr.ib(default=(10,), converter=_ints)
    L: int = 20
    times: tuple[float, ...] = attr.ib(default=(0.0, 0.1), converter=_floats)
    functions: tuple[common.TestFunction, ...] = attr.ib(
        default=(common.TestFunction(common.BumpKind.TRIANGLE, (0.0,), 0.5),),
        converter=tuple,
    )
    profile: common.Profile = common.Profile(level=0.5)
    replicas: int = 10
    environments: int = 1
    output: str = ""
    cases: int = 200
    tolerance: float = 1e-10
    eps: float = 1e-2
    half_width: float = 50.0
    d_eff: Optional[float] = None
    steps: int = 200
    samples: int = 1000
    solver: str = "explicit"
    max_events: int = 10**8

    def __attrs_post_init__(self) -> None:
        problems = []
        if self.kind not in KINDS:
            problems.append(f"unknown kind {self.kind!r} (known: {', '.join(KINDS)})")
        if self.d not in environment.SUPPORTED_DIMENSIONS:
            problems.append(f"d must be one of {environment.SUPPORTED_DIMENSIONS}")
        if not 0.0 < self.beta < 1.0:
            problems.append("beta must lie in (0, 1)")
        if self.a < 0.0 or self.a > 1.0:
            problems.append("a must lie in [0, 1]")
        if not self.n or min(self.n) < 2:
            problems.append("every n must be >= 2")
        if self.L < 1:
            problems.append("L must be >= 1")
        if any(t < 0 for t in self.times) or list(self.times) != sorted(self.times):
            problems.append("times must be non-negative and sorted")
        if self.replicas < 1 or self.environments < 1 or self.samples < 1:
            problems.append("replicas, environments and samples must be >= 1")
        if self.cases < 1 or self.steps < 1 or self.max_events < 1:
            problems.append("cases, steps and max_events must be >= 1")
        if self.tolerance <= 0 or self.eps <= 0 or self.half_width <= 0:
            problems.append("tolerance, eps and half_width must be positive")
        if self.d_eff is not None and self.d_eff <= 0:
            problems.append("D_eff must be positive")
        if self.solver not in SOLVERS:
            problems.append(f"solver must be one of {SOLVERS}")
        for f in self.functions:
            if f.dimension != self.d:
                problems.append(
                    f"test function {f.identifier} is not {self.d}-dimensional"
                )
        if self.profile.bump is not None and self.profile.bump.dimension != self.d:
            problems.append(f"profile bump is not {self.d}-dimensional")
        if problems:
            raise exceptions.ConfigError("; ".join(problems))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        if "seed" not in data:
            raise exceptions.ConfigError("The master seed is mandatory")
        if "kind" not in data:
            raise exceptions.ConfigError("The experiment kind is mandatory")
        if "D_eff" in data:
            data["d_eff"] = data.pop("D_eff")
        known = {field.name for field in attr.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise exceptions.ConfigError(f"Unknown configuration keys: {unknown}")
        if "functions" in data:
            data["functions"] = [parse_function(table) for table in data["functions"]]
        elif isinstance(data.get("d"), int):
            data["functions"] = [default_function(data["d"])]
        if "profile" in data:
            data["profile"] = parse_profile(data["profile"])
        try:
            return cls(**data)
        except (TypeError, ValueError) as error:
            raise exceptions.ConfigError(str(error))

    def as_record(self) -> dict[str, Any]:
        record = attr.asdict(self, recurse=False)
        record["n"] = list(self.n)
        record["times"] = list(self.times)
        record["functions"] = [_function_record(f) for f in self.functions]
        record["profile"] = _profile_record(self.profile)
        record["D_eff"] = record.pop("d_eff")
        if record["D_eff"] is None:
            del record["D_eff"]
        return record

    @property
    def digest(self) -> str:
        return config_hash(self.as_record())

    def comparison_key(self) -> str:
        """Hash of the settings that must agree between runs of one report."""
        record = {
            key: value
            for key, value in self.as_record().items()
            if key not in PER_RUN_KEYS
        }
        return config_hash(record)

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        return self if seed is None else attr.evolve(self, seed=seed)

    def output_directory(self) -> pathlib.Path:
        if self.output:
            return pathlib.Path(self.output)
        return pathlib.Path("runs") / f"{self.kind}-{self.digest[:12]}"


def config_hash(record: Mapping[str, Any]) -> str:
    return hashlib.sha256(output.canonical_json(record).encode("utf-8")).hexdigest()


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise exceptions.ConfigError(f"Malformed configuration: {error}")
    return ExperimentConfig.from_mapping(data)


def load(path: Union[str, pathlib.Path]) -> ExperimentConfig:
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise exceptions.CommandLineError(f"Cannot read configuration {path}: {error}")
    return loads(text)
