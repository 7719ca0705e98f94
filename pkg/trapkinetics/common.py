# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Common value types shared by the simulation modules."""

import enum
import math
from collections.abc import Iterable, Sequence
from typing import Optional, Union

import attr
import numpy as np
from scipy import integrate, special

ArrayLike = Union[Sequence[float], np.ndarray]


class BumpKind(enum.Enum):
    TRIANGLE = "triangle"
    COSINE_SQUARED = "cosine-squared"


def _positive(instance, attribute, value) -> None:
    del instance
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value!r}")


def _non_negative(instance, attribute, value) -> None:
    del instance
    if not value >= 0:
        raise ValueError(f"{attribute.name} must be non-negative, got {value!r}")


def _float_tuple(value: Iterable[float]) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d=1)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def as_points(points: ArrayLike, d: int) -> np.ndarray:
    """Returns the given points as an (m, d) float array."""
    array = np.asarray(points, dtype=float)
    if array.ndim == 0:
        array = array.reshape(1, 1)
    elif array.ndim == 1:
        array = array.reshape(-1, 1) if d == 1 else array.reshape(1, d)
    if array.shape[1] != d:
        raise ValueError(f"Expected points of dimension {d}, got {array.shape}")
    return array


@attr.s(auto_attribs=True, frozen=True)
class TestFunction:
    """Non-negative radial bump with compact support.

    Attributes:
      kind: the bump profile, either a triangle (1 - s)_+ or a squared cosine
        cos^2(pi s / 2) on s < 1, where s is the distance from the center in
        units of the radius.
      center: center of the bump, one coordinate per dimension.
      radius: support radius; the function vanishes for |x - center| >= radius.
      height: value at the center.
      name: identifier used in output files.
    """

    __test__ = False  # Not a pytest class.

    kind: BumpKind = attr.ib(validator=attr.validators.in_(BumpKind))
    center: tuple[float, ...] = attr.ib(converter=_float_tuple)
    radius: float = attr.ib(converter=float, validator=_positive)
    height: float = attr.ib(default=1.0, converter=float, validator=_non_negative)
    name: str = ""

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def identifier(self) -> str:
        if self.name:
            return self.name
        center = ",".join(f"{c:g}" for c in self.center)
        return f"{self.kind.value}@{center}/{self.radius:g}"

    @property
    def sup_norm(self) -> float:
        return self.height

    def shape(self, s: np.ndarray) -> np.ndarray:
        """Radial profile as a function of the scaled distance s >= 0."""
        s = np.asarray(s, dtype=float)
        if self.kind == BumpKind.TRIANGLE:
            values = 1.0 - s
        else:
            values = np.cos(0.5 * np.pi * s) ** 2
        return self.height * np.where(s < 1.0, values, 0.0)

    def __call__(self, points: ArrayLike) -> np.ndarray:
        array = as_points(points, self.dimension)
        distance = np.linalg.norm(array - np.asarray(self.center), axis=1)
        return self.shape(distance / self.radius)

    def integral(self, power: float = 1.0) -> float:
        """Returns the Lebesgue integral of f**power over R^d."""
        d = self.dimension
        scale = sphere_area(d) * self.radius**d
        if self.kind == BumpKind.TRIANGLE:
            radial = special.beta(d, power + 1.0)
        else:
            radial, _ = integrate.quad(
                lambda s: np.cos(0.5 * np.pi * s) ** (2 * power) * s ** (d - 1),
                0.0,
                1.0,
                epsabs=1e-13,
                epsrel=1e-12,
            )
        return scale * self.height**power * radial

    def translated(self, center: ArrayLike) -> "TestFunction":
        return attr.evolve(self, center=center)


@attr.s(auto_attribs=True, frozen=True)
class Profile:
    """Macroscopic density profile rho0(x) = level + amplitude * bump(x).

    Values must stay in [0, 1] everywhere, which is checked on construction.
    """

    level: float = attr.ib(default=0.0, converter=float)
    amplitude: float = attr.ib(default=0.0, converter=float)
    bump: Optional[TestFunction] = None

    def __attrs_post_init__(self) -> None:
        peak = self.amplitude * (self.bump.height if self.bump is not None else 0.0)
        low = self.level + min(0.0, peak)
        high = self.level + max(0.0, peak)
        if low < 0.0 or high > 1.0:
            raise ValueError(
                f"Profile values must lie in [0, 1], got range [{low}, {high}]"
            )

    @property
    def is_constant(self) -> bool:
        return self.bump is None or self.amplitude == 0.0

    def __call__(self, points: ArrayLike, d: Optional[int] = None) -> np.ndarray:
        if self.bump is not None:
            d = self.bump.dimension
        elif d is None:
            d = 1 if np.ndim(points) < 2 else np.shape(points)[1]
        array = as_points(points, d)
        values = np.full(len(array), self.level)
        if self.bump is not None and self.amplitude != 0.0:
            values = values + self.amplitude * self.bump(array)
        return values


@attr.s(auto_attribs=True, frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    se: float
    samples: int = 1

    def within(self, value: float, sigmas: float, slack: float = 0.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.se + slack

    def __str__(self) -> str:
        return f"{self.mean:.6g} ± {self.se:.2g} (n={self.samples})"


def estimate(values: ArrayLike) -> Estimate:
    """Sample mean and standard error of the given values."""
    array = np.asarray(values, dtype=float).ravel()
    if array.size == 0:
        raise ValueError("Cannot estimate from an empty sample.")
    if array.size == 1:
        return Estimate(float(array[0]), 0.0, 1)
    se = float(np.std(array, ddof=1) / math.sqrt(array.size))
    return Estimate(float(np.mean(array)), se, int(array.size))


def fit_loglog_slope(x: ArrayLike, y: ArrayLike) -> float:
    """Least-squares slope of log(y) against log(x), skipping non-positive entries."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 2:
        raise ValueError("Need at least two positive points to fit a slope.")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)
