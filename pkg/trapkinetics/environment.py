# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Quenched heavy-tailed trap environments and their atomic measures.

Trap depths are i.i.d. with the ceiling-Pareto law alpha = ceil(U^(-1/beta)),
for which P(alpha > m) = m^(-beta) holds exactly at every integer m >= 1.
Environments live on a finite box of 2L+1 sites per axis, periodic by default.
"""

import functools
import json
import logging
import math
import pathlib
import textwrap
from collections.abc import Sequence
from typing import Any, Optional, Union

import attr
import numpy as np
from scipy import integrate, special

from trapkinetics import common, exceptions
from trapkinetics.support import output, streams

# Depths are stored as int64; larger draws are clipped and reported.
MAX_DEPTH = 2**53

SUPPORTED_DIMENSIONS = (1, 2, 3)


def _tail_index(instance, attribute, value) -> None:
    del instance
    if not 0.0 < value < 1.0:
        raise ValueError(f"{attribute.name} must lie in (0, 1), got {value!r}")


@attr.s(auto_attribs=True, frozen=True)
class TailLaw:
    """Law of a single trap depth, with P(alpha > u) ~ u^(-beta)."""

    beta: float = attr.ib(converter=float, validator=_tail_index)
    min_value: int = attr.ib(default=1, validator=attr.validators.in_({1}))


def sample_alphas(law: TailLaw, u: Union[float, np.ndarray]) -> np.ndarray:
    """Vectorized ceiling-Pareto sampler, see sample_alpha()."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        bad = u[(u <= 0.0) | (u >= 1.0)].ravel()[0]
        raise exceptions.InvalidVariate(float(bad))
    with np.errstate(over="ignore"):
        depth = np.power(u, -1.0 / law.beta)
    return np.ceil(np.minimum(depth, float(MAX_DEPTH))).astype(np.int64)


def sample_alpha(law: TailLaw, u: float) -> int:
    """Transforms a uniform variate into an integer trap depth.

    Args:
      law: the tail law providing beta.
      u: a uniform variate in the open interval (0, 1).

    Returns:
      ceil(u^(-1/beta)), an integer >= 1.

    Raises:
      InvalidVariate: if u is not in (0, 1).
    """
    if not 0.0 < u < 1.0:
        raise exceptions.InvalidVariate(u)
    return int(sample_alphas(law, np.array([u]))[0])


def tail_probability(law: TailLaw, m: float) -> float:
    """Exact P(alpha > m) of the ceiling construction."""
    if m < 1:
        return 1.0
    return math.floor(m) ** -law.beta


def truncated_mean(law: TailLaw, cap: int) -> float:
    """Exact E[min(alpha, cap)] = sum_{m=0}^{cap-1} P(alpha > m)."""
    return math.fsum(tail_probability(law, m) for m in range(int(cap)))


def truncated_second_moment(law: TailLaw, cap: int) -> float:
    """Exact E[min(alpha, cap)^2] = sum_{m=0}^{cap-1} (2m + 1) P(alpha > m)."""
    return math.fsum((2 * m + 1) * tail_probability(law, m) for m in range(int(cap)))


def _depth_array(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.int64).ravel()


def _default_shape(instance: "Environment") -> tuple[int, ...]:
    return (2 * instance.L + 1,) * instance.d


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Environment:
    """Trap depths on a finite box of the lattice.

    Attributes:
      d: lattice dimension.
      L: half-width of the box; the default shape has 2L+1 sites per axis.
      beta: tail index of the depth law.
      seed: the reproducibility token the depths were derived from.
      alpha: trap depths in canonical order (row-major over the box, first
        axis slowest).
      periodic: whether opposite faces of the box are neighbours.
      shape: number of sites per axis.
      clipped: how many sampled depths were cut down to MAX_DEPTH.
    """

    d: int = attr.ib(validator=attr.validators.in_(SUPPORTED_DIMENSIONS))
    L: int = attr.ib(converter=int)
    beta: float = attr.ib(converter=float, validator=_tail_index)
    seed: int = attr.ib(converter=int)
    alpha: np.ndarray = attr.ib(converter=_depth_array, repr=False)
    periodic: bool = True
    shape: tuple[int, ...] = attr.ib(
        default=attr.Factory(_default_shape, takes_self=True),
        converter=lambda value: tuple(int(v) for v in value),
    )
    clipped: int = attr.ib(default=0, converter=int)

    def __attrs_post_init__(self) -> None:
        if self.L < 0:
            raise ValueError(f"L must be non-negative, got {self.L}")
        if len(self.shape) != self.d or min(self.shape) < 1:
            raise ValueError(f"Invalid shape {self.shape} for dimension {self.d}")
        if self.alpha.size != math.prod(self.shape):
            raise ValueError(
                f"Expected {math.prod(self.shape)} depths, got {self.alpha.size}"
            )
        if self.alpha.size and self.alpha.min() < 1:
            raise ValueError("Trap depths must be integers >= 1")

    @classmethod
    def from_depths(
        cls,
        depths: Union[Sequence[Any], np.ndarray],
        beta: float = 0.5,
        periodic: bool = True,
        seed: int = 0,
    ) -> "Environment":
        """Builds an environment from an explicit array of depths.

        The array's shape is the box shape; one-dimensional input gives a ring
        (or a segment if not periodic) of that many sites.
        """
        array = np.asarray(depths, dtype=np.int64)
        if array.ndim == 0:
            array = array.reshape(1)
        return cls(
            d=array.ndim,
            L=max(array.shape) // 2,
            beta=beta,
            seed=seed,
            alpha=array.ravel(),
            periodic=periodic,
            shape=array.shape,
        )

    @property
    def size(self) -> int:
        return int(self.alpha.size)

    @functools.cached_property
    def offsets(self) -> np.ndarray:
        return np.array([side // 2 for side in self.shape], dtype=np.int64)

    @functools.cached_property
    def coordinates(self) -> np.ndarray:
        """Lattice coordinates of every site, shape (size, d)."""
        grid = np.indices(self.shape).reshape(self.d, -1).T
        return grid - self.offsets

    @functools.cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = []
        for axis in range(self.d):
            strides.append(math.prod(self.shape[axis + 1 :]))
        return tuple(strides)

    def index_of(self, coordinate: Sequence[int]) -> int:
        """Canonical index of a lattice point, wrapped onto the box if periodic."""
        index = 0
        for axis, value in enumerate(coordinate):
            position = int(value) + int(self.offsets[axis])
            side = self.shape[axis]
            if self.periodic:
                position %= side
            elif not 0 <= position < side:
                raise IndexError(f"Coordinate {tuple(coordinate)} outside the box")
            index += position * self._strides[axis]
        return index

    @property
    def origin(self) -> int:
        return self.index_of((0,) * self.d)

    @functools.cached_property
    def neighbor_table(self) -> tuple[tuple[tuple[int, int, int], ...], ...]:
        """For every site, its distinct neighbours as (site, axis, sign)."""
        table = []
        positions = np.indices(self.shape).reshape(self.d, -1).T
        for x, position in enumerate(positions):
            seen = set()
            entries = []
            for axis in range(self.d):
                side = self.shape[axis]
                for sign in (-1, 1):
                    moved = int(position[axis]) + sign
                    if self.periodic:
                        moved %= side
                    elif not 0 <= moved < side:
                        continue
                    y = x + (moved - int(position[axis])) * self._strides[axis]
                    if y == x or y in seen:
                        continue
                    seen.add(y)
                    entries.append((y, axis, sign))
            table.append(tuple(entries))
        return tuple(table)

    def neighbors(self, x: int) -> list[int]:
        return [y for y, _, _ in self.neighbor_table[x]]

    @functools.cached_property
    def edges(self) -> np.ndarray:
        """Directed nearest-neighbour pairs (x, y), shape (edges, 2)."""
        pairs = [(x, y) for x, row in enumerate(self.neighbor_table) for y, _, _ in row]
        return np.array(pairs, dtype=np.int64).reshape(-1, 2)

    def scaled_points(self, n: float) -> np.ndarray:
        """Site positions x/n in macroscopic units."""
        return self.coordinates / float(n)

    def to_json(self) -> str:
        record: dict[str, Any] = {
            "d": self.d,
            "L": self.L,
            "beta": self.beta,
            "seed": self.seed,
            "periodic": self.periodic,
            "alpha": self.alpha.tolist(),
        }
        if self.shape != _default_shape(self):
            record["shape"] = list(self.shape)
        if self.clipped:
            record["clipped"] = self.clipped
        return output.canonical_json(record)

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        record = json.loads(text)
        kwargs = {}
        if "shape" in record:
            kwargs["shape"] = record["shape"]
        return cls(
            d=record["d"],
            L=record["L"],
            beta=record["beta"],
            seed=record["seed"],
            alpha=record["alpha"],
            periodic=record.get("periodic", True),
            clipped=record.get("clipped", 0),
            **kwargs,
        )

    def __str__(self) -> str:
        shape = "x".join(str(side) for side in self.shape)
        topology = "torus" if self.periodic else "box"
        median = int(np.median(self.alpha))
        return textwrap.dedent(
            f"""\
            Environment d={self.d} L={self.L} ({shape} sites, {topology})
            Tail index: {self.beta}
            Seed: {self.seed}
            Depths: min {self.alpha.min()}, median {median}, max {self.alpha.max()}
            Total depth: {int(self.alpha.sum())}
            Clipped depths: {self.clipped}
        """
        )


def build_environment(d: int, L: int, law: TailLaw, seed: int) -> Environment:
    """Samples i.i.d. depths on the box [-L, L]^d.

    The depth of site i comes from the i-th counter-based uniform of the seed,
    so the result is bit-reproducible and independent of traversal order.
    """
    if d not in SUPPORTED_DIMENSIONS:
        raise exceptions.InvalidParameter(f"Dimension must be 1, 2 or 3, got {d}")
    if L < 1:
        raise exceptions.InvalidParameter(f"Box half-width must be >= 1, got {L}")

    size = (2 * L + 1) ** d
    alpha = sample_alphas(law, streams.site_uniforms(seed, size))
    clipped = int(np.count_nonzero(alpha >= MAX_DEPTH))
    if clipped:
        logging.warning("%d trap depths clipped at %d", clipped, MAX_DEPTH)
    logging.debug("Built environment d=%d L=%d seed=%d", d, L, seed)
    return Environment(
        d=d, L=L, beta=law.beta, seed=seed, alpha=alpha, clipped=clipped
    )


def _locations(value: Any) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    return array


def _weights(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=float).ravel()


@attr.s(auto_attribs=True, frozen=True, eq=False)
class PointMeasure:
    """Finite atomic measure sum_i w_i delta_{x_i} on R^d.

    Attributes:
      locations: atom positions, shape (atoms, d).
      weights: positive atom masses.
      half_width: if set, every atom lies in [-half_width, half_width]^d.
      metadata: free-form provenance, e.g. the truncation level of a sampled
        Poisson measure and its bias bound.
    """

    locations: np.ndarray = attr.ib(converter=_locations, repr=False)
    weights: np.ndarray = attr.ib(converter=_weights, repr=False)
    half_width: Optional[float] = None
    metadata: dict[str, Any] = attr.Factory(dict)

    def __attrs_post_init__(self) -> None:
        if self.locations.ndim != 2 or len(self.locations) != len(self.weights):
            raise ValueError("Locations and weights do not match")
        if self.weights.size and self.weights.min() <= 0:
            raise ValueError("Atom weights must be positive")
        if self.half_width is not None and self.locations.size:
            if np.abs(self.locations).max() > self.half_width * (1 + 1e-12):
                raise ValueError("Atoms must lie inside the declared box")

    @property
    def dimension(self) -> int:
        return int(self.locations.shape[1])

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.weights))

    def subset(self, mask: np.ndarray) -> "PointMeasure":
        return PointMeasure(
            self.locations[mask], self.weights[mask], self.half_width, self.metadata
        )

    def csv_header(self) -> list[str]:
        return [f"x_{axis + 1}" for axis in range(self.dimension)] + ["weight"]

    def csv_rows(self) -> list[list[float]]:
        return [
            [*location.tolist(), weight]
            for location, weight in zip(self.locations, self.weights)
        ]

    def write_csv(self, target: output.PathOrStream) -> None:
        output.write_csv(target, "point-measure", self.csv_header(), self.csv_rows())

    @classmethod
    def read_csv(cls, source: output.PathOrStream) -> "PointMeasure":
        _, rows = output.read_csv(source)
        if not rows:
            return cls(np.empty((0, 1)), np.empty(0))
        axes = sorted(key for key in rows[0] if key.startswith("x_"))
        locations = [[float(row[axis]) for axis in axes] for row in rows]
        weights = [float(row["weight"]) for row in rows]
        return cls(np.array(locations).reshape(len(rows), len(axes)), weights)


def rescaled_measure(env: Environment, n: int) -> PointMeasure:
    """The measure W^n = n^(-d/beta) sum_x alpha_x delta_{x/n}."""
    if n < 1:
        raise exceptions.InvalidParameter(f"Scale must be >= 1, got {n}")
    scale = float(n) ** (-env.d / env.beta)
    half_width = float(np.abs(env.coordinates).max(initial=0)) / n
    return PointMeasure(
        env.scaled_points(n),
        env.alpha.astype(float) * scale,
        half_width,
        {"n": n, "scale": scale},
    )


def omitted_mass_density(beta: float, eps: float) -> float:
    """Expected mass per unit volume of the atoms below eps.

    This is beta eps^(1-beta) / (1-beta).
    """
    return beta * eps ** (1.0 - beta) / (1.0 - beta)


def sample_ppp_W(
    beta: float,
    half_width: float,
    d: int,
    eps: float,
    rng: np.random.Generator,
    chunk: int = 1024,
) -> PointMeasure:
    """Samples the atoms of W = sum v_i delta_{x_i} with weight above eps.

    The intensity is beta v^(-1-beta) dv dx on (0, inf) x [-h, h]^d. Atoms are
    generated in decreasing weight order from the arrival times G_k of a unit
    Poisson process, v_k = (G_k / V)^(-1/beta) with V = (2h)^d, so a smaller
    eps with the same generator extends the same atom list.

    The omitted atoms (v < eps) contribute at most
    sup|f| (2h)^d beta eps^(1-beta) / (1-beta) in expectation to <W|f>; that
    bound is stored in the metadata as "truncation_bias_bound".
    """
    if eps <= 0:
        raise exceptions.InvalidParameter(f"Truncation level must be positive: {eps}")
    if not 0.0 < beta < 1.0:
        raise exceptions.InvalidParameter(f"Tail index must lie in (0, 1): {beta}")

    gaps_rng, locations_rng = rng.spawn(2)
    volume = (2.0 * half_width) ** d
    threshold = volume * eps**-beta

    arrivals: list[np.ndarray] = []
    last = 0.0
    while True:
        block = last + np.cumsum(gaps_rng.standard_exponential(chunk))
        inside = block[block <= threshold]
        arrivals.append(inside)
        if inside.size < chunk:
            break
        last = float(block[-1])
    gamma = np.concatenate(arrivals)

    weights = (gamma / volume) ** (-1.0 / beta)
    locations = locations_rng.uniform(-half_width, half_width, size=(gamma.size, d))
    return PointMeasure(
        locations,
        weights,
        half_width,
        {
            "eps": eps,
            "beta": beta,
            "expected_atoms": threshold,
            "truncation_bias_bound": volume * omitted_mass_density(beta, eps),
        },
    )


def truncation_bias(measure: PointMeasure, f: common.TestFunction) -> float:
    """Bound on E<W|f> - E<W_trunc|f> recorded by sample_ppp_W()."""
    return f.sup_norm * float(measure.metadata.get("truncation_bias_bound", 0.0))


def pair(measure: PointMeasure, f: common.TestFunction) -> float:
    """<measure|f> = sum_i w_i f(x_i)."""
    if len(measure) == 0:
        return 0.0
    return float(np.dot(measure.weights, f(measure.locations)))


def _checked_quad(function, lower, upper, tolerance, **kwargs) -> float:
    value, error, *info = integrate.quad(
        function, lower, upper, epsabs=tolerance, epsrel=0.0, limit=200,
        full_output=1, **kwargs
    )
    if len(info) > 1 and error > tolerance:
        raise exceptions.NumericalFailure(
            "Quadrature did not converge", achieved=error, tolerance=tolerance
        )
    return value


def laplace_exponent(
    f: common.TestFunction, beta: float, tolerance: float = 1e-11
) -> float:
    """int_{R^d} Gamma(1-beta) f(x)^beta dx, by adaptive radial quadrature."""
    d = f.dimension
    scale = common.sphere_area(d) * f.radius**d * math.gamma(1.0 - beta)
    radial = _checked_quad(
        lambda s: float(f.shape(s)) ** beta * s ** (d - 1), 0.0, 1.0, tolerance
    )
    return scale * radial


def laplace_functional_W(
    f: common.TestFunction, beta: float, tolerance: float = 1e-11
) -> float:
    """E[exp(-<W|f>)] = exp(-int int (1 - e^(-v f(x))) beta v^(-1-beta) dv dx).

    The inner integral is Gamma(1-beta) f(x)^beta; the outer one runs over the
    support of f.

    Raises:
      NumericalFailure: if the quadrature misses the tolerance.
    """
    if f.height == 0.0:
        return 1.0
    return math.exp(-laplace_exponent(f, beta, tolerance))


def levy_integral(a: float, beta: float, tolerance: float = 1e-12) -> float:
    """int_0^inf (1 - e^(-v a)) beta v^(-1-beta) dv by direct quadrature."""
    if a == 0.0:
        return 0.0

    def regular(v: float) -> float:
        return beta * (-math.expm1(-v * a) / v if v > 0 else a)

    # v^(-beta) is handled by the algebraic weight on [0, 1].
    head = _checked_quad(regular, 0.0, 1.0, tolerance, weight="alg", wvar=(-beta, 0.0))
    tail = _checked_quad(
        lambda v: -math.expm1(-v * a) * beta * v ** (-1.0 - beta),
        1.0,
        np.inf,
        tolerance,
    )
    return head + tail


def laplace_functional_direct(
    f: common.TestFunction, beta: float, tolerance: float = 1e-9
) -> float:
    """Same as laplace_functional_W() with both integrals done numerically."""
    d = f.dimension
    scale = common.sphere_area(d) * f.radius**d
    radial = _checked_quad(
        lambda s: levy_integral(float(f.shape(s)), beta) * s ** (d - 1),
        0.0,
        1.0,
        tolerance,
    )
    return math.exp(-scale * radial)


def laplace_functional_mc(
    measures: Sequence[PointMeasure], f: common.TestFunction
) -> common.Estimate:
    """Monte Carlo estimate of E[exp(-<measure|f>)] over the given measures."""
    return common.estimate([math.exp(-pair(measure, f)) for measure in measures])


def load_environment(path: Union[str, pathlib.Path]) -> Environment:
    return Environment.from_json(pathlib.Path(path).read_text(encoding="utf-8"))
