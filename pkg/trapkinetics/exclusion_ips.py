# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Interacting trap walkers under partial exclusion.

Each site x holds at most alpha_x particles. A particle at x jumps to a
neighbour y at rate alpha_x^(a-1) alpha_y^a (1 - eta(y)/alpha_y), so a full trap
accepts no particles. The product of Binomial(alpha_x, rho) laws is reversible
for every rho in [0, 1].
"""

import enum
import fractions
import logging
import math
from collections.abc import Iterable, Sequence
from typing import Any, Union

import attr
import numpy as np
from scipy import special

from trapkinetics import btm_walker, common, environment, exceptions
from trapkinetics.support import output, ratetree, statespace, streams

DEFAULT_MAX_EVENTS = 10**8
# Exact rational arithmetic is used for reversibility checks up to this size.
EXACT_STATE_LIMIT = 10**4


def _counts(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.int64).ravel()


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Configuration:
    """Particle counts eta(x) with 0 <= eta(x) <= capacity(x)."""

    counts: np.ndarray = attr.ib(converter=_counts)
    capacities: np.ndarray = attr.ib(converter=_counts, repr=False)

    def __attrs_post_init__(self) -> None:
        if self.counts.shape != self.capacities.shape:
            raise ValueError("Counts and capacities do not match")
        if np.any(self.counts < 0) or np.any(self.counts > self.capacities):
            raise exceptions.InvalidParameter(
                "Particle counts must lie between 0 and the trap depth"
            )

    @classmethod
    def of(cls, env: environment.Environment, counts: Any) -> "Configuration":
        return cls(counts, env.alpha)

    @classmethod
    def empty(cls, env: environment.Environment) -> "Configuration":
        return cls(np.zeros(env.size, dtype=np.int64), env.alpha)

    @classmethod
    def full(cls, env: environment.Environment) -> "Configuration":
        return cls(env.alpha.copy(), env.alpha)

    @property
    def particles(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return np.array_equal(self.counts, other.counts) and np.array_equal(
            self.capacities, other.capacities
        )

    __hash__ = None  # type: ignore[assignment]


class StoragePolicy(enum.Enum):
    ALL = "all"
    LAST = "last"


def _times(value: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(t) for t in value)


@attr.s(auto_attribs=True, frozen=True)
class EventSchedule:
    """Observation times, in physical time units, and what to keep of them."""

    times: tuple[float, ...] = attr.ib(converter=_times)
    policy: StoragePolicy = StoragePolicy.ALL

    def __attrs_post_init__(self) -> None:
        if any(t < 0 for t in self.times):
            raise ValueError("Observation times must be non-negative")
        if any(later < earlier for earlier, later in zip(self.times, self.times[1:])):
            raise ValueError("Observation times must be non-decreasing")

    @classmethod
    def scaled(
        cls,
        times: Iterable[float],
        theta: float,
        policy: StoragePolicy = StoragePolicy.ALL,
    ) -> "EventSchedule":
        """Schedule for macroscopic times t, observed at t * theta."""
        return cls([t * theta for t in times], policy)

    @property
    def horizon(self) -> float:
        return self.times[-1] if self.times else 0.0


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Snapshot:
    time: float
    counts: np.ndarray = attr.ib(repr=False)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SnapshotSeries:
    snapshots: list[Snapshot]
    events: int = 0

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, index: int) -> Snapshot:
        return self.snapshots[index]

    def csv_rows(self) -> list[list[Any]]:
        return [
            [snapshot.time, site, int(count)]
            for snapshot in self.snapshots
            for site, count in enumerate(snapshot.counts)
        ]

    def write_csv(self, target: output.PathOrStream) -> None:
        output.write_csv(
            target, "snapshots", ["time", "site", "count"], self.csv_rows()
        )


def _neighbours(env: environment.Environment, x: int, y: int) -> bool:
    return any(z == y for z, _, _ in env.neighbor_table[x])


def ips_rate(
    env: environment.Environment,
    a: float,
    eta: Union[Configuration, np.ndarray],
    x: int,
    y: int,
) -> float:
    """Rate at which one particle moves from x to the neighbouring site y."""
    if not _neighbours(env, x, y):
        raise exceptions.InvalidParameter(f"Sites {x} and {y} are not neighbours")
    counts = eta.counts if isinstance(eta, Configuration) else np.asarray(eta)
    alpha_x, alpha_y = float(env.alpha[x]), float(env.alpha[y])
    return (
        float(counts[x])
        * alpha_x ** (a - 1.0)
        * alpha_y**a
        * (1.0 - float(counts[y]) / alpha_y)
    )


class _Dynamics:
    """Mutable state of one Gillespie run with per-site outflow rates in a tree."""

    def __init__(
        self, env: environment.Environment, a: float, counts: np.ndarray
    ) -> None:
        alpha = env.alpha.astype(float)
        self.leave = (alpha ** (a - 1.0)).tolist()
        self.enter = (alpha**a).tolist()
        self.capacity = env.alpha.tolist()
        self.targets = [[y for y, _, _ in row] for row in env.neighbor_table]
        self.counts = [int(c) for c in counts]
        self.tree = ratetree.RateTree([self.outflow(x) for x in range(env.size)])

    def rate(self, x: int, y: int) -> float:
        vacancy = self.capacity[y] - self.counts[y]
        if not self.counts[x] or not vacancy:
            return 0.0
        flux = self.counts[x] * self.leave[x] * self.enter[y]
        return flux * vacancy / self.capacity[y]

    def outflow(self, x: int) -> float:
        if not self.counts[x]:
            return 0.0
        return math.fsum(self.rate(x, y) for y in self.targets[x])

    def choose_target(self, x: int, u: float) -> int:
        rates = [self.rate(x, y) for y in self.targets[x]]
        threshold = u * math.fsum(rates)
        running = 0.0
        for y, rate in zip(self.targets[x], rates):
            running += rate
            if rate > 0 and threshold < running:
                return y
        return next(y for y, rate in zip(self.targets[x], rates) if rate > 0)

    def move(self, x: int, y: int) -> None:
        self.counts[x] -= 1
        self.counts[y] += 1
        touched = {x, y, *self.targets[x], *self.targets[y]}
        for z in touched:
            self.tree.update(z, self.outflow(z))


def simulate_ips(
    env: environment.Environment,
    a: float,
    eta0: Configuration,
    schedule: EventSchedule,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> SnapshotSeries:
    """Exact Gillespie simulation of the exclusion dynamics.

    Raises:
      ResourceExhausted: more than max_events transitions before the last
        observation time; the snapshots taken so far are attached as partial.
    """
    if not np.array_equal(eta0.capacities, env.alpha):
        raise exceptions.InvalidParameter(
            "Configuration does not match the environment"
        )
    dynamics = _Dynamics(env, a, eta0.counts)
    draws = streams.BufferedDraws(rng)
    snapshots: list[Snapshot] = []
    pending = list(schedule.times)
    keep_all = schedule.policy == StoragePolicy.ALL
    time = 0.0
    events = 0

    def observe(at: float) -> None:
        snapshot = Snapshot(at, np.array(dynamics.counts, dtype=np.int64))
        if keep_all or not snapshots:
            snapshots.append(snapshot)
        else:
            snapshots[-1] = snapshot

    while pending:
        total = dynamics.tree.total
        arrival = time + draws.exponential() / total if total > 0 else math.inf
        while pending and pending[0] < arrival:
            observe(pending.pop(0))
        if not pending:
            break
        if events >= max_events:
            raise exceptions.ResourceExhausted(
                max_events, time, schedule.horizon, SnapshotSeries(snapshots, events)
            )
        x = dynamics.tree.find(draws.uniform() * total)
        y = dynamics.choose_target(x, draws.uniform())
        dynamics.move(x, y)
        time = arrival
        events += 1

    logging.debug("Exclusion run made %d transitions", events)
    return SnapshotSeries(snapshots, events)


def sample_binomial_profile(
    env: environment.Environment,
    rho0: btm_walker.SiteFunction,
    n: float,
    rng: np.random.Generator,
) -> Configuration:
    """Independent Binomial(alpha_x, rho0(x/n)) counts."""
    densities = btm_walker.site_values(rho0, env, n)
    if np.any(densities < 0.0) or np.any(densities > 1.0):
        raise exceptions.InvalidParameter("Density profile must take values in [0, 1]")
    return Configuration(rng.binomial(env.alpha, densities), env.alpha)


def _log_binomial_weights(
    states: np.ndarray, alpha: np.ndarray, rho: float
) -> np.ndarray:
    log_comb = (
        special.gammaln(alpha + 1)
        - special.gammaln(states + 1)
        - special.gammaln(alpha - states + 1)
    )
    log_weights = log_comb + states * math.log(rho)
    return (log_weights + (alpha - states) * math.log1p(-rho)).sum(axis=1)


def _exact_violation(
    env: environment.Environment, a: int, rho: fractions.Fraction, states: np.ndarray
) -> float:
    alpha = [int(v) for v in env.alpha]

    def weight(state: Sequence[int]) -> fractions.Fraction:
        value = fractions.Fraction(1)
        for count, depth in zip(state, alpha):
            value *= math.comb(depth, count) * rho**count * (1 - rho) ** (depth - count)
        return value

    def rate(state: Sequence[int], x: int, y: int) -> fractions.Fraction:
        return (
            state[x]
            * fractions.Fraction(alpha[x]) ** (a - 1)
            * fractions.Fraction(alpha[y]) ** a
            * fractions.Fraction(alpha[y] - state[y], alpha[y])
        )

    worst = 0.0
    for state in states.tolist():
        for x, y in env.edges.tolist():
            if not state[x] or state[y] == alpha[y]:
                continue
            moved = list(state)
            moved[x] -= 1
            moved[y] += 1
            forward = weight(state) * rate(state, x, y)
            backward = weight(moved) * rate(moved, y, x)
            scale = max(forward, backward)
            if scale:
                worst = max(worst, float(abs(forward - backward) / scale))
    return worst


def check_detailed_balance(
    env: environment.Environment,
    a: float,
    rho: float,
    limit: int = statespace.DEFAULT_STATE_LIMIT,
) -> float:
    """Largest relative detailed-balance violation of the binomial product law.

    Every transition eta -> eta^{x,y} of the enumerated state space is checked
    for nu(eta) r(eta, eta^{x,y}) = nu(eta^{x,y}) r(eta^{x,y}, eta). The check is
    done in exact rational arithmetic when a is 0 or 1 and the space is small.

    Raises:
      StateSpaceTooLarge: if the state space has more than `limit` states.
    """
    if not 0.0 <= rho <= 1.0:
        raise exceptions.InvalidParameter(f"Density must lie in [0, 1], got {rho}")
    codec = statespace.MixedRadix(env.alpha + 1)
    states = codec.states(limit)
    if rho in (0.0, 1.0):
        return 0.0

    if a in (0, 1) and codec.size <= EXACT_STATE_LIMIT:
        return _exact_violation(env, int(a), fractions.Fraction(rho), states)

    alpha = env.alpha.astype(float)
    log_weights = _log_binomial_weights(states, env.alpha, rho)
    worst = 0.0
    for x, y in env.edges.tolist():
        movable = (states[:, x] > 0) & (states[:, y] < env.alpha[y])
        if not movable.any():
            continue
        source = states[movable]
        target = source.copy()
        target[:, x] -= 1
        target[:, y] += 1
        forward_rate = (
            source[:, x] * alpha[x] ** (a - 1) * alpha[y] ** a
            * (1.0 - source[:, y] / alpha[y])
        )
        backward_rate = (
            target[:, y] * alpha[y] ** (a - 1) * alpha[x] ** a
            * (1.0 - target[:, x] / alpha[x])
        )
        forward = np.exp(log_weights[movable]) * forward_rate
        backward = np.exp(_log_binomial_weights(target, env.alpha, rho)) * backward_rate
        scale = np.maximum(forward, backward)
        valid = scale > 0
        if valid.any():
            gaps = np.abs(forward - backward)[valid] / scale[valid]
            worst = max(worst, float(gaps.max()))
    return worst


def falling_factorial(counts: np.ndarray, sites: Sequence[int]) -> int:
    """eta(x_1) (eta(x_2) - 1{x_2 = x_1}) ... for the ordered tuple of sites."""
    value = 1
    for position, site in enumerate(sites):
        repeats = sum(1 for earlier in sites[:position] if earlier == site)
        value *= int(counts[site]) - repeats
        if value <= 0:
            return 0
    return value


def falling_factorial_moment(
    snapshots: Iterable[Union[Snapshot, Configuration, np.ndarray]],
    sites: Sequence[int],
) -> common.Estimate:
    """Monte Carlo estimate of E[eta(x_1..x_k)] over an ensemble of snapshots."""
    if not 1 <= len(sites) <= 3:
        raise exceptions.InvalidParameter("Falling factorials are limited to k <= 3")
    values = []
    for item in snapshots:
        counts = item.counts if isinstance(item, (Snapshot, Configuration)) else item
        values.append(falling_factorial(counts, sites))
    return common.estimate(values)
