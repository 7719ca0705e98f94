# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""The single Bouchaud trap walker BTM(a) and its constant-speed representation.

The walker jumps from x to a neighbour y at rate alpha_x^(a-1) alpha_y^a. The
same trajectory is obtained from the random conductance chain Y, jumping at
rate alpha_x^a alpha_y^a, through the clock S_t = int_0^t alpha_{Y_s} ds:
X_t = Y_{S^-1(t)}.
"""

import bisect
import logging
import math
from collections.abc import Sequence
from typing import Any, Callable, Optional, Union

import attr
import numpy as np
from scipy import integrate, sparse, special

from trapkinetics import common, environment, exceptions
from trapkinetics.support import markov, output, streams

DEFAULT_MAX_EVENTS = 10**8
DEFAULT_MAX_SITES = 10**4
# Matrix-vector products the explicit forward solver may spend per call.
DEFAULT_SOLVER_BUDGET = 10**7
# A forward solution may leave the range of its data by this many tolerances.
EXCURSION_FACTOR = 100.0

SiteFunction = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def btm_rates(
    env: environment.Environment, a: float, x: int
) -> list[tuple[int, float]]:
    """Jump rates out of site x, as (neighbour, rate) pairs."""
    _check_a(a)
    alpha = env.alpha
    return [
        (y, float(alpha[x]) ** (a - 1.0) * float(alpha[y]) ** a)
        for y, _, _ in env.neighbor_table[x]
    ]


def _check_a(a: float) -> None:
    if not 0.0 <= a <= 1.0:
        raise exceptions.InvalidParameter(f"Parameter a must lie in [0, 1], got {a}")


class _JumpTable:
    """Per-site exit rates and neighbour choice tables of a nearest-neighbour chain."""

    def __init__(self, env: environment.Environment, a: float, clock: bool) -> None:
        _check_a(a)
        alpha = env.alpha.astype(float)
        outgoing = alpha**a
        leaving = alpha**a if clock else alpha ** (a - 1.0)
        self.total: list[float] = []
        self.cumulative: list[list[float]] = []
        self.targets: list[list[int]] = []
        self.steps: list[list[tuple[int, int]]] = []
        for x, row in enumerate(env.neighbor_table):
            rates = [leaving[x] * outgoing[y] for y, _, _ in row]
            total = math.fsum(rates)
            running = np.cumsum(rates) / total if total > 0 else np.ones(len(rates))
            self.total.append(total)
            self.cumulative.append(running.tolist())
            self.targets.append([y for y, _, _ in row])
            self.steps.append([(axis, sign) for _, axis, sign in row])


@attr.s(auto_attribs=True, frozen=True, eq=False)
class WalkerPath:
    """A trajectory of the walker on [0, horizon].

    Attributes:
      start: the initial site.
      horizon: end of the observation window.
      times: jump times, strictly increasing.
      sites: the site entered at each jump.
      displacements: unwrapped lattice displacement from the start after each
        jump, shape (jumps, d).
    """

    start: int
    horizon: float
    times: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    sites: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=np.int64))
    displacements: np.ndarray = attr.ib(
        converter=lambda v: np.asarray(v, dtype=np.int64)
    )

    def __attrs_post_init__(self) -> None:
        if len(self.times) != len(self.sites):
            raise ValueError("Jump times and sites do not match")
        if len(self.times) and (
            np.any(np.diff(self.times) <= 0) or self.times[0] < 0
        ):
            raise ValueError("Jump times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def end_site(self) -> int:
        return int(self.sites[-1]) if len(self.sites) else self.start

    def _last_jump(self, t: float) -> int:
        return int(np.searchsorted(self.times, t, side="right")) - 1

    def position_at(self, t: float) -> int:
        index = self._last_jump(t)
        return self.start if index < 0 else int(self.sites[index])

    def displacement_at(self, t: float) -> np.ndarray:
        index = self._last_jump(t)
        if index < 0:
            return np.zeros(self.displacements.shape[1], dtype=np.int64)
        return self.displacements[index]

    def sojourns(self) -> np.ndarray:
        """Time spent at each visited site, the last one up to the horizon."""
        edges = np.concatenate([[0.0], self.times, [self.horizon]])
        return np.diff(edges)

    def visited(self) -> np.ndarray:
        return np.concatenate([[self.start], self.sites]).astype(np.int64)

    def csv_rows(self, env: environment.Environment) -> list[list[Any]]:
        rows = [[0.0, self.start, *env.coordinates[self.start].tolist()]]
        for time, site in zip(self.times, self.sites):
            rows.append([float(time), int(site), *env.coordinates[site].tolist()])
        return rows

    def write_csv(
        self, target: output.PathOrStream, env: environment.Environment
    ) -> None:
        header = ["time", "site"] + [f"x_{axis + 1}" for axis in range(env.d)]
        output.write_csv(target, "walker-path", header, self.csv_rows(env))


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ClockPath:
    """A trajectory of the conductance chain Y with its clock S.

    clock[k] is S at the k-th jump time of Y; end_clock is S at the horizon.
    """

    start: int
    horizon: float
    times: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    sites: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=np.int64))
    displacements: np.ndarray = attr.ib(
        converter=lambda v: np.asarray(v, dtype=np.int64)
    )
    clock: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    end_clock: float = 0.0

    def __attrs_post_init__(self) -> None:
        if len(self.clock) != len(self.times):
            raise ValueError("Clock values and jump times do not match")
        if len(self.clock) and np.any(np.diff(self.clock) < 0):
            raise ValueError("The clock must be non-decreasing")

    def reintegrate(self, env: environment.Environment) -> np.ndarray:
        """S at every jump time, recomputed as the integral of alpha along Y."""
        visited = np.concatenate([[self.start], self.sites[:-1]]).astype(np.int64)
        holds = np.diff(np.concatenate([[0.0], self.times]))
        return np.cumsum(env.alpha[visited] * holds)


def time_change(path: ClockPath) -> WalkerPath:
    """X = Y o S^-1, observed on [0, S(horizon)]."""
    return WalkerPath(
        start=path.start,
        horizon=path.end_clock,
        times=path.clock,
        sites=path.sites,
        displacements=path.displacements,
    )


def clock_from_walker(path: WalkerPath, env: environment.Environment) -> ClockPath:
    """Inverse of time_change(): recovers Y and S from a walker trajectory."""
    visited = path.visited()
    holds = path.sojourns() / env.alpha[visited]
    y_times = np.cumsum(holds)
    return ClockPath(
        start=path.start,
        horizon=float(y_times[-1]),
        times=y_times[:-1],
        sites=path.sites,
        displacements=path.displacements,
        clock=path.times,
        end_clock=path.horizon,
    )


@attr.s(auto_attribs=True)
class _Walk:
    stop_sites: list[int] = attr.Factory(list)
    stop_displacements: list[tuple[int, ...]] = attr.Factory(list)
    times: list[float] = attr.Factory(list)
    sites: list[int] = attr.Factory(list)
    displacements: list[tuple[int, ...]] = attr.Factory(list)
    clock: list[float] = attr.Factory(list)
    events: int = 0
    time: float = 0.0
    elapsed_clock: float = 0.0


def _walk(
    table: _JumpTable,
    x0: int,
    stops: Sequence[float],
    draws: streams.BufferedDraws,
    d: int,
    max_events: int,
    record: bool,
    depth: Optional[np.ndarray] = None,
) -> _Walk:
    """Runs a nearest-neighbour chain through the sorted observation times.

    If depth is given the clock int alpha along the path is accumulated too.
    """
    walk = _Walk()
    x = x0
    displacement = [0] * d
    stop = 0
    horizon = stops[-1] if stops else 0.0
    while True:
        rate = table.total[x]
        hold = draws.exponential() / rate if rate > 0 else math.inf
        arrival = walk.time + hold
        while stop < len(stops) and stops[stop] < arrival:
            walk.stop_sites.append(x)
            walk.stop_displacements.append(tuple(displacement))
            stop += 1
        if stop == len(stops):
            if depth is not None:
                walk.elapsed_clock += float(depth[x]) * (horizon - walk.time)
            return walk
        if walk.events >= max_events:
            raise exceptions.ResourceExhausted(max_events, walk.time, horizon, walk)

        choice = bisect.bisect_left(table.cumulative[x], draws.uniform())
        choice = min(choice, len(table.targets[x]) - 1)
        axis, sign = table.steps[x][choice]
        if depth is not None:
            walk.elapsed_clock += float(depth[x]) * hold
        x = table.targets[x][choice]
        displacement[axis] += sign
        walk.time = arrival
        walk.events += 1
        if record:
            walk.times.append(arrival)
            walk.sites.append(x)
            walk.displacements.append(tuple(displacement))
            if depth is not None:
                walk.clock.append(walk.elapsed_clock)


def _check_horizon(horizon: float) -> None:
    if not horizon >= 0:
        raise exceptions.InvalidParameter(f"Horizon must be non-negative: {horizon}")


def simulate_btm(
    env: environment.Environment,
    a: float,
    x0: int,
    horizon: float,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> WalkerPath:
    """Exact event-driven simulation of BTM(a) started at x0.

    Raises:
      ResourceExhausted: more than max_events jumps before the horizon; the
        partial path is attached to the error.
    """
    _check_horizon(horizon)
    table = _JumpTable(env, a, clock=False)
    draws = streams.BufferedDraws(rng)
    try:
        walk = _walk(table, x0, [horizon], draws, env.d, max_events, record=True)
    except exceptions.ResourceExhausted as error:
        partial = error.partial
        error.partial = WalkerPath(
            x0,
            partial.time,
            partial.times,
            partial.sites,
            np.reshape(partial.displacements, (-1, env.d)),
        )
        raise
    return WalkerPath(
        x0,
        horizon,
        walk.times,
        walk.sites,
        np.reshape(walk.displacements, (-1, env.d)),
    )


def _clock_path(walk: _Walk, x0: int, horizon: float, d: int) -> ClockPath:
    return ClockPath(
        start=x0,
        horizon=horizon,
        times=walk.times,
        sites=walk.sites,
        displacements=np.reshape(walk.displacements, (-1, d)),
        clock=walk.clock,
        end_clock=walk.elapsed_clock,
    )


def simulate_rcm_clock(
    env: environment.Environment,
    a: float,
    x0: int,
    horizon: float,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> ClockPath:
    """Simulates the conductance chain Y on [0, horizon] with its clock S.

    Raises:
      ResourceExhausted: more than max_events jumps before the horizon; the
        partial path, up to the last jump, is attached to the error.
    """
    _check_horizon(horizon)
    table = _JumpTable(env, a, clock=True)
    draws = streams.BufferedDraws(rng)
    try:
        walk = _walk(
            table, x0, [horizon], draws, env.d, max_events, record=True, depth=env.alpha
        )
    except exceptions.ResourceExhausted as error:
        error.partial = _clock_path(error.partial, x0, error.partial.time, env.d)
        raise
    return _clock_path(walk, x0, horizon, env.d)


def sample_positions(
    env: environment.Environment,
    a: float,
    x0: int,
    times: Sequence[float],
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
    replicas: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Sites and unwrapped displacements of independent walkers at the given times.

    Times must be sorted; no trajectory is stored.

    Returns:
      Sites of shape (replicas, times) and displacements of shape
      (replicas, times, d).
    """
    table = _JumpTable(env, a, clock=False)
    draws = streams.BufferedDraws(rng)
    stops = [float(t) for t in times]
    sites = np.empty((replicas, len(stops)), dtype=np.int64)
    displacements = np.empty((replicas, len(stops), env.d), dtype=np.int64)
    events = 0
    for replica in range(replicas):
        walk = _walk(table, x0, stops, draws, env.d, max_events, record=False)
        sites[replica] = walk.stop_sites
        displacements[replica] = np.reshape(walk.stop_displacements, (-1, env.d))
        events += walk.events
    logging.debug("%d walkers made %d jumps", replicas, events)
    return sites, displacements


def generator(env: environment.Environment, a: float) -> sparse.csr_matrix:
    """The generator A of BTM(a) on the box, as a sparse rate matrix."""
    _check_a(a)
    alpha = env.alpha.astype(float)
    rows, columns = env.edges[:, 0], env.edges[:, 1]
    rates = alpha[rows] ** (a - 1.0) * alpha[columns] ** a
    return markov.from_rates(env.size, rows, columns, rates)


def one_particle_law(
    env: environment.Environment, a: float, x0: int, time: float
) -> np.ndarray:
    """The law of X_time started at x0, by the matrix exponential."""
    start = np.zeros(env.size)
    start[x0] = 1.0
    return markov.expm_action(generator(env, a).T, start, time)


def site_values(g: SiteFunction, env: environment.Environment, n: float) -> np.ndarray:
    """Evaluates a function of the macroscopic position x/n at every site."""
    if isinstance(g, np.ndarray):
        if g.shape != (env.size,):
            raise ValueError(f"Expected {env.size} site values, got {g.shape}")
        return g.astype(float)
    return np.asarray(g(env.scaled_points(n)), dtype=float)


def estimate_expectation(
    env: environment.Environment,
    a: float,
    values: np.ndarray,
    x: int,
    time: float,
    replicas: int,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> common.Estimate:
    """Monte Carlo estimate of E_x[values(X_time)]."""
    if replicas < 1:
        raise exceptions.InvalidParameter(f"Need at least one replica, got {replicas}")
    sites, _ = sample_positions(env, a, x, [time], rng, max_events, replicas)
    return common.estimate(values[sites[:, 0]])


def estimate_semigroup(
    env: environment.Environment,
    a: float,
    n: int,
    t: float,
    g: SiteFunction,
    x: int,
    replicas: int,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> common.Estimate:
    """Monte Carlo estimate of P^n_t g(x/n) = E_x[g(X_{t theta_n}/n)]."""
    # fields imports this module for the forward solver.
    from trapkinetics import fields

    time = t * fields.theta_n(n, env.d, env.beta)
    values = site_values(g, env, n)
    return estimate_expectation(env, a, values, x, time, replicas, rng, max_events)


def solve_one_particle_forward(
    env: environment.Environment,
    a: float,
    n: int,
    t_grid: Sequence[float],
    rho0: SiteFunction,
    solver: str = "explicit",
    tolerance: float = 1e-8,
    max_sites: int = DEFAULT_MAX_SITES,
    budget: float = DEFAULT_SOLVER_BUDGET,
    scaled: bool = True,
) -> np.ndarray:
    """Computes P^n_t rho0 on every site for each macroscopic time in t_grid.

    The profile evolves by du/dt = A u in physical time t theta_n (or in t
    itself when scaled is False). The explicit solver is the Krylov/Taylor
    action of the exponential with adaptive step selection; the implicit
    solver integrates with BDF at the given tolerance.

    Returns:
      An array of shape (len(t_grid), sites).

    Raises:
      StateSpaceTooLarge: if the box has more than max_sites sites.
      StiffnessFailure: if the explicit solver would exceed its budget.
      NumericalFailure: if BDF fails, or the solution leaves [min rho0, max rho0]
        by more than the tolerance allows.
    """
    from trapkinetics import fields

    if env.size > max_sites:
        raise exceptions.StateSpaceTooLarge(env.size, max_sites)
    if solver not in ("explicit", "implicit"):
        raise exceptions.InvalidParameter(f"Unknown solver {solver!r}")
    times = np.asarray(t_grid, dtype=float)
    if np.any(times < 0):
        raise exceptions.InvalidParameter("Times must be non-negative")

    scale = fields.theta_n(n, env.d, env.beta) if scaled else 1.0
    physical = times * scale
    u0 = site_values(rho0, env, n)
    matrix = generator(env, a)
    low, high = float(u0.min()), float(u0.max())

    order = np.argsort(physical, kind="stable")
    result = np.empty((len(times), env.size))
    if solver == "explicit":
        work = 2.0 * markov.exit_rate(matrix) * float(physical.max(initial=0.0))
        if work > budget:
            raise exceptions.StiffnessFailure(work, budget)
        current, elapsed = u0, 0.0
        for index in order:
            current = markov.expm_action(matrix, current, physical[index] - elapsed)
            elapsed = physical[index]
            result[index] = current
    else:
        logging.info("Integrating the one-particle equation with BDF")
        solution = integrate.solve_ivp(
            lambda _, u: matrix @ u,
            (0.0, float(physical.max(initial=0.0))),
            u0,
            method="BDF",
            t_eval=np.sort(physical),
            jac=matrix,
            rtol=tolerance,
            atol=tolerance * max(1.0, abs(high)),
        )
        if not solution.success:
            raise exceptions.NumericalFailure(
                f"BDF integration failed: {solution.message}"
            )
        result[order] = solution.y.T

    # Maximum principle: the exact solution stays in [low, high].
    below = low - float(result.min(initial=low))
    excursion = max(below, float(result.max(initial=high)) - high)
    allowed = EXCURSION_FACTOR * tolerance * max(1.0, abs(low), abs(high))
    if excursion > allowed:
        raise exceptions.NumericalFailure(
            "Forward solution left the range of its initial data",
            achieved=excursion,
            tolerance=allowed,
        )
    return np.clip(result, low, high)


def boundary_mass(
    env: environment.Environment,
    a: float,
    x0: int,
    time: float,
    solver: str = "explicit",
) -> float:
    """P_x0(X_time outside |x| <= L/2), the boundary diagnostic of a box.

    By reversibility p_t(x0, y) = alpha_y p_t(y, x0) / alpha_x0, so one solve
    of the backward equation from the indicator of x0 gives the whole law.
    """
    indicator = np.zeros(env.size)
    indicator[x0] = 1.0
    (returned,) = solve_one_particle_forward(
        env, a, 1, [time], indicator, solver=solver, scaled=False
    )
    law = env.alpha * returned / env.alpha[x0]
    outside = np.abs(env.coordinates).max(axis=1) > env.L / 2.0
    return float(np.clip(law[outside].sum(), 0.0, 1.0))


@attr.s(auto_attribs=True, frozen=True)
class MsdCurve:
    """Mean squared displacement at each observation time."""

    times: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    mean: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    se: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    samples: int = 0

    @classmethod
    def from_squares(
        cls, times: Sequence[float], per_environment: Sequence[np.ndarray]
    ) -> "MsdCurve":
        """Aggregates squared displacements, one (replicas, times) array each.

        With several environments the standard error is computed from the
        per-environment means.
        """
        if len(per_environment) == 1:
            samples = np.asarray(per_environment[0], dtype=float)
        else:
            samples = np.array([squares.mean(axis=0) for squares in per_environment])
        mean = samples.mean(axis=0)
        se = np.zeros_like(mean)
        if len(samples) > 1:
            se = samples.std(axis=0, ddof=1) / math.sqrt(len(samples))
        total = sum(len(squares) for squares in per_environment)
        return cls(times, mean, se, total)

    def slope(self, t_min: float = 0.0, t_max: float = math.inf) -> float:
        window = (self.times >= t_min) & (self.times <= t_max)
        return common.fit_loglog_slope(self.times[window], self.mean[window])

    def csv_rows(self) -> list[list[float]]:
        return [[t, m, s] for t, m, s in zip(self.times, self.mean, self.se)]

    def write_csv(self, target: output.PathOrStream) -> None:
        output.write_csv(target, "msd", ["t", "msd", "se"], self.csv_rows())


def msd_curve(
    environments: Sequence[environment.Environment],
    a: float,
    times: Sequence[float],
    replicas: int,
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> MsdCurve:
    """Annealed mean squared displacement of walkers started at the origin.

    Each environment carries `replicas` walkers. Displacements are unwrapped
    across the periodic boundary.
    """
    if not environments or replicas < 1:
        raise exceptions.InvalidParameter("Need at least one environment and replica")
    order = np.argsort(times, kind="stable")
    sorted_times = [float(times[i]) for i in order]
    per_environment = []
    for env in environments:
        _, displacement = sample_positions(
            env, a, env.origin, sorted_times, rng, max_events, replicas
        )
        squares = np.empty((replicas, len(order)))
        squares[:, order] = (displacement.astype(float) ** 2).sum(axis=2)
        per_environment.append(squares)
    return MsdCurve.from_squares(times, per_environment)


def estimate_diffusivity(
    curve: MsdCurve, beta: float, d: int, t_min: float = 0.0
) -> float:
    """Least-squares D in MSD(t) = 2 d D t^beta / Gamma(1 + beta) at fixed beta."""
    window = curve.times > max(t_min, 0.0)
    if not window.any():
        raise exceptions.InvalidParameter("No positive observation times to fit")
    basis = 2.0 * d * curve.times[window] ** beta / special.gamma(1.0 + beta)
    return float(np.dot(basis, curve.mean[window]) / np.dot(basis, basis))
