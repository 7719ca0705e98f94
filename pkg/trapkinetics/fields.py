# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Rescaled particle fields and their reference values.

The density field pairs a configuration with a test function at weight
n^(-d/beta) per particle, the frequency field at weight n^(-d) / alpha_x.
Observation times are macroscopic; the particle system runs for t * theta_n.
"""

import logging
import math
from collections.abc import Sequence
from typing import Any, Optional, Union

import attr
import numpy as np

from trapkinetics import (
    btm_walker,
    common,
    environment,
    exceptions,
    exclusion_ips,
    fractional,
)
from trapkinetics.exclusion_ips import Configuration, Snapshot, SnapshotSeries
from trapkinetics.support import output

EXACT_MODE = "exact"
MONTE_CARLO_MODE = "monte-carlo"

DEFAULT_REFERENCE_REPLICAS = 200
DEFAULT_FRACTIONAL_STEPS = 200

State = Union[Configuration, Snapshot, np.ndarray]


def theta_n(n: float, d: int, beta: float) -> float:
    """Time scale of the particle system at spatial scale n.

    n^(2/beta) in d >= 3, n^(2/beta) (log n)^(1 - 1/beta) in d = 2 and
    n^(1 + 1/beta) in d = 1.
    """
    if d < 1:
        raise exceptions.InvalidParameter(f"Unsupported dimension {d}")
    if d == 2 and n < 2:
        raise exceptions.InvalidParameter(f"The d = 2 time scale needs n >= 2, got {n}")
    if n < 1:
        raise exceptions.InvalidParameter(f"Scale must be >= 1, got {n}")
    if d == 1:
        return float(n) ** (1.0 + 1.0 / beta)
    scale = float(n) ** (2.0 / beta)
    if d == 2:
        scale *= math.log(n) ** (1.0 - 1.0 / beta)
    return scale


@attr.s(auto_attribs=True, frozen=True)
class ScalingSpec:
    n: int = attr.ib(validator=attr.validators.ge(2))
    d: int = attr.ib(validator=attr.validators.in_(environment.SUPPORTED_DIMENSIONS))
    beta: float = attr.ib(converter=float)

    def __attrs_post_init__(self) -> None:
        theta_n(self.n, self.d, self.beta)

    @property
    def theta_n(self) -> float:
        return theta_n(self.n, self.d, self.beta)

    @property
    def density_weight(self) -> float:
        return float(self.n) ** (-self.d / self.beta)

    @property
    def frequency_weight(self) -> float:
        return float(self.n) ** (-self.d)

    def physical_times(self, times: Sequence[float]) -> list[float]:
        return [t * self.theta_n for t in times]


def geometric_times(t1: float, count: int) -> list[float]:
    """The observation grid 0, t1, 2 t1, 4 t1, ... with count entries."""
    if t1 <= 0 or count < 1:
        raise exceptions.InvalidParameter("Need t1 > 0 and at least one time")
    return [0.0] + [t1 * 2.0**k for k in range(count - 1)]


def _counts(state: State) -> np.ndarray:
    if isinstance(state, (Configuration, Snapshot)):
        return np.asarray(state.counts, dtype=float)
    return np.asarray(state, dtype=float)


def density_pair(
    snapshot: State,
    env: environment.Environment,
    n: float,
    f: btm_walker.SiteFunction,
) -> float:
    """<X^n|f> = n^(-d/beta) sum_x eta(x) f(x/n)."""
    values = btm_walker.site_values(f, env, n)
    weight = float(n) ** (-env.d / env.beta)
    return weight * float(np.dot(_counts(snapshot), values))


def frequency_pair(
    snapshot: State,
    env: environment.Environment,
    n: float,
    f: btm_walker.SiteFunction,
) -> float:
    """<Z^n|f> = n^(-d) sum_x (eta(x) / alpha_x) f(x/n)."""
    values = btm_walker.site_values(f, env, n)
    densities = _counts(snapshot) / env.alpha
    return float(n) ** (-env.d) * float(np.dot(densities, values))


def frequency_from_density(
    snapshot: State,
    env: environment.Environment,
    n: float,
    f: btm_walker.SiteFunction,
) -> float:
    """The frequency pairing rewritten as n^(d(1/beta - 1)) <X^n|f / alpha>."""
    weighted = btm_walker.site_values(f, env, n) / env.alpha
    return float(n) ** (env.d * (1.0 / env.beta - 1.0)) * density_pair(
        snapshot, env, n, weighted
    )


def saturation_bounds(
    env: environment.Environment, n: float, f: btm_walker.SiteFunction
) -> tuple[float, float]:
    """Upper bounds (<W^n|f>, n^(-d) sum_x f(x/n)) of the two pairings for f >= 0."""
    values = btm_walker.site_values(f, env, n)
    return (
        density_pair(env.alpha, env, n, values),
        float(n) ** (-env.d) * float(values.sum()),
    )


@attr.s(auto_attribs=True, frozen=True)
class FieldSample:
    """One row of field output: both pairings for a replica at one time."""

    n: int
    t: float
    f_id: str
    replica: int
    X: float
    Z: float

    def csv_row(self) -> list[Any]:
        return [self.n, self.t, self.f_id, self.replica, self.X, self.Z]


FIELD_COLUMNS = ["n", "t", "f_id", "replica", "X_pair", "Z_pair"]


def field_samples(
    series: SnapshotSeries,
    env: environment.Environment,
    n: int,
    times: Sequence[float],
    functions: Sequence[common.TestFunction],
    replica: int,
) -> list[FieldSample]:
    """Pairs every snapshot of a run, taken at times * theta_n, with each function."""
    if len(series) != len(times):
        raise exceptions.InvalidParameter(
            f"Run has {len(series)} snapshots for {len(times)} observation times"
        )
    samples = []
    for t, snapshot in zip(times, series.snapshots):
        for f in functions:
            values = btm_walker.site_values(f, env, n)
            samples.append(
                FieldSample(
                    n,
                    float(t),
                    f.identifier,
                    replica,
                    density_pair(snapshot, env, n, values),
                    frequency_pair(snapshot, env, n, values),
                )
            )
    return samples


def write_field_samples(
    target: output.PathOrStream, samples: Sequence[FieldSample]
) -> None:
    output.write_csv(
        target, "field-samples", FIELD_COLUMNS, [s.csv_row() for s in samples]
    )


def read_field_samples(source: output.PathOrStream) -> list[FieldSample]:
    _, rows = output.read_csv(source)
    return [
        FieldSample(
            int(row["n"]),
            float(row["t"]),
            row["f_id"],
            int(row["replica"]),
            float(row["X_pair"]),
            float(row["Z_pair"]),
        )
        for row in rows
    ]


def semigroup_values(
    env: environment.Environment,
    a: float,
    n: int,
    t: float,
    g: btm_walker.SiteFunction,
    rng: Optional[np.random.Generator] = None,
    replicas: int = DEFAULT_REFERENCE_REPLICAS,
    solver: str = "explicit",
) -> tuple[np.ndarray, str]:
    """P^n_t g on every site, with the mode it was computed in.

    Uses the forward solver when the box permits; otherwise, given a random
    generator, a walker average of `replicas` paths from every site.
    """
    values = btm_walker.site_values(g, env, n)
    if t == 0:
        return values, EXACT_MODE
    try:
        solved = btm_walker.solve_one_particle_forward(env, a, n, [t], values, solver)
        return solved[0], EXACT_MODE
    except (exceptions.StateSpaceTooLarge, exceptions.StiffnessFailure) as error:
        if rng is None:
            raise
        logging.info("Forward solver unavailable (%s), using walker averages", error)
    time = t * theta_n(n, env.d, env.beta)
    estimates = [
        btm_walker.estimate_expectation(env, a, values, x, time, replicas, rng).mean
        for x in range(env.size)
    ]
    return np.array(estimates), MONTE_CARLO_MODE


@attr.s(auto_attribs=True, frozen=True)
class Reference:
    """A deterministic reference value and how it was obtained."""

    value: float
    mode: str


def mean_reference(
    env: environment.Environment,
    a: float,
    n: int,
    t: float,
    rho0: btm_walker.SiteFunction,
    f: btm_walker.SiteFunction,
    rng: Optional[np.random.Generator] = None,
    replicas: int = DEFAULT_REFERENCE_REPLICAS,
) -> Reference:
    """<P^n_t rho0 W^n|f> = n^(-d/beta) sum_x alpha_x (P^n_t rho0)(x) f(x/n).

    This is the expected density pairing under a product initial law with
    profile rho0.
    """
    evolved, mode = semigroup_values(env, a, n, t, rho0, rng, replicas)
    values = btm_walker.site_values(f, env, n)
    return Reference(density_pair(env.alpha * evolved, env, n, values), mode)


def frequency_reference(
    env: environment.Environment,
    n: int,
    t: float,
    rho0: fractional.Profile,
    f: btm_walker.SiteFunction,
    d_eff: float = 1.0,
    steps: int = DEFAULT_FRACTIONAL_STEPS,
    rng: Optional[np.random.Generator] = None,
) -> Reference:
    """Riemann sum n^(-d) sum_x (Q_t rho0)(x/n) f(x/n) of the limiting profile.

    In d = 1, Q is the quasi-diffusion with speed measure W^n, computed on
    the atoms of W^n. In d >= 2, Q solves the fractional kinetics equation
    with diffusivity d_eff on the lattice nodes at scale n.
    """
    values = btm_walker.site_values(f, env, n)
    initial = btm_walker.site_values(rho0, env, n)
    weight = float(n) ** (-env.d)
    if t == 0:
        return Reference(weight * float(np.dot(initial, values)), EXACT_MODE)
    if env.d == 1:
        chain = fractional.build_fin_chain(environment.rescaled_measure(env, n))
        # Atoms are the sites in increasing coordinate order.
        order = np.argsort(env.coordinates[:, 0], kind="stable")
        evolved = np.empty(env.size)
        evolved[order] = fractional.fin_semigroup(chain, initial[order], t, rng=rng)
        exact = len(chain) <= fractional.DEFAULT_EXACT_LIMIT
        mode = EXACT_MODE if exact else MONTE_CARLO_MODE
        return Reference(weight * float(np.dot(evolved, values)), mode)
    grid = fractional.Grid.for_environment(env, n)
    solution = fractional.fke_solve_l1(grid, env.beta, d_eff, initial, t / steps, steps)
    return Reference(weight * float(np.dot(solution[-1], values)), EXACT_MODE)


@attr.s(auto_attribs=True, frozen=True)
class Decomposition:
    """Martingale decomposition of the density field at one time.

    Attributes:
      field: the density pairing <X^n_t|f> over replicas.
      martingale: I, the field minus its mean given the initial state.
      initial: II, the initial fluctuation <W^n|(D_0 - rho0) P_t f>.
      profile_error: III, zero for product initial laws matching rho0.
      mean: the deterministic term <P_t rho0 W^n|f>.
      martingale_variance: sample variance of I over the runs.
      initial_sample_variance: sample variance of II over the runs.
      initial_variance: the exact variance of II for binomial initial laws.
      martingale_bound: n^(-d/beta) E<X^n_0|P_t f^2 - (P_t f)^2>, bounding Var(I).
      mode: how the semigroup was evaluated.
    """

    n: int
    t: float
    f_id: str
    field: common.Estimate
    martingale: common.Estimate
    initial: common.Estimate
    profile_error: float
    mean: float
    martingale_variance: float
    initial_sample_variance: float
    initial_variance: float
    martingale_bound: common.Estimate
    mode: str

    def as_record(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "n": self.n,
            "t": self.t,
            "f_id": self.f_id,
            "mode": self.mode,
            "III": self.profile_error,
            "mean_term": self.mean,
            "var_I": self.martingale_variance,
            "var_I_bound": self.martingale_bound.mean,
            "var_I_bound_se": self.martingale_bound.se,
            "var_II": self.initial_sample_variance,
            "var_II_exact": self.initial_variance,
        }
        for name, value in (
            ("X", self.field),
            ("I", self.martingale),
            ("II", self.initial),
        ):
            record[name] = value.mean
            record[f"{name}_se"] = value.se
        return record


def _endpoints(
    series: SnapshotSeries, horizon: float
) -> tuple[np.ndarray, np.ndarray]:
    if not len(series) or series[0].time != 0.0:
        raise exceptions.InvalidParameter("Runs must be observed at time 0")
    last = series[len(series) - 1]
    if not math.isclose(last.time, horizon, rel_tol=1e-9, abs_tol=1e-12):
        raise exceptions.InvalidParameter(
            f"Last snapshot at {last.time}, expected {horizon}"
        )
    return _counts(series[0]), _counts(last)


def decomposition_diagnostics(
    ensemble: Sequence[SnapshotSeries],
    env: environment.Environment,
    n: int,
    t: float,
    f: common.TestFunction,
    rho0: btm_walker.SiteFunction,
    a: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Decomposition:
    """Splits the density pairing at time t into I + II + III + mean.

    Every run must start from a product Binomial(alpha_x, rho0(x/n)) law and
    be observed at time 0 and at t * theta_n. By reversibility of the walker
    with respect to alpha, the mean of the field given eta_0 is
    <X^n_0|P^n_t f>, so one semigroup evaluation serves every replica.
    """
    if not ensemble:
        raise exceptions.InvalidParameter("Need at least one run")
    horizon = t * theta_n(n, env.d, env.beta)
    values = btm_walker.site_values(f, env, n)
    profile = btm_walker.site_values(rho0, env, n)
    evolved, mode = semigroup_values(env, a, n, t, values, rng)
    evolved_square, _ = semigroup_values(env, a, n, t, values**2, rng)
    weight = float(n) ** (-env.d / env.beta)

    fields, martingales, initials, bounds = [], [], [], []
    for series in ensemble:
        start, end = _endpoints(series, horizon)
        field = weight * float(np.dot(end, values))
        conditional = weight * float(np.dot(start, evolved))
        fields.append(field)
        martingales.append(field - conditional)
        initials.append(
            weight * float(np.dot(start - env.alpha * profile, evolved))
        )
        spread = float(np.dot(start, evolved_square - evolved**2))
        bounds.append(weight * weight * spread)

    mean = weight * float(np.dot(env.alpha * profile, evolved))
    initial_variance = weight**2 * float(
        np.dot(env.alpha * profile * (1.0 - profile), evolved**2)
    )
    logging.debug(
        "Decomposition at n=%d t=%g over %d runs (%s)", n, t, len(ensemble), mode
    )
    return Decomposition(
        n=n,
        t=t,
        f_id=f.identifier,
        field=common.estimate(fields),
        martingale=common.estimate(martingales),
        initial=common.estimate(initials),
        profile_error=0.0,
        mean=mean,
        martingale_variance=_variance(martingales),
        initial_sample_variance=_variance(initials),
        initial_variance=initial_variance,
        martingale_bound=common.estimate(bounds),
        mode=mode,
    )


def _variance(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.var(values, ddof=1))


def observation_times(times: Sequence[float]) -> list[float]:
    """Macroscopic observation times, always starting at 0."""
    positive = sorted({float(t) for t in times if t > 0})
    return [0.0] + positive


def simulate_ensemble(
    env: environment.Environment,
    a: float,
    n: int,
    times: Sequence[float],
    rho0: btm_walker.SiteFunction,
    replicas: int,
    rng: np.random.Generator,
    max_events: int = exclusion_ips.DEFAULT_MAX_EVENTS,
) -> list[SnapshotSeries]:
    """Independent runs from Binomial(alpha_x, rho0(x/n)) starts.

    Every run is observed at observation_times(times) * theta_n.
    """
    if replicas < 1:
        raise exceptions.InvalidParameter(f"Need at least one replica, got {replicas}")
    schedule = exclusion_ips.EventSchedule.scaled(
        observation_times(times), theta_n(n, env.d, env.beta)
    )
    ensemble = []
    for replica in range(replicas):
        start = exclusion_ips.sample_binomial_profile(env, rho0, n, rng)
        series = exclusion_ips.simulate_ips(env, a, start, schedule, rng, max_events)
        logging.debug(
            "Replica %d at n=%d made %d transitions", replica, n, series.events
        )
        ensemble.append(series)
    return ensemble


def at_time(series: SnapshotSeries, index: int) -> SnapshotSeries:
    """The run restricted to its first snapshot and the one at `index`."""
    return SnapshotSeries([series[0], series[index]], series.events)
