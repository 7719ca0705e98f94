# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Exact finite-state certification of the self-duality relations.

On boxes small enough to enumerate every configuration, both sides of

    E_eta[eta_t(x)] = alpha_x sum_y p_t(x, y) eta(y) / alpha_y

and of its two-particle analogue are computed with independent matrix
exponentials: the left side from the generator of the whole particle system,
the right side from the generator of one or two labeled dual particles.
"""

import enum
import logging
from collections.abc import Sequence
from typing import Any, Optional, Union

import attr
import numpy as np
from scipy import sparse

from trapkinetics import btm_walker, environment, exceptions, fields
from trapkinetics.exclusion_ips import Configuration
from trapkinetics.support import markov, output, statespace, streams

DEFAULT_TOLERANCE = 1e-10
BATTERY_CASES = 200
BATTERY_SEED = 20240611

Codec = Union[statespace.MixedRadix, statespace.ListCodec]


@attr.s(auto_attribs=True, frozen=True, eq=False)
class GeneratorMatrix:
    """A rate matrix over an enumerated state space."""

    matrix: sparse.csr_matrix
    codec: Codec

    def __attrs_post_init__(self) -> None:
        markov.check_generator(self.matrix)

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def transitions(self) -> int:
        """Number of non-zero off-diagonal rates."""
        off = self.matrix - sparse.diags(self.matrix.diagonal())
        off.eliminate_zeros()
        return int(off.nnz)

    def block_sizes(self) -> dict[int, int]:
        """Number of configurations with each total particle count."""
        if not isinstance(self.codec, statespace.MixedRadix):
            raise TypeError("Block sizes are defined for configuration spaces only")
        totals = self.codec.states().sum(axis=1)
        values, counts = np.unique(totals, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def build_full_generator(
    env: environment.Environment,
    a: float,
    limit: int = statespace.DEFAULT_STATE_LIMIT,
) -> GeneratorMatrix:
    """The generator of the exclusion dynamics on all configurations of the box.

    Raises:
      StateSpaceTooLarge: if prod(alpha_x + 1) exceeds limit.
    """
    codec = statespace.MixedRadix(env.alpha + 1)
    states = codec.states(limit)
    strides = codec.strides
    alpha = env.alpha.astype(float)
    index = np.arange(codec.size, dtype=np.int64)

    rows, columns, rates = [], [], []
    for x, y in env.edges.tolist():
        movable = (states[:, x] > 0) & (states[:, y] < env.alpha[y])
        source = index[movable]
        rows.append(source)
        columns.append(source - strides[x] + strides[y])
        rates.append(
            states[movable, x]
            * alpha[x] ** (a - 1.0)
            * alpha[y] ** a
            * (1.0 - states[movable, y] / alpha[y])
        )
    matrix = markov.from_rates(
        codec.size,
        np.concatenate(rows) if rows else np.empty(0),
        np.concatenate(columns) if columns else np.empty(0),
        np.concatenate(rates) if rates else np.empty(0),
    )
    logging.debug("Assembled full generator with %d states", codec.size)
    return GeneratorMatrix(matrix, codec)


def build_kparticle_generator(
    env: environment.Environment, a: float, k: int
) -> GeneratorMatrix:
    """The generator of k labeled interacting particles, k in {1, 2}.

    A particle at x jumps to a neighbour y at rate
    alpha_x^(a-1) alpha_y^a (1 - m(y)/alpha_y), m(y) counting the other
    particles at y.
    """
    if k not in (1, 2):
        raise exceptions.InvalidParameter(f"Only one or two dual particles, got {k}")
    codec = statespace.labeled_positions(env.alpha.tolist(), k)
    alpha = env.alpha.astype(float)
    rows, columns, rates = [], [], []
    for source, positions in enumerate(codec.states):
        for particle, x in enumerate(positions):
            for y, _, _ in env.neighbor_table[x]:
                others = sum(
                    1 for j, z in enumerate(positions) if j != particle and z == y
                )
                if others >= env.alpha[y]:
                    continue
                moved = list(positions)
                moved[particle] = y
                rows.append(source)
                columns.append(codec.encode(moved))
                rates.append(
                    alpha[x] ** (a - 1.0) * alpha[y] ** a * (1.0 - others / alpha[y])
                )
    matrix = markov.from_rates(codec.size, rows, columns, rates)
    return GeneratorMatrix(matrix, codec)


def kparticle_weights(
    env: environment.Environment, codec: statespace.ListCodec
) -> np.ndarray:
    """alpha(x_1..x_k) = alpha_{x_1} (alpha_{x_2} - 1{x_2 = x_1}) ... per state."""
    capacities = env.alpha.astype(np.int64)
    return np.array(
        [falling_weight(capacities, positions) for positions in codec.states],
        dtype=float,
    )


def falling_weight(values: np.ndarray, sites: Sequence[int]) -> int:
    value = 1
    for position, site in enumerate(sites):
        repeats = sum(1 for earlier in sites[:position] if earlier == site)
        value *= int(values[site]) - repeats
    return value


def kparticle_reversibility(env: environment.Environment, a: float, k: int) -> float:
    """Relative detailed-balance violation of the k-particle chain."""
    dual = build_kparticle_generator(env, a, k)
    assert isinstance(dual.codec, statespace.ListCodec)
    weights = kparticle_weights(env, dual.codec)
    return markov.reversibility_violation(dual.matrix, weights)


class Status(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    UNDEFINED = "undefined"


@attr.s(auto_attribs=True, frozen=True)
class DualityReport:
    """Outcome of one duality check; status is PASS exactly when gap <= tolerance."""

    relation: str
    lhs: float
    rhs: float
    tolerance: float
    status: Status
    provenance: dict[str, Any] = attr.Factory(dict)

    @property
    def gap(self) -> float:
        if self.status == Status.UNDEFINED:
            return float("nan")
        return abs(self.lhs - self.rhs)

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.gap / scale if scale > 0 else self.gap

    @property
    def passed(self) -> bool:
        return self.status == Status.PASS

    def as_record(self) -> dict[str, Any]:
        defined = self.status != Status.UNDEFINED
        return {
            "relation": self.relation,
            "lhs": self.lhs if defined else None,
            "rhs": self.rhs if defined else None,
            "gap": self.gap if defined else None,
            "relative_gap": self.relative_gap if defined else None,
            "tolerance": self.tolerance,
            "status": self.status.value,
            **self.provenance,
        }


def _report(
    relation: str, lhs: float, rhs: float, tolerance: float, **provenance: Any
) -> DualityReport:
    status = Status.PASS if abs(lhs - rhs) <= tolerance else Status.FAIL
    return DualityReport(
        relation, float(lhs), float(rhs), tolerance, status, provenance
    )


def _counts(eta: Union[Configuration, np.ndarray, Sequence[int]]) -> np.ndarray:
    if isinstance(eta, Configuration):
        return eta.counts
    return np.asarray(eta, dtype=np.int64)


def _dual_semigroup(
    dual: GeneratorMatrix, t: float, method: str
) -> np.ndarray:
    if method == "pade":
        return markov.transition_matrix(dual.matrix, t)
    if method == "uniformization":
        return markov.uniformized_matrix(dual.matrix, t)
    raise exceptions.InvalidParameter(f"Unknown matrix exponential method {method!r}")


def expected_falling_factorial(
    env: environment.Environment,
    a: float,
    eta: Union[Configuration, np.ndarray, Sequence[int]],
    sites: Sequence[int],
    t: float,
    method: str = "pade",
) -> float:
    """E_eta[eta_t(x_1..x_k)] for k <= 2, from the labeled k-particle chain.

    Raises:
      UndefinedDuality: for (x, x) on a site with a single slot.
    """
    counts = _counts(eta)
    sites = tuple(int(s) for s in sites)
    dual = build_kparticle_generator(env, a, len(sites))
    assert isinstance(dual.codec, statespace.ListCodec)
    if sites not in dual.codec:
        raise exceptions.UndefinedDuality(sites[0])
    weights = kparticle_weights(env, dual.codec)
    observed = np.array(
        [falling_weight(counts, positions) for positions in dual.codec.states],
        dtype=float,
    )
    row = _dual_semigroup(dual, t, method)[dual.codec.encode(sites)]
    return float(falling_weight(env.alpha, sites) * np.dot(row, observed / weights))


def _full_expectation(
    full: GeneratorMatrix, observable: np.ndarray, counts: np.ndarray, t: float
) -> float:
    assert isinstance(full.codec, statespace.MixedRadix)
    evolved = markov.expm_action(full.matrix, observable, t)
    return float(evolved[full.codec.encode(counts)])


def verify_duality_one(
    env: environment.Environment,
    a: float,
    eta: Union[Configuration, np.ndarray, Sequence[int]],
    x: int,
    t: float,
    tolerance: float = DEFAULT_TOLERANCE,
    full: Optional[GeneratorMatrix] = None,
    method: str = "pade",
) -> DualityReport:
    """Checks E_eta[eta_t(x)] = alpha_x sum_y p_t(x, y) eta(y) / alpha_y."""
    counts = _counts(eta)
    Configuration(counts, env.alpha)
    full = full or build_full_generator(env, a)
    assert isinstance(full.codec, statespace.MixedRadix)
    lhs = _full_expectation(full, full.codec.states()[:, x].astype(float), counts, t)
    rhs = expected_falling_factorial(env, a, counts, (x,), t, method)
    return _report(
        "one", lhs, rhs, tolerance, eta=counts.tolist(), sites=[x], t=t, a=a
    )


def verify_duality_two(
    env: environment.Environment,
    a: float,
    eta: Union[Configuration, np.ndarray, Sequence[int]],
    x: int,
    y: int,
    t: float,
    tolerance: float = DEFAULT_TOLERANCE,
    full: Optional[GeneratorMatrix] = None,
    method: str = "pade",
) -> DualityReport:
    """Checks the two-particle relation for E_eta[eta_t(x)(eta_t(y) - 1{x=y})].

    When x = y and alpha_x = 1 the duality function divides by zero; the report
    then has status UNDEFINED and no values.
    """
    counts = _counts(eta)
    Configuration(counts, env.alpha)
    provenance = {"eta": counts.tolist(), "sites": [x, y], "t": t, "a": a}
    try:
        rhs = expected_falling_factorial(env, a, counts, (x, y), t, method)
    except exceptions.UndefinedDuality as error:
        logging.debug("Skipping undefined case: %s", error)
        return DualityReport(
            "two", float("nan"), float("nan"), tolerance, Status.UNDEFINED, provenance
        )
    full = full or build_full_generator(env, a)
    assert isinstance(full.codec, statespace.MixedRadix)
    states = full.codec.states()
    observable = (states[:, x] * (states[:, y] - (1 if x == y else 0))).astype(float)
    lhs = _full_expectation(full, observable, counts, t)
    return _report("two", lhs, rhs, tolerance, **provenance)


@attr.s(auto_attribs=True, frozen=True)
class VarianceReport:
    lhs: float
    rhs: float
    tolerance: float = DEFAULT_TOLERANCE
    case: Optional[int] = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -self.tolerance


def verify_variance_bound(
    env: environment.Environment,
    a: float,
    eta: Union[Configuration, np.ndarray, Sequence[int]],
    f: np.ndarray,
    n: int,
    t: float,
    tolerance: float = DEFAULT_TOLERANCE,
) -> VarianceReport:
    """Exact check of the negative-dependence variance bound.

    With X_t = n^(-d/beta) sum_x eta_{t theta_n}(x) f(x) and P the one-particle
    semigroup at time t theta_n, verifies

        E_eta[(X_t - n^(-d/beta) sum_x eta(x) Pf(x))^2]
            <= n^(-2d/beta) sum_x eta(x) (P f^2 - (P f)^2)(x).

    Both moments of the field come from the one- and two-particle dual chains.
    """
    counts = _counts(eta).astype(float)
    Configuration(counts.astype(np.int64), env.alpha)
    f = np.asarray(f, dtype=float)
    time = t * fields.theta_n(n, env.d, env.beta)
    scale = float(n) ** (-env.d / env.beta)

    single = markov.transition_matrix(btm_walker.generator(env, a), time)
    density = single @ (counts / env.alpha)
    first = env.alpha * density
    pf = single @ f
    centre = float(np.dot(counts, pf))

    pair = build_kparticle_generator(env, a, 2)
    assert isinstance(pair.codec, statespace.ListCodec)
    weights = kparticle_weights(env, pair.codec)
    observed = np.array(
        [falling_weight(counts.astype(np.int64), s) for s in pair.codec.states],
        dtype=float,
    )
    law = markov.transition_matrix(pair.matrix, time)
    second = weights * (law @ (observed / weights))
    products = np.array([f[u] * f[v] for u, v in pair.codec.states])

    mean_field = float(np.dot(first, f))
    mean_square = float(np.dot(second, products) + np.dot(first, f**2))
    lhs = scale**2 * (mean_square - 2.0 * centre * mean_field + centre**2)
    rhs = scale**2 * float(np.dot(counts, single @ f**2 - pf**2))
    return VarianceReport(lhs, rhs, tolerance)


def semigroup_defect(
    env: environment.Environment, a: float, s: float, t: float
) -> float:
    """Sup-norm semigroup defect of the full generator on a small box."""
    return markov.semigroup_defect(build_full_generator(env, a).matrix, s, t)


@attr.s(auto_attribs=True, frozen=True)
class BatteryCase:
    case: int
    env: environment.Environment
    a: float
    t: float
    eta: np.ndarray
    x: int
    y: int
    f: np.ndarray


def battery_case(seed: int, case: int) -> BatteryCase:
    """Draws one random small-box case; boxes have 2 or 3 sites and depths <= 3."""
    rng = streams.generator(seed, case)
    sites = int(rng.integers(2, 4))
    depths = rng.integers(1, 4, size=sites)
    env = environment.Environment.from_depths(depths, seed=seed)
    eta = rng.integers(0, depths + 1)
    return BatteryCase(
        case=case,
        env=env,
        a=float(rng.choice([0.0, 0.5, 1.0])),
        t=float(2.0 * (1.0 - rng.random())),
        eta=eta,
        x=int(rng.integers(sites)),
        y=int(rng.integers(sites)),
        f=rng.random(sites),
    )


@attr.s(auto_attribs=True, frozen=True)
class BatteryResult:
    reports: list[DualityReport]
    variance: list[VarianceReport]

    @property
    def passed(self) -> int:
        return sum(1 for report in self.reports if report.passed)

    @property
    def failed(self) -> int:
        return sum(1 for report in self.reports if report.status == Status.FAIL)

    @property
    def undefined(self) -> int:
        return sum(1 for report in self.reports if report.status == Status.UNDEFINED)

    @property
    def variance_violations(self) -> int:
        return sum(1 for report in self.variance if not report.holds)

    def write_json_lines(self, path: Any) -> None:
        output.write_json_lines(path, [report.as_record() for report in self.reports])


def run_battery(
    cases: int = BATTERY_CASES,
    seed: int = BATTERY_SEED,
    tolerance: float = DEFAULT_TOLERANCE,
    first_case: int = 0,
) -> BatteryResult:
    """Runs the randomized duality battery; every case checks both relations."""
    reports = []
    variance = []
    for case in range(first_case, first_case + cases):
        draw = battery_case(seed, case)
        full = build_full_generator(draw.env, draw.a)
        one = verify_duality_one(
            draw.env, draw.a, draw.eta, draw.x, draw.t, tolerance, full
        )
        two = verify_duality_two(
            draw.env, draw.a, draw.eta, draw.x, draw.y, draw.t, tolerance, full
        )
        for report in (one, two):
            provenance = {"case": case, **report.provenance}
            reports.append(attr.evolve(report, provenance=provenance))
        theta = fields.theta_n(2, draw.env.d, draw.env.beta)
        bound = verify_variance_bound(
            draw.env, draw.a, draw.eta, draw.f, 2, draw.t / theta, tolerance
        )
        variance.append(attr.evolve(bound, case=case))
        logging.debug("Battery case %d: %s %s", case, one.status, two.status)
    return BatteryResult(reports, variance)
