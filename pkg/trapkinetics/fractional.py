# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Reference solutions for the limiting sub-diffusive dynamics.

This covers the Mittag-Leffler function, stable subordinators and the
fractional kinetics process, the L1 finite-difference scheme for the Caputo
time-fractional heat equation, and the birth-death chain approximating the
one-dimensional quasi-diffusion with an atomic speed measure.
"""

import logging
import math
from collections.abc import Sequence
from typing import Callable, Optional, Union

import attr
import mpmath
import numpy as np
from scipy import integrate, sparse, special
from scipy.sparse import linalg as sparse_linalg

from trapkinetics import btm_walker, common, environment, exceptions
from trapkinetics.support import markov, streams

SERIES_RADIUS = 5.0
# Bound on |z|^(1/beta), the log of the largest series term.
SERIES_MAGNITUDE = 60.0
# Past this u the integrand is below double precision.
PEAK_CUTOFF = 700.0
DEFAULT_TOLERANCE = 1e-10
DEFAULT_EXACT_LIMIT = 10**4
DEFAULT_MAX_EVENTS = 10**8

# Gauss-Legendre nodes per axis and per piece for Gaussian smoothing of bumps.
SMOOTHING_NODES = 64
# The Gaussian window is cut at this many standard deviations.
SMOOTHING_WINDOW = 9.0

Profile = Union[common.Profile, common.TestFunction]


def _check_index(beta: float, allow_one: bool = True) -> None:
    upper_ok = beta <= 1.0 if allow_one else beta < 1.0
    if not (beta > 0.0 and upper_ok):
        raise exceptions.InvalidParameter(f"Index beta out of range: {beta}")


def mittag_leffler_series(beta: float, z: float, tolerance: float = 1e-16) -> float:
    """sum_k z^k / Gamma(beta k + 1) in extended precision.

    The working precision grows with |z| so that the alternating terms, whose
    largest magnitude is about e^{|z|^(1/beta)}, cancel without loss.
    """
    _check_index(beta)
    magnitude = abs(z) ** (1.0 / beta) if z else 0.0
    digits = 30 + int(magnitude / math.log(10.0)) + 5
    with mpmath.workdps(digits):
        z_mp = mpmath.mpf(z)
        beta_mp = mpmath.mpf(beta)
        total = mpmath.mpf(0)
        term_bound = mpmath.mpf(tolerance) / 10
        k = 0
        while True:
            term = z_mp**k / mpmath.gamma(beta_mp * k + 1)
            total += term
            if k > magnitude and abs(term) < term_bound:
                break
            k += 1
            if k > 100000:
                raise exceptions.NumericalFailure(
                    "Mittag-Leffler series did not converge", achieved=float(abs(term))
                )
        return float(total)


def mittag_leffler_integral(
    beta: float, z: float, tolerance: float = DEFAULT_TOLERANCE
) -> float:
    """E_beta(z) for z < 0 and beta < 1 from its completely monotone representation.

        E_beta(-x) = sin(beta pi) / (pi beta)
                     * int_0^inf exp(-(s x)^(1/beta)) / (s^2 + 2 s cos(beta pi) + 1) ds

    The exponential drops on the scale s ~ 1/x, steeply when beta is small.
    Below that knee the integral is taken in s; beyond it in u = (s x)^(1/beta),
    where the integrand is beta u^(beta - 1) e^-u / x over the same denominator.
    """
    _check_index(beta, allow_one=False)
    if z >= 0:
        raise exceptions.InvalidParameter("The integral representation needs z < 0")
    x = -z
    cosine = math.cos(beta * math.pi)

    def denominator(s: float) -> float:
        return s * s + 2.0 * s * cosine + 1.0

    def head_integrand(s: float) -> float:
        return math.exp(-((s * x) ** (1.0 / beta))) / denominator(s)

    def tail_integrand(u: float) -> float:
        s = u**beta / x
        return beta * u ** (beta - 1.0) * math.exp(-u) / (x * denominator(s))

    def piece(
        function: Callable[[float], float], low: float, high: float
    ) -> tuple[float, float]:
        return integrate.quad(
            function, low, high, epsabs=tolerance / 10, epsrel=0.0, limit=400
        )

    # Near beta = 1 the denominator peaks at s = 1, that is u = x^(1/beta).
    knee = 1.0 / x
    head_points = [0.0, 1.0, knee] if knee > 1.0 else [0.0, knee]
    tail_points = [1.0]
    peak = x ** (1.0 / beta) if x > 1.0 else 0.0
    if 1.0 < peak < PEAK_CUTOFF:
        tail_points.append(peak)

    total = 0.0
    error = 0.0
    for low, high in zip(head_points, head_points[1:]):
        value, estimate = piece(head_integrand, low, high)
        total += value
        error += estimate
    for low, high in zip(tail_points, tail_points[1:] + [np.inf]):
        value, estimate = piece(tail_integrand, low, high)
        total += value
        error += estimate

    factor = math.sin(beta * math.pi) / (math.pi * beta)
    if factor * error > tolerance:
        raise exceptions.NumericalFailure(
            "Mittag-Leffler quadrature did not converge",
            achieved=factor * error,
            tolerance=tolerance,
        )
    return factor * total


def mittag_leffler(
    beta: float, z: float, tolerance: float = DEFAULT_TOLERANCE
) -> float:
    """The Mittag-Leffler function E_beta(z) for beta in (0, 1] and z <= 0.

    Uses the power series while both |z| and |z|^(1/beta) are small, and the
    integral representation otherwise.

    Raises:
      NumericalFailure: if the requested accuracy is not reached.
    """
    _check_index(beta)
    if z > 0:
        raise exceptions.InvalidParameter(f"Argument must be non-positive, got {z}")
    if beta == 1.0:
        return math.exp(z)
    if abs(z) <= SERIES_RADIUS and abs(z) ** (1.0 / beta) <= SERIES_MAGNITUDE:
        return mittag_leffler_series(beta, z)
    return mittag_leffler_integral(beta, z, tolerance)


def mittag_leffler_many(beta: float, zs: Sequence[float]) -> np.ndarray:
    return np.array([mittag_leffler(beta, float(z)) for z in zs])


@attr.s(auto_attribs=True, frozen=True)
class SubordinatorSample:
    """Draws of V_beta(1) or of the inverse subordinator V_beta^-1(t)."""

    beta: float
    values: np.ndarray = attr.ib(
        converter=lambda v: np.atleast_1d(np.asarray(v, float))
    )

    def __attrs_post_init__(self) -> None:
        if np.any(self.values < 0):
            raise ValueError("Subordinator values must be non-negative")

    def __len__(self) -> int:
        return len(self.values)


def zolotarev(beta: float, u: np.ndarray) -> np.ndarray:
    """Zolotarev's function of the positive stable law.

    A(u) = sin(beta pi u)^(beta/(1-beta)) sin((1-beta) pi u) / sin(pi u)^(1/(1-beta))
    """
    return (
        np.sin(beta * np.pi * u) ** (beta / (1.0 - beta))
        * np.sin((1.0 - beta) * np.pi * u)
        / np.sin(np.pi * u) ** (1.0 / (1.0 - beta))
    )


def sample_stable(
    beta: float, rng: np.random.Generator, size: int = 1
) -> SubordinatorSample:
    """One-sided stable draws with E[exp(-lambda V)] = exp(-lambda^beta).

    Kanter's representation: V = (A(U) / E)^((1-beta)/beta) for U uniform on
    (0, 1) and E standard exponential.
    """
    _check_index(beta, allow_one=False)
    u = 1.0 - rng.random(size)
    e = rng.standard_exponential(size)
    return SubordinatorSample(beta, (zolotarev(beta, u) / e) ** ((1.0 - beta) / beta))


def stable_cdf_half(v: np.ndarray) -> np.ndarray:
    """P(V <= v) for beta = 1/2, where V has the Levy law erfc(1 / (2 sqrt(v)))."""
    v = np.asarray(v, dtype=float)
    return special.erfc(1.0 / (2.0 * np.sqrt(v)))


def sample_inverse_subordinator(
    beta: float,
    t: float,
    rng: np.random.Generator,
    size: int = 1,
    stable: Optional[SubordinatorSample] = None,
) -> SubordinatorSample:
    """Draws of V_beta^-1(t) = (t / V)^beta by self-similarity.

    A shared stable sample can be passed to couple several times.
    """
    if t < 0:
        raise exceptions.InvalidParameter(f"Time must be non-negative, got {t}")
    stable = stable if stable is not None else sample_stable(beta, rng, size)
    if t == 0:
        return SubordinatorSample(beta, np.zeros(len(stable)))
    return SubordinatorSample(beta, (t / stable.values) ** beta)


def simulate_fk(
    beta: float, d: int, t: float, rng: np.random.Generator, size: int = 1
) -> np.ndarray:
    """Samples of FK_beta(t) = B(V_beta^-1(t)), B a standard Brownian motion.

    Returns:
      An array of shape (size, d).
    """
    clock = sample_inverse_subordinator(beta, t, rng, size).values
    return rng.standard_normal((size, d)) * np.sqrt(clock)[:, None]


def laplace_inverse_subordinator(beta: float, lam: float, t: float) -> float:
    """E[exp(-lambda V_beta^-1(t))] = E_beta(-lambda t^beta)."""
    return mittag_leffler(beta, -lam * t**beta)


def fk_second_moment(beta: float, d: int, t: float) -> float:
    """E|FK_beta(t)|^2 = d t^beta / Gamma(1 + beta)."""
    return d * t**beta / math.gamma(1.0 + beta)


def _shape(value: Union[int, Sequence[int]]) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in value)


@attr.s(auto_attribs=True, frozen=True)
class Grid:
    """A regular grid with the same spacing along every axis.

    Node i along an axis sits at origin + i * spacing; with periodic
    boundaries the last node neighbours the first.
    """

    shape: tuple[int, ...] = attr.ib(converter=_shape)
    spacing: float = attr.ib(converter=float)
    periodic: bool = True
    origin: tuple[float, ...] = attr.ib(default=None)

    def __attrs_post_init__(self) -> None:
        if self.spacing <= 0:
            raise ValueError(f"Grid spacing must be positive, got {self.spacing}")
        if min(self.shape) < 3:
            raise ValueError(f"Grid needs at least 3 nodes per axis, got {self.shape}")
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * len(self.shape))

    @classmethod
    def for_environment(cls, env: environment.Environment, n: float) -> "Grid":
        """The lattice box seen at scale n: spacing 1/n, nodes at x/n."""
        origin = tuple(float(-offset) / n for offset in env.offsets)
        return cls(env.shape, 1.0 / n, env.periodic, origin)

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates in row-major order, shape (size, d)."""
        index = np.indices(self.shape).reshape(self.dimension, -1).T
        return np.asarray(self.origin) + index * self.spacing

    def evaluate(self, profile: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(profile(self.nodes), dtype=float)

    def laplacian(self) -> sparse.csr_matrix:
        """Second-order centered Laplacian, periodic or with reflecting ends."""
        operator = sparse.csr_matrix((self.size, self.size))
        for axis, count in enumerate(self.shape):
            main = -2.0 * np.ones(count)
            side = np.ones(count - 1)
            line = sparse.diags([side, main, side], [-1, 0, 1], format="lil")
            if self.periodic:
                line[0, count - 1] = 1.0
                line[count - 1, 0] = 1.0
            else:
                line[0, 0] = -1.0
                line[count - 1, count - 1] = -1.0
            before = math.prod(self.shape[:axis])
            after = math.prod(self.shape[axis + 1 :])
            operator = operator + sparse.kron(
                sparse.kron(sparse.identity(before), line.tocsr()),
                sparse.identity(after),
            )
        return (operator / self.spacing**2).tocsr()


def l1_weights(beta: float, count: int) -> np.ndarray:
    """b_j = (j+1)^(1-beta) - j^(1-beta) for j = 0..count-1."""
    j = np.arange(count, dtype=float)
    return (j + 1.0) ** (1.0 - beta) - j ** (1.0 - beta)


def l1_stability_bound(beta: float, d: int) -> float:
    """Largest D dt^beta Gamma(2-beta) / h^2 keeping the explicit L1 scheme stable."""
    return (2.0 - 2.0 ** (1.0 - beta)) / (2.0 * d)


def fke_solve_l1(
    grid: Grid,
    beta: float,
    d_eff: float,
    rho0: np.ndarray,
    dt: float,
    steps: int,
    scheme: str = "implicit",
) -> np.ndarray:
    """Solves d^beta u / dt^beta = D_eff Laplacian(u) with the L1 Caputo scheme.

    With mu = Gamma(2 - beta) dt^beta the implicit step is

        (I - mu D Lap) u^{k+1} = u^k - sum_{j=1}^{k} b_j (u^{k+1-j} - u^{k-j}).

    Returns:
      The solution at every step, shape (steps + 1, nodes).

    Raises:
      StabilityViolation: explicit scheme outside its stability bound.
      NumericalFailure: the sparse factorization failed.
    """
    _check_index(beta)
    if dt <= 0 or steps < 0:
        raise exceptions.InvalidParameter("Need a positive time step and steps >= 0")
    if scheme not in ("implicit", "explicit"):
        raise exceptions.InvalidParameter(f"Unknown scheme {scheme!r}")
    u0 = np.asarray(rho0, dtype=float)
    if u0.shape != (grid.size,):
        raise exceptions.InvalidParameter("Initial values do not match the grid")

    mu = math.gamma(2.0 - beta) * dt**beta
    laplacian = grid.laplacian()
    weights = l1_weights(beta, steps + 1)
    solution = np.empty((steps + 1, grid.size))
    solution[0] = u0

    if scheme == "explicit":
        ratio = mu * d_eff / grid.spacing**2
        bound = l1_stability_bound(beta, grid.dimension)
        if ratio > bound:
            raise exceptions.StabilityViolation(ratio, bound)
        solve = None
    else:
        system = (sparse.identity(grid.size) - mu * d_eff * laplacian).tocsc()
        try:
            solve = sparse_linalg.splu(system).solve
        except RuntimeError as error:
            raise exceptions.NumericalFailure(
                f"L1 system factorization failed: {error}"
            )

    for k in range(steps):
        history = np.zeros(grid.size)
        if k:
            # increments[m] = u^{m+1} - u^m, weighted by b_{k-m}.
            increments = solution[1 : k + 1] - solution[:k]
            history = weights[k:0:-1] @ increments
        right = solution[k] - history
        if solve is None:
            solution[k + 1] = right + mu * d_eff * (laplacian @ solution[k])
        else:
            solution[k + 1] = solve(right)
    return solution


def heat_crank_nicolson(
    grid: Grid, d_eff: float, rho0: np.ndarray, dt: float, steps: int
) -> np.ndarray:
    """Crank-Nicolson solution of du/dt = D_eff Laplacian(u), every step."""
    u = np.asarray(rho0, dtype=float)
    half = 0.5 * dt * d_eff * grid.laplacian()
    identity = sparse.identity(grid.size)
    solve = sparse_linalg.splu((identity - half).tocsc()).solve
    explicit = (identity + half).tocsr()
    solution = np.empty((steps + 1, grid.size))
    solution[0] = u
    for k in range(steps):
        solution[k + 1] = solve(explicit @ solution[k])
    return solution


def fourier_mode_amplitude(
    grid: Grid, values: np.ndarray, wavenumber: float
) -> float:
    """Amplitude delta of a profile c + delta cos(k x) on a one-dimensional grid."""
    x = grid.nodes[:, 0]
    cosine = np.cos(wavenumber * x)
    return float(np.dot(values - values.mean(), cosine) / np.dot(cosine, cosine))


def _axis_rule(
    bump: common.TestFunction, axis: int, low: float, high: float
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [low, high], split at the bump center."""
    abscissae, weights = np.polynomial.legendre.leggauss(SMOOTHING_NODES)
    center = bump.center[axis]
    cuts = [low, center, high] if low < center < high else [low, high]
    nodes, scaled = [], []
    for left, right in zip(cuts, cuts[1:]):
        half = 0.5 * (right - left)
        nodes.append(left + half * (abscissae + 1.0))
        scaled.append(half * weights)
    return np.concatenate(nodes), np.concatenate(scaled)


def _smoothed_bump(bump: common.TestFunction, point: np.ndarray, var: float) -> float:
    d = bump.dimension
    if var <= 0.0:
        return float(bump(point.reshape(1, d))[0])
    sigma = math.sqrt(var)
    axes_nodes, axes_weights = [], []
    for axis in range(d):
        low = max(
            point[axis] - SMOOTHING_WINDOW * sigma, bump.center[axis] - bump.radius
        )
        high = min(
            point[axis] + SMOOTHING_WINDOW * sigma, bump.center[axis] + bump.radius
        )
        if high <= low:
            return 0.0
        nodes, weights = _axis_rule(bump, axis, low, high)
        axes_nodes.append(nodes)
        axes_weights.append(weights)
    mesh = np.stack(np.meshgrid(*axes_nodes, indexing="ij"), axis=-1).reshape(-1, d)
    weight = np.prod(np.stack(np.meshgrid(*axes_weights, indexing="ij")), axis=0)
    squared = ((mesh - point) ** 2).sum(axis=1)
    kernel = np.exp(-0.5 * squared / var) / (2.0 * math.pi * var) ** (d / 2.0)
    return float(np.dot(weight.ravel() * kernel, bump(mesh)))


def heat_smoothing(
    profile: Profile, points: np.ndarray, variance: np.ndarray
) -> np.ndarray:
    """E[profile(x + sqrt(variance) N)] for every (point, variance) pair.

    The Gaussian average is computed by Gauss-Legendre quadrature over the
    support of the bump intersected with a window of the Gaussian, split at
    the bump center where the triangle has its kink.
    """
    if isinstance(profile, common.TestFunction):
        level, amplitude, bump = 0.0, 1.0, profile
    else:
        level, amplitude, bump = profile.level, profile.amplitude, profile.bump
    variance = np.asarray(variance, dtype=float).ravel()
    points = np.asarray(points, dtype=float).reshape(len(variance), -1)
    result = np.full(len(variance), level)
    if bump is None or amplitude == 0.0:
        return result

    for index, (point, var) in enumerate(zip(points, variance)):
        result[index] += amplitude * _smoothed_bump(bump, point, var)
    return result


def fke_subordination(
    rho0: Profile,
    beta: float,
    d_eff: float,
    t: float,
    x: Sequence[float],
    samples: int,
    rng: np.random.Generator,
) -> common.Estimate:
    """Monte Carlo solution of the fractional kinetics equation at point x.

    Averages the heat semigroup exp(s D_eff Laplacian) rho0 (x) over
    s = V_beta^-1(t); the heat semigroup is a Gaussian average with variance
    2 D_eff s per coordinate.
    """
    point = np.asarray(x, dtype=float).ravel()
    if t == 0:
        value = float(rho0(point.reshape(1, -1))[0])
        return common.Estimate(value, 0.0, samples)
    clock = sample_inverse_subordinator(beta, t, rng, samples).values
    values = heat_smoothing(rho0, np.tile(point, (samples, 1)), 2.0 * d_eff * clock)
    return common.estimate(values)


def _merged_atoms(
    locations: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    unique, inverse = np.unique(locations, return_inverse=True)
    merged = np.zeros(len(unique))
    np.add.at(merged, inverse, weights)
    return unique, merged


@attr.s(auto_attribs=True, frozen=True, eq=False)
class FinChain:
    """Birth-death chain on sorted atoms with speed-measure weights.

    From atom i the chain jumps right at rate 1/(v_i (x_{i+1} - x_i)) and left
    at rate 1/(v_i (x_i - x_{i-1})); the end atoms reflect.
    """

    locations: np.ndarray
    weights: np.ndarray
    right_rates: np.ndarray
    left_rates: np.ndarray

    def __len__(self) -> int:
        return len(self.locations)

    def generator(self) -> sparse.csr_matrix:
        size = len(self)
        index = np.arange(size - 1)
        return markov.from_rates(
            size,
            np.concatenate([index, index + 1]),
            np.concatenate([index + 1, index]),
            np.concatenate([self.right_rates[:-1], self.left_rates[1:]]),
        )

    def balance_violation(self) -> float:
        """max_i |v_i r_i^+ - v_{i+1} r_{i+1}^-| relative to the flux."""
        forward = self.weights[:-1] * self.right_rates[:-1]
        backward = self.weights[1:] * self.left_rates[1:]
        return float(np.max(np.abs(forward - backward) / forward, initial=0.0))

    def nearest(self, x: float) -> int:
        return int(np.argmin(np.abs(self.locations - x)))


def build_fin_chain(measure: environment.PointMeasure) -> FinChain:
    """The speed-measure chain of a one-dimensional atomic measure.

    Atoms at the same location are merged by adding their weights.
    """
    if measure.dimension != 1:
        raise exceptions.InvalidParameter(
            "The quasi-diffusion chain is one-dimensional"
        )
    locations, weights = _merged_atoms(measure.locations[:, 0], measure.weights)
    if len(locations) < 2:
        raise exceptions.InvalidParameter("The chain needs at least two distinct atoms")
    gaps = np.diff(locations)
    right = np.zeros(len(locations))
    left = np.zeros(len(locations))
    right[:-1] = 1.0 / (weights[:-1] * gaps)
    left[1:] = 1.0 / (weights[1:] * gaps)
    return FinChain(locations, weights, right, left)


def simulate_fin(
    chain: FinChain,
    start: int,
    times: Sequence[float],
    rng: np.random.Generator,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> np.ndarray:
    """Atom indices occupied by the chain at the given sorted times."""
    draws = streams.BufferedDraws(rng)
    right = chain.right_rates.tolist()
    left = chain.left_rates.tolist()
    positions = []
    pending = [float(t) for t in times]
    site, clock, events = start, 0.0, 0
    while pending:
        total = right[site] + left[site]
        arrival = clock + draws.exponential() / total if total > 0 else math.inf
        while pending and pending[0] < arrival:
            pending.pop(0)
            positions.append(site)
        if not pending:
            break
        if events >= max_events:
            raise exceptions.ResourceExhausted(max_events, clock, float(times[-1]))
        site += 1 if draws.uniform() * total < right[site] else -1
        clock = arrival
        events += 1
    return np.array(positions, dtype=np.int64)


def fin_semigroup(
    chain: FinChain,
    g: np.ndarray,
    t: float,
    exact_limit: int = DEFAULT_EXACT_LIMIT,
    samples: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """e^{tG} g on the atoms of the chain.

    Exact for chains up to exact_limit atoms (uniformization, or the Krylov
    exponential action when uniformization needs too many steps); otherwise a
    Monte Carlo average over `samples` paths from every atom.
    """
    g = np.asarray(g, dtype=float)
    if t == 0:
        return g.copy()
    if len(chain) <= exact_limit:
        matrix = chain.generator()
        try:
            return markov.uniformized_action(matrix, g, t)
        except exceptions.StiffnessFailure as error:
            logging.info(
                "Uniformization too expensive (%s), using expm_multiply", error
            )
            return markov.expm_action(matrix, g, t)
    if rng is None:
        raise exceptions.InvalidParameter("Monte Carlo mode needs a random generator")
    logging.info("Chain of %d atoms evaluated by Monte Carlo", len(chain))
    values = np.empty(len(chain))
    for atom in range(len(chain)):
        ends = [simulate_fin(chain, atom, [t], rng)[0] for _ in range(samples)]
        values[atom] = g[ends].mean()
    return values


def fin_msd(
    beta: float,
    times: Sequence[float],
    environments: int,
    replicas: int,
    rng: np.random.Generator,
    half_width: float = 50.0,
    eps: float = 1e-2,
) -> btm_walker.MsdCurve:
    """Annealed mean squared displacement of the speed-measure chain.

    Each environment is a truncated sample of the Poisson measure on
    [-half_width, half_width]; walkers start at the atom nearest the origin.
    """
    if environments < 1 or replicas < 1:
        raise exceptions.InvalidParameter("Need at least one environment and replica")
    order = np.argsort(times, kind="stable")
    sorted_times = [float(times[i]) for i in order]
    per_environment = []
    for _ in range(environments):
        measure = environment.sample_ppp_W(beta, half_width, 1, eps, rng)
        chain = build_fin_chain(measure)
        start = chain.nearest(0.0)
        squares = np.empty((replicas, len(order)))
        for replica in range(replicas):
            visited = simulate_fin(chain, start, sorted_times, rng)
            moved = chain.locations[visited] - chain.locations[start]
            squares[replica, order] = moved**2
        per_environment.append(squares)
    return btm_walker.MsdCurve.from_squares(times, per_environment)


def fin_exponent(beta: float) -> float:
    """Exponent 2 beta / (1 + beta) of the quasi-diffusion's squared displacement."""
    return 2.0 * beta / (1.0 + beta)
