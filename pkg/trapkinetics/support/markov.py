# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Semigroups of finite continuous-time Markov chains.

Generators are square rate matrices G with non-negative off-diagonal entries
and zero row sums; e^{tG} g is the expectation of g after time t. Two
independent algorithms are provided, the Padé scaling-and-squaring exponential
from scipy and uniformization, so that oracles built on one can be checked
against the other.
"""

import logging
from typing import Union

import numpy as np
from scipy import linalg, sparse, stats
from scipy.sparse import linalg as sparse_linalg

from trapkinetics import exceptions

Matrix = Union[np.ndarray, sparse.spmatrix, sparse.sparray]

ROW_SUM_TOLERANCE = 1e-12

# Matrix-vector products allowed in a single uniformization.
DEFAULT_BUDGET = 10**6


def dense(generator: Matrix) -> np.ndarray:
    if sparse.issparse(generator):
        return generator.toarray()
    return np.asarray(generator, dtype=float)


def from_rates(
    size: int, rows: np.ndarray, columns: np.ndarray, rates: np.ndarray
) -> sparse.csr_matrix:
    """Assembles a sparse generator from off-diagonal transition rates.

    Duplicate (row, column) entries are summed, zero rates dropped and the
    diagonal set so that every row sums to zero.
    """
    rows = np.asarray(rows, dtype=np.int64)
    columns = np.asarray(columns, dtype=np.int64)
    rates = np.asarray(rates, dtype=float)
    keep = (rates != 0.0) & (rows != columns)
    off = sparse.coo_matrix(
        (rates[keep], (rows[keep], columns[keep])), shape=(size, size)
    ).tocsr()
    off.sum_duplicates()
    exits = np.asarray(off.sum(axis=1)).ravel()
    return (off - sparse.diags(exits)).tocsr()


def check_generator(generator: Matrix, tolerance: float = ROW_SUM_TOLERANCE) -> None:
    """Raises ValueError unless the matrix is a valid rate matrix."""
    matrix = sparse.csr_matrix(generator)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Generator must be square, got {matrix.shape}")
    off = matrix - sparse.diags(matrix.diagonal())
    if off.nnz and off.data.min() < 0:
        raise ValueError("Generator has negative off-diagonal rates")
    rows = np.abs(np.asarray(matrix.sum(axis=1)).ravel())
    scale = max(1.0, float(np.abs(matrix.diagonal()).max(initial=0.0)))
    if rows.size and rows.max() > tolerance * scale:
        raise ValueError(f"Generator rows do not sum to zero: {rows.max():.3e}")


def exit_rate(generator: Matrix) -> float:
    """The largest total exit rate, max_i -G_ii."""
    diagonal = (
        generator.diagonal() if sparse.issparse(generator) else np.diag(generator)
    )
    return float(-np.min(diagonal, initial=0.0))


def transition_matrix(generator: Matrix, t: float) -> np.ndarray:
    """e^{tG} by Padé scaling and squaring (dense)."""
    return linalg.expm(t * dense(generator))


def expm_action(generator: Matrix, values: np.ndarray, t: float) -> np.ndarray:
    """e^{tG} values, without forming the exponential."""
    values = np.asarray(values, dtype=float)
    if t == 0.0:
        return values.copy()
    return sparse_linalg.expm_multiply(t * sparse.csr_matrix(generator), values)


def uniformization_terms(
    rate: float, t: float, tolerance: float
) -> tuple[int, np.ndarray]:
    """Poisson weights covering all but `tolerance` of the mass of Poisson(rate t)."""
    mean = rate * t
    if mean == 0.0:
        return 0, np.ones(1)
    last = int(stats.poisson.isf(tolerance, mean)) + 1
    first = int(stats.poisson.ppf(tolerance, mean)) if mean > 50 else 0
    weights = stats.poisson.pmf(np.arange(first, last + 1), mean)
    return first, weights


def uniformized_action(
    generator: Matrix,
    values: np.ndarray,
    t: float,
    tolerance: float = 1e-14,
    budget: int = DEFAULT_BUDGET,
    adjoint: bool = False,
) -> np.ndarray:
    """e^{tG} values by uniformization.

    With Lambda = max exit rate and P = I + G / Lambda,
    e^{tG} = sum_k Poisson(k; Lambda t) P^k. The series is truncated once the
    neglected Poisson mass is below tolerance, which bounds the sup-norm error
    by tolerance * max|values| for the stochastic matrix P.

    Args:
      adjoint: apply e^{tG^T} instead, propagating a distribution rather than a
        function.

    Raises:
      StiffnessFailure: if more than `budget` products would be needed.
    """
    values = np.asarray(values, dtype=float)
    rate = exit_rate(generator)
    if t == 0.0 or rate == 0.0:
        return values.copy()

    first, weights = uniformization_terms(rate, t, tolerance)
    work = first + len(weights)
    if work > budget:
        raise exceptions.StiffnessFailure(work, budget)

    matrix = sparse.csr_matrix(generator)
    if adjoint:
        matrix = matrix.T.tocsr()
    step = sparse.identity(matrix.shape[0], format="csr") + matrix / rate

    power = values.copy()
    for _ in range(first):
        power = step @ power
    result = weights[0] * power
    for weight in weights[1:]:
        power = step @ power
        result += weight * power
    logging.debug("Uniformization used %d products (rate %.3g, t %.3g)", work, rate, t)
    return result


def uniformized_matrix(
    generator: Matrix, t: float, tolerance: float = 1e-14
) -> np.ndarray:
    """e^{tG} as a dense matrix, by uniformization."""
    size = generator.shape[0]
    return uniformized_action(generator, np.identity(size), t, tolerance)


def semigroup_defect(generator: Matrix, s: float, t: float) -> float:
    """Sup-norm of e^{(s+t)G} - e^{sG} e^{tG}."""
    combined = transition_matrix(generator, s + t)
    product = transition_matrix(generator, s) @ transition_matrix(generator, t)
    return float(np.abs(combined - product).sum(axis=1).max())


def reversibility_violation(generator: Matrix, weights: np.ndarray) -> float:
    """max |w_i G_ij - w_j G_ji| relative to the largest flux w_i G_ij."""
    matrix = sparse.csr_matrix(generator)
    flux = sparse.diags(np.asarray(weights, dtype=float)) @ matrix
    flux = flux - sparse.diags(flux.diagonal())
    gap = abs(flux - flux.T)
    scale = float(abs(flux).max()) if flux.nnz else 0.0
    if scale == 0.0:
        return 0.0
    return float(gap.max()) / scale
