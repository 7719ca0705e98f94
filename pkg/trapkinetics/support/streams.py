# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Reproducible random streams.

All randomness in trapkinetics flows from a master seed:

  * replica seeds are derived by hashing (master seed, experiment kind, index),
    so they do not depend on how many replicas run or in which order;
  * environments draw one Philox output per site, and Philox being counter
    based the value for site i depends only on (seed, i), never on the order in
    which sites are visited;
  * everything else uses Generators built from SeedSequence spawn keys.
"""

import hashlib

import numpy as np

ENVIRONMENT_STREAM = 0
NOISE_STREAM = 1
INITIAL_STREAM = 2

_MANTISSA_SCALE = 2.0**-53


def replica_seed(master_seed: int, kind: str, index: int) -> int:
    """Derive the seed of a replica from the master seed.

    Returns:
      A non-negative 63-bit integer.
    """
    token = f"{int(master_seed)}:{kind}:{int(index)}".encode("ascii")
    digest = hashlib.blake2b(token, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def generator(seed: int, *stream: int) -> np.random.Generator:
    """Returns a Philox generator for the given seed and stream path."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(sequence))


def _site_bit_generator(seed: int, stream: int) -> np.random.Philox:
    key = np.random.SeedSequence(int(seed), spawn_key=(stream,)).generate_state(
        2, dtype=np.uint64
    )
    return np.random.Philox(key=key)


def site_uniforms(
    seed: int, count: int, stream: int = ENVIRONMENT_STREAM
) -> np.ndarray:
    """Uniform variates in the open interval (0, 1), one per site index.

    The i-th value is the i-th Philox output under a key derived from the seed,
    mapped to (k + 1/2) / 2**53 from its top 53 bits, so it is never 0 or 1.
    """
    raw = _site_bit_generator(seed, stream).random_raw(int(count))
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _MANTISSA_SCALE


def site_uniforms_at(
    seed: int, indices: np.ndarray, stream: int = ENVIRONMENT_STREAM
) -> np.ndarray:
    """The uniforms of the given site indices, in the order they are given."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.empty(0)
    return site_uniforms(seed, int(indices.max()) + 1, stream)[indices]


class BufferedDraws:
    """Standard exponential and uniform variates drawn from a generator in blocks.

    Event loops call exponential() and uniform() once per event; drawing them
    one block at a time keeps the sequence identical for a given generator.
    """

    def __init__(self, rng: np.random.Generator, block: int = 4096) -> None:
        self._rng = rng
        self._block = block
        self._exponentials: list[float] = []
        self._uniforms: list[float] = []

    def exponential(self) -> float:
        if not self._exponentials:
            self._exponentials = self._rng.standard_exponential(self._block).tolist()
            self._exponentials.reverse()
        return self._exponentials.pop()

    def uniform(self) -> float:
        if not self._uniforms:
            self._uniforms = self._rng.random(self._block).tolist()
            self._uniforms.reverse()
        return self._uniforms.pop()
