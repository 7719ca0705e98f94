# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Index codecs for enumerated finite state spaces."""

import itertools
import math
from collections.abc import Iterable, Sequence

import attr
import numpy as np

from trapkinetics import exceptions

DEFAULT_STATE_LIMIT = 10**6


def check_size(size: int, limit: int = DEFAULT_STATE_LIMIT) -> None:
    if size > limit:
        raise exceptions.StateSpaceTooLarge(size, limit)


def _radices(value: Iterable[int]) -> tuple[int, ...]:
    return tuple(int(v) for v in value)


@attr.s(auto_attribs=True, frozen=True)
class MixedRadix:
    """Mixed-radix encoding of digit vectors, the first digit most significant.

    For a configuration eta with eta(x) in {0..alpha_x} the radices are
    alpha_x + 1 in canonical site order.
    """

    radices: tuple[int, ...] = attr.ib(converter=_radices)

    def __attrs_post_init__(self) -> None:
        if any(radix < 1 for radix in self.radices):
            raise ValueError(f"Radices must be positive, got {self.radices}")

    @property
    def size(self) -> int:
        return math.prod(self.radices)

    @property
    def strides(self) -> np.ndarray:
        strides = np.ones(len(self.radices), dtype=np.int64)
        for position in range(len(self.radices) - 2, -1, -1):
            strides[position] = strides[position + 1] * self.radices[position + 1]
        return strides

    def encode(self, digits: Sequence[int]) -> int:
        index = 0
        for digit, radix in zip(digits, self.radices):
            if not 0 <= digit < radix:
                raise ValueError(f"Digit {digit} out of range for radix {radix}")
            index = index * radix + int(digit)
        return index

    def encode_many(self, digits: np.ndarray) -> np.ndarray:
        return np.asarray(digits, dtype=np.int64) @ self.strides

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"State index {index} out of range")
        digits = []
        for radix in reversed(self.radices):
            index, digit = divmod(index, radix)
            digits.append(digit)
        return tuple(reversed(digits))

    def states(self, limit: int = DEFAULT_STATE_LIMIT) -> np.ndarray:
        """All digit vectors in index order, shape (size, len(radices))."""
        check_size(self.size, limit)
        return np.indices(self.radices).reshape(len(self.radices), -1).T


@attr.s(auto_attribs=True, frozen=True, eq=False)
class ListCodec:
    """Codec for an explicitly listed state space."""

    states: tuple[tuple[int, ...], ...] = attr.ib(
        converter=lambda value: tuple(tuple(int(v) for v in state) for state in value)
    )

    def __attrs_post_init__(self) -> None:
        if len(set(self.states)) != len(self.states):
            raise ValueError("Duplicate states in codec")

    @property
    def _index(self) -> dict[tuple[int, ...], int]:
        index = self.__dict__.get("_cached_index")
        if index is None:
            index = {state: position for position, state in enumerate(self.states)}
            object.__setattr__(self, "_cached_index", index)
        return index

    @property
    def size(self) -> int:
        return len(self.states)

    def encode(self, state: Sequence[int]) -> int:
        return self._index[tuple(int(v) for v in state)]

    def decode(self, index: int) -> tuple[int, ...]:
        return self.states[index]

    def __contains__(self, state: Sequence[int]) -> bool:
        return tuple(int(v) for v in state) in self._index


def labeled_positions(capacities: Sequence[int], k: int) -> ListCodec:
    """Ordered k-tuples of sites compatible with the given site capacities.

    A tuple is admissible when no site appears more often than its capacity,
    so for k=2 the diagonal (x, x) is excluded exactly where capacity is 1.
    """
    sites = range(len(capacities))
    check_size(len(capacities) ** k)
    admissible = []
    for positions in itertools.product(sites, repeat=k):
        counts: dict[int, int] = {}
        for site in positions:
            counts[site] = counts.get(site, 0) + 1
        if all(count <= capacities[site] for site, count in counts.items()):
            admissible.append(positions)
    return ListCodec(admissible)
