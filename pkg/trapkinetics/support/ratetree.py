# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Aggregate rate tree for event selection in kinetic Monte Carlo.

A complete binary tree over the leaves, each inner node holding the sum of its
children, so updating one rate and selecting an event proportionally to the
rates both take logarithmic time. Inner sums are recomputed from the children
on every update, so rounding errors do not accumulate over long runs.
"""

from collections.abc import Sequence


class RateTree:
    def __init__(self, rates: Sequence[float]) -> None:
        self._leaves = len(rates)
        capacity = 1
        while capacity < max(1, self._leaves):
            capacity *= 2
        self._capacity = capacity
        self._nodes = [0.0] * (2 * capacity)
        for index, rate in enumerate(rates):
            self._nodes[capacity + index] = self._checked(rate)
        for node in range(capacity - 1, 0, -1):
            self._nodes[node] = self._nodes[2 * node] + self._nodes[2 * node + 1]

    @staticmethod
    def _checked(rate: float) -> float:
        rate = float(rate)
        if not rate >= 0.0:
            raise ValueError(f"Rates must be non-negative, got {rate!r}")
        return rate

    def __len__(self) -> int:
        return self._leaves

    def __getitem__(self, index: int) -> float:
        return self._nodes[self._capacity + index]

    @property
    def total(self) -> float:
        return self._nodes[1]

    def update(self, index: int, rate: float) -> None:
        if not 0 <= index < self._leaves:
            raise IndexError(f"Leaf {index} out of range")
        node = self._capacity + index
        self._nodes[node] = self._checked(rate)
        node //= 2
        while node:
            self._nodes[node] = self._nodes[2 * node] + self._nodes[2 * node + 1]
            node //= 2

    def find(self, target: float) -> int:
        """Index of the leaf whose cumulative rate interval contains target.

        Target must lie in [0, total); leaves with zero rate are never returned.
        """
        if self.total <= 0.0:
            raise ValueError("Cannot select from a tree with zero total rate")
        node = 1
        while node < self._capacity:
            left = self._nodes[2 * node]
            right = self._nodes[2 * node + 1]
            if (target < left or right <= 0.0) and left > 0.0:
                node = 2 * node
            else:
                target -= left
                node = 2 * node + 1
        return node - self._capacity
