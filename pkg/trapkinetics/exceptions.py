# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Common exceptions for trapkinetics."""

from typing import Any, Optional


class Error(Exception):
    """Base class for the errors."""


class CommandLineError(Error):
    """Error with commandline parameters provided."""


class ConfigError(Error):
    """The experiment configuration is not valid."""

    def __init__(self, message: str = "Invalid experiment configuration.") -> None:
        super().__init__(message)


class InvalidVariate(Error):
    """A uniform variate outside of (0, 1) was provided to a sampler."""

    def __init__(self, value: Any) -> None:
        super().__init__(f"Uniform variate must lie in (0, 1), got {value!r}")


class InvalidParameter(Error):
    """A parameter violates the precondition of the requested operation."""


class NumericalFailure(Error):
    """A numerical routine did not reach its requested tolerance."""

    def __init__(
        self,
        message: str,
        achieved: Optional[float] = None,
        tolerance: Optional[float] = None,
    ) -> None:
        self.achieved = achieved
        self.tolerance = tolerance
        if achieved is not None:
            message = f"{message} (achieved error {achieved:.3e}"
            if tolerance is not None:
                message += f", requested {tolerance:.1e}"
            message += ")"
        super().__init__(message)


class StiffnessFailure(NumericalFailure):
    """The explicit forward solver would need too many matrix-vector products."""

    def __init__(self, work: float, budget: float) -> None:
        super().__init__(
            f"Forward solve needs about {work:.3g} matrix-vector products, over the "
            f"budget of {budget:.3g}; use a smaller box or the implicit solver"
        )


class StabilityViolation(NumericalFailure):
    """The explicit fractional scheme was asked to run outside its stability bound."""

    def __init__(self, ratio: float, bound: float) -> None:
        super().__init__(
            f"Explicit L1 step ratio {ratio:.4g} exceeds the stability bound "
            f"{bound:.4g}; reduce the time step or use the implicit scheme"
        )


class ResourceExhausted(Error):
    """A simulation hit its event cap before reaching the horizon."""

    def __init__(
        self, events: int, reached: float, horizon: float, partial: Any = None
    ) -> None:
        self.events = events
        self.reached = reached
        self.horizon = horizon
        self.partial = partial
        super().__init__(
            f"Event cap of {events} reached at time {reached:.6g} of {horizon:.6g}"
        )


class StateSpaceTooLarge(Error):
    """The requested state space is too large to enumerate."""

    def __init__(self, size: int, limit: int) -> None:
        self.size = size
        self.limit = limit
        super().__init__(
            f"State space has {size} states, enumeration is limited to {limit}"
        )


class UndefinedDuality(Error):
    """The two-particle duality function has a vanishing denominator."""

    def __init__(self, site: int) -> None:
        super().__init__(
            f"Duality function undefined on the diagonal at site {site} with unit depth"
        )


class MismatchedRuns(Error):
    """The runs passed to a report are not comparable."""
