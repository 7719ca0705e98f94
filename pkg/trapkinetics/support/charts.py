# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Static SVG line charts.

Charts are rendered with the Agg backend and written as SVG with a fixed
hash salt and no date, so the same data produce the same bytes. Every
series carries its label as the SVG group id.
"""

import logging
import pathlib
from collections.abc import Sequence
from typing import Optional, Union

import attr
import matplotlib
import numpy as np

matplotlib.use("Agg")

from matplotlib import pyplot  # noqa: E402  pylint: disable=wrong-import-position

_STYLE = {
    "svg.hashsalt": "trapkinetics",
    "svg.fonttype": "none",
    "figure.figsize": (7.0, 4.5),
}


@attr.s(auto_attribs=True, frozen=True)
class Series:
    label: str
    x: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    y: np.ndarray = attr.ib(converter=lambda v: np.asarray(v, dtype=float))
    error: Optional[np.ndarray] = attr.ib(
        default=None,
        converter=attr.converters.optional(lambda v: np.asarray(v, dtype=float)),
    )

    def __attrs_post_init__(self) -> None:
        if self.x.shape != self.y.shape:
            raise ValueError(f"Series {self.label!r} has mismatched x and y")
        if self.error is not None and self.error.shape != self.y.shape:
            raise ValueError(f"Series {self.label!r} has mismatched error bars")


def line_chart(
    path: Union[str, pathlib.Path],
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> pathlib.Path:
    """Writes one line per series to an SVG file and returns its path."""
    path = pathlib.Path(path)
    with matplotlib.rc_context(_STYLE):
        figure, axes = pyplot.subplots()
        try:
            for entry in series:
                if entry.error is not None:
                    container = axes.errorbar(
                        entry.x,
                        entry.y,
                        yerr=entry.error,
                        marker="o",
                        capsize=3,
                        label=entry.label,
                    )
                    container.lines[0].set_gid(entry.label)
                else:
                    (line,) = axes.plot(entry.x, entry.y, marker="o", label=entry.label)
                    line.set_gid(entry.label)
            if logx:
                axes.set_xscale("log")
            if logy:
                axes.set_yscale("log")
            axes.set_title(title)
            axes.set_xlabel(xlabel)
            axes.set_ylabel(ylabel)
            if series:
                axes.legend(fontsize="small")
            figure.tight_layout()
            figure.savefig(path, format="svg", metadata={"Date": None})
        finally:
            pyplot.close(figure)
    logging.info("Wrote chart %s with %d series", path, len(series))
    return path
