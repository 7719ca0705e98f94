# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for SVG charts."""

# pylint: disable=protected-access,missing-docstring

import pathlib

from absl.testing import absltest

from trapkinetics.support import charts


class TestCharts(absltest.TestCase):
    def test_line_chart(self):
        directory = pathlib.Path(self.create_tempdir().full_path)
        series = [
            charts.Series("msd", [1.0, 10.0, 100.0], [1.0, 3.0, 9.0], [0.1, 0.2, 0.3]),
            charts.Series("fit", [1.0, 100.0], [1.0, 10.0]),
        ]
        path = charts.line_chart(
            directory / "msd.svg", series, "MSD", "t", "msd", logx=True, logy=True
        )
        text = path.read_text(encoding="utf-8")
        self.assertTrue(text.lstrip().startswith("<?xml"))
        self.assertIn('id="msd"', text)
        self.assertIn('id="fit"', text)

    def test_reproducible(self):
        directory = pathlib.Path(self.create_tempdir().full_path)
        series = [charts.Series("mode", [0.0, 0.5, 1.0], [0.1, 0.08, 0.07])]
        first = charts.line_chart(directory / "first.svg", series).read_bytes()
        second = charts.line_chart(directory / "second.svg", series).read_bytes()
        self.assertEqual(first, second)

    def test_mismatched_series(self):
        with self.assertRaises(ValueError):
            charts.Series("bad", [1.0, 2.0], [1.0])
        with self.assertRaises(ValueError):
            charts.Series("bad", [1.0, 2.0], [1.0, 2.0], [0.1])


if __name__ == "__main__":
    absltest.main()
