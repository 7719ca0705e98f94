# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for artifact serialization."""

# pylint: disable=protected-access,missing-docstring

import io
import pathlib

import numpy as np
from absl.testing import absltest, parameterized

from trapkinetics.support import output


class TestCsv(parameterized.TestCase):
    @parameterized.named_parameters(
        ("_float", 0.1, "0.1"),
        ("_numpy_float", np.float64(2.5), "2.5"),
        ("_int", np.int64(3), "3"),
        ("_bool", True, "1"),
        ("_numpy_bool", np.bool_(False), "0"),
        ("_string", "triangle@0/0.5", "triangle@0/0.5"),
    )
    def test_cell(self, value, expected):
        self.assertEqual(output._cell(value), expected)

    def test_format(self):
        text = output.format_csv("msd", ["t", "msd"], [[1.0, 2], [2.0, 3]])
        self.assertEqual(text, "# trapkinetics:msd v1\nt,msd\n1.0,2\n2.0,3\n")

    def test_read(self):
        text = output.format_csv("msd", ["t", "msd"], [[1.0, 2]])
        schema, rows = output.read_csv(io.StringIO(text))
        self.assertEqual(schema, "msd")
        self.assertEqual(rows, [{"t": "1.0", "msd": "2"}])

    def test_file(self):
        path = pathlib.Path(self.create_tempdir().full_path) / "table.csv"
        output.write_csv(path, "fields", ["n"], [[4]])
        self.assertEqual(output.read_csv(path), ("fields", [{"n": "4"}]))

    def test_missing_schema(self):
        with self.assertRaises(ValueError):
            output.read_csv(io.StringIO("t,msd\n1,2\n"))


class TestJson(absltest.TestCase):
    def test_canonical(self):
        value = {"b": np.array([1, 2]), "a": np.float64(0.5), "c": (True,)}
        self.assertEqual(
            output.canonical_json(value), '{"a":0.5,"b":[1,2],"c":[true]}'
        )

    def test_key_order_is_irrelevant(self):
        self.assertEqual(
            output.canonical_json({"x": 1, "y": {"b": 2, "a": 1}}),
            output.canonical_json({"y": {"a": 1, "b": 2}, "x": 1}),
        )

    def test_files(self):
        directory = pathlib.Path(self.create_tempdir().full_path)
        output.write_json(directory / "value.json", {"seed": 3, "path": directory})
        self.assertEqual(
            output.read_json(directory / "value.json"),
            {"seed": 3, "path": str(directory)},
        )
        output.write_json_lines(directory / "lines.jsonl", [{"a": 1}, {"a": 2}])
        self.assertEqual(
            (directory / "lines.jsonl").read_text(encoding="utf-8"),
            '{"a":1}\n{"a":2}\n',
        )


if __name__ == "__main__":
    absltest.main()
