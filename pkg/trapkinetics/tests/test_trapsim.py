# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for the trapsim command line."""

# pylint: disable=protected-access,missing-docstring

import contextlib
import io
import json
import pathlib

from absl.testing import absltest

from trapkinetics import harness, trapsim

BATTERY = """\
kind = "duality-battery"
seed = 3
cases = 4
replicas = 2
"""


class TestTrapsim(absltest.TestCase):
    def _main(self, *argv):
        buffer = io.StringIO()
        with contextlib.redirect_stdout(buffer):
            status = trapsim.main(list(argv))
        return status, buffer.getvalue()

    def test_no_action(self):
        status, text = self._main()
        self.assertEqual(status, 0)
        self.assertIn("usage", text)

    def test_kinds(self):
        status, text = self._main("kinds")
        self.assertEqual(status, 0)
        self.assertLen(text.splitlines(), 7)
        self.assertIn("env-tail: ", text)

    def test_env(self):
        path = self.create_tempdir().full_path + "/env.json"
        status, _ = self._main("--seed", "4", "env", "--L", "3", "--save", path)
        self.assertEqual(status, 0)
        with open(path, encoding="utf-8") as saved:
            self.assertLen(json.load(saved)["alpha"], 7)

    def test_env_measure(self):
        status, text = self._main("env", "--L", "3", "--n", "2")
        self.assertEqual(status, 0)
        self.assertStartsWith(text, "# trapkinetics:")

    def test_walk(self):
        status, text = self._main(
            "walk", "--L", "5", "--times", "0", "1", "--replicas", "3"
        )
        self.assertEqual(status, 0)
        self.assertStartsWith(text, "# trapkinetics:msd")

    def test_duality(self):
        path = self.create_tempfile().full_path
        status, text = self._main("duality", "--cases", "3", "--save", path)
        self.assertEqual(status, 0)
        self.assertIn("0 failed", text)
        with open(path, encoding="utf-8") as lines:
            self.assertLen(lines.readlines(), 6)

    def test_fke(self):
        status, text = self._main("fke", "--times", "0.5", "--samples", "50")
        self.assertEqual(status, 0)
        self.assertIn("t,x0,value,se", text)

    def test_fin(self):
        status, _ = self._main(
            "fin",
            "--times",
            "1",
            "--environments",
            "1",
            "--replicas",
            "3",
            "--half-width",
            "5",
            "--eps",
            "0.05",
        )
        self.assertEqual(status, 0)

    def test_run(self):
        config = self.create_tempfile(content=BATTERY).full_path
        directory = pathlib.Path(self.create_tempdir().full_path)
        status, text = self._main(
            "--seed", "9", "run", config, "--output", str(directory)
        )
        self.assertEqual(status, 0, msg=text)
        self.assertIn("duality-battery: 4 passed", text)
        manifest = harness.RunManifest.read(directory)
        self.assertEqual(manifest.config["seed"], 9)
        self.assertIn("battery.jsonl", manifest.files)

    def test_run_missing_configuration(self):
        status, text = self._main("run", "/nonexistent/trapkinetics.toml")
        self.assertEqual(status, 1)
        self.assertStartsWith(text, "Error while executing 'run'")

    def test_run_invalid_configuration(self):
        config = self.create_tempfile(content='kind = "teleport"\nseed = 1\n')
        status, text = self._main("run", config.full_path)
        self.assertEqual(status, 1)
        self.assertIn("unknown kind", text)

    def test_report_without_runs(self):
        status, text = self._main(
            "report", self.create_tempdir().full_path, "--output", "unused"
        )
        self.assertEqual(status, 1)
        self.assertIn("No manifest", text)


if __name__ == "__main__":
    absltest.main()
