# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Tests for experiment configuration files."""

# pylint: disable=protected-access,missing-docstring

import pathlib

from absl.testing import absltest, parameterized

from trapkinetics import common, exceptions
from trapkinetics.support import config

MINIMAL = 'kind = "walker-msd"\nseed = 3\n'
SHIPPED = pathlib.Path(__file__).resolve().parents[3] / "configs"


class TestLoading(parameterized.TestCase):
    def test_minimal(self):
        parsed = config.loads(MINIMAL)
        self.assertEqual(parsed.kind, "walker-msd")
        self.assertEqual(parsed.seed, 3)
        self.assertEqual(parsed.n, (10,))
        self.assertIsNone(parsed.d_eff)
        self.assertEqual(parsed.functions[0].dimension, 1)

    def test_full(self):
        parsed = config.loads(
            """
kind = "hydro-frequency"
seed = 11
d = 2
beta = 0.7
a = 0.5
n = [4, 8]
times = [0.0, 0.05, 0.1]
D_eff = 0.8
replicas = 3

[profile]
level = 0.2
amplitude = 0.5
bump = { center = [0.0, 0.0], radius = 1.0 }

[[functions]]
kind = "cosine-squared"
center = [0.5, 0.0]
radius = 0.5
"""
        )
        self.assertEqual(parsed.n, (4, 8))
        self.assertEqual(parsed.d_eff, 0.8)
        self.assertEqual(parsed.profile.bump.kind, common.BumpKind.TRIANGLE)
        self.assertEqual(parsed.functions[0].kind, common.BumpKind.COSINE_SQUARED)
        self.assertEqual(parsed.as_record()["D_eff"], 0.8)

    def test_default_function_follows_dimension(self):
        parsed = config.loads(MINIMAL + "d = 3\n")
        self.assertEqual(parsed.functions[0].center, (0.0, 0.0, 0.0))

    @parameterized.named_parameters(
        ("_no_seed", 'kind = "env-tail"\n'),
        ("_no_kind", "seed = 1\n"),
        ("_unknown_key", MINIMAL + "colour = 1\n"),
        ("_unknown_kind", 'kind = "teleport"\nseed = 1\n'),
        ("_beta", MINIMAL + "beta = 1.0\n"),
        ("_a", MINIMAL + "a = 2.0\n"),
        ("_n", MINIMAL + "n = [1, 4]\n"),
        ("_unsorted_times", MINIMAL + "times = [0.5, 0.1]\n"),
        ("_dimension", MINIMAL + "d = 4\n"),
        ("_solver", MINIMAL + 'solver = "euler"\n'),
        ("_d_eff", MINIMAL + "D_eff = -1.0\n"),
        (
            "_function_dimension",
            MINIMAL + "d = 2\n[[functions]]\ncenter = [0.0]\nradius = 1.0\n",
        ),
        ("_bad_function", MINIMAL + "[[functions]]\nradius = 1.0\n"),
        ("_malformed", "kind = \n"),
    )
    def test_invalid(self, text):
        with self.assertRaises(exceptions.ConfigError):
            config.loads(text)

    def test_all_problems_reported(self):
        with self.assertRaises(exceptions.ConfigError) as context:
            config.loads(MINIMAL + "beta = 2.0\nL = 0\n")
        self.assertIn("beta", str(context.exception))
        self.assertIn("L must be", str(context.exception))

    def test_load(self):
        path = pathlib.Path(self.create_tempdir().full_path) / "run.toml"
        path.write_text(MINIMAL, encoding="utf-8")
        self.assertEqual(config.load(path).seed, 3)
        with self.assertRaises(exceptions.CommandLineError):
            config.load(path.with_name("missing.toml"))


class TestHashing(absltest.TestCase):
    def test_key_order(self):
        first = config.loads('seed = 3\nkind = "walker-msd"\nreplicas = 4\n')
        second = config.loads('replicas = 4\nkind = "walker-msd"\nseed = 3\n')
        self.assertEqual(first.digest, second.digest)
        self.assertLen(first.digest, 64)

    def test_seed_changes_digest(self):
        parsed = config.loads(MINIMAL)
        self.assertNotEqual(parsed.digest, parsed.with_seed(4).digest)
        self.assertIs(parsed.with_seed(None), parsed)

    def test_comparison_key(self):
        small = config.loads(MINIMAL + "n = 4\n")
        large = config.loads(MINIMAL.replace("3", "5") + "n = 8\n")
        self.assertEqual(small.comparison_key(), large.comparison_key())
        other = config.loads(MINIMAL + "n = 4\nbeta = 0.6\n")
        self.assertNotEqual(small.comparison_key(), other.comparison_key())

    def test_output_directory(self):
        parsed = config.loads(MINIMAL)
        self.assertEqual(
            parsed.output_directory(),
            pathlib.Path("runs") / f"walker-msd-{parsed.digest[:12]}",
        )
        named = config.loads(MINIMAL + 'output = "here"\n')
        self.assertEqual(named.output_directory(), pathlib.Path("here"))


class TestShippedConfigs(parameterized.TestCase):
    @parameterized.parameters(*config.KINDS)
    def test_loads(self, kind):
        parsed = config.load(SHIPPED / f"{kind}.toml")
        self.assertEqual(parsed.kind, kind)


if __name__ == "__main__":
    absltest.main()
