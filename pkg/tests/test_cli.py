import io
import json
import os
import tempfile
import unittest
from unittest import mock

import yaml

from abel_equiv import cli, transform
from abel_equiv.verify import SuiteResult, VerifyReport
from tests import sample_data

CONFIG = ["--config", sample_data.CONFIG_PATH]


def run(*argv: str):
    stream = io.StringIO()
    code = cli.main(argv=[*argv, *CONFIG], stream=stream)
    return code, stream.getvalue()


class TestCli(unittest.TestCase):
    def test_invariants(self):
        code, out = run("invariants", "--eq", sample_data.CUBIC_PATH, "--at", "1")
        self.assertEqual(code, cli.EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["family"], "k3")
        self.assertEqual(report["orbit"], "Regular")
        self.assertAlmostEqual(report["values"]["s3"], -3.0)
        self.assertAlmostEqual(report["values"]["J1"], 1.0 / 9.0)
        self.assertAlmostEqual(report["values"]["nabla_J1"], -0.267083, places=6)
        self.assertAlmostEqual(report["derivation"], 0.480750, places=6)
        self.assertTrue(report["defined"]["J1"])

    def test_text_format(self):
        code, out = run(
            "classify", "--eq", sample_data.CUBIC_PATH, "--at", "1", "--format", "text"
        )
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("tag: Regular", out.splitlines())
        self.assertIn("regular: True", out.splitlines())

    def test_classify(self):
        code, out = run("classify", "--eq", sample_data.CUBIC_PATH, "--at", "0")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(json.loads(out)["tag"], "SingularCubicS3Zero")

    def test_signature(self):
        code, out = run(
            "signature",
            "--eq",
            sample_data.CUBIC_PATH,
            "--from",
            "1",
            "--to",
            "2",
            "--samples",
            "16",
        )
        self.assertEqual(code, cli.EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], "x,J1,nabla_J1,defined")
        self.assertEqual(len(lines), 17)

    def test_signature_bad_interval(self):
        code, _ = run(
            "signature", "--eq", sample_data.CUBIC_PATH, "--from", "2", "--to", "1"
        )
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_equivalent(self):
        options = ["--samples", "64", "--window", "0.3"]
        code, out = run(
            "equivalent",
            "--eq1",
            sample_data.CUBIC_PATH,
            "--eq2",
            sample_data.CUBIC_TRANSFORMED_PATH,
            "--at1",
            "1",
            "--at2",
            "2",
            *options,
        )
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["verdict"], "Equivalent")

        code, out = run(
            "equivalent",
            "--eq1",
            sample_data.CUBIC_PATH,
            "--eq2",
            sample_data.CUBIC_SQUARE_PATH,
            "--at1",
            "1",
            "--at2",
            "1",
            *options,
        )
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(out)["verdict"], "NotEquivalent")

    def test_transform(self):
        code, out = run(
            "transform", "--eq", sample_data.CUBIC_PATH, "--at", "0.5", "--g", "2"
        )
        self.assertEqual(code, cli.EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["transformation"], {"f": "x", "g": "2", "h": "0"})
        self.assertAlmostEqual(report["derivatives"]["a"][0], 0.25)
        self.assertAlmostEqual(report["derivatives"]["d"][1], 2.0)

    def test_emit_equation(self):
        code, out = run(
            "transform",
            "--eq",
            sample_data.CUBIC_PATH,
            "--at",
            "1",
            "--f",
            "2*x",
            "--emit-equation",
            "-",
        )
        self.assertEqual(code, cli.EXIT_OK)
        source = transform.load_source(yaml.safe_load(out))
        self.assertIsInstance(source, transform.TransformedEquation)
        self.assertEqual(source.anchor, 1.0)

    def test_emit_equation_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "image.yml")
            code, out = run(
                "transform",
                "--eq",
                sample_data.CUBIC_TRANSFORMED_PATH,
                "--at",
                "2",
                "--f",
                "x-1",
                "--emit-equation",
                path,
            )
            self.assertEqual(code, cli.EXIT_OK)
            self.assertEqual(out, "")
            source = cli.load_source(path)
            self.assertAlmostEqual(source.preimage(1.0), 1.0)

    def test_missing_equation_file(self):
        code, _ = run("classify", "--eq", "./docs/missing.yml", "--at", "1")
        self.assertEqual(code, cli.EXIT_DATA)

    def test_bad_arguments(self):
        code, _ = run("classify", "--eq", sample_data.CUBIC_PATH, "--at", "one")
        self.assertEqual(code, cli.EXIT_USAGE)
        code, _ = run("integrate", "--eq", sample_data.CUBIC_PATH)
        self.assertEqual(code, cli.EXIT_USAGE)
        code, _ = run("signature", "--eq", sample_data.CUBIC_PATH, "--samples", "2")
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_bad_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "config.yml")
            with open(path, "w", encoding="utf-8") as f:
                f.write("jet:\n  depth: 3\n")
            stream = io.StringIO()
            argv = ["classify", "--eq", sample_data.CUBIC_PATH, "--at", "1"]
            code = cli.main(argv=[*argv, "--config", path], stream=stream)
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_bad_expression(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "eq.yml")
            with open(path, "w", encoding="utf-8") as f:
                f.write("family: k3\ncoefficients: {a: 1, b: 0, c: 0, d: x+}\n")
            code, _ = run("classify", "--eq", path, "--at", "1")
        self.assertEqual(code, cli.EXIT_DATA)

    @mock.patch("abel_equiv.cli.run_verify")
    def test_verify(self, mock_run_verify):
        suite = SuiteResult("demo", 1e-9)
        suite.record(0.0)
        mock_run_verify.return_value = VerifyReport(42, 20, [suite])
        code, out = run("verify", "--eq", sample_data.CUBIC_PATH)
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["passed"])
        config, source = mock_run_verify.call_args.args
        self.assertEqual(config.seed, 42)
        self.assertEqual(source, sample_data.create_cubic())

        suite.record(1.0)
        code, _ = run("verify", "--trials", "3")
        self.assertEqual(code, 1)
        config, source = mock_run_verify.call_args.args
        self.assertEqual(config.trials, 3)
        self.assertIsNone(source)

    @mock.patch("abel_equiv.cli.run_verify", side_effect=RuntimeError("boom"))
    def test_internal_error(self, mock_run_verify):
        code, _ = run("verify")
        self.assertEqual(code, cli.EXIT_INTERNAL)

    @mock.patch(
        "abel_equiv.cli.equivalence.signature",
        side_effect=ValueError("x and y arrays must be equal in length"),
    )
    def test_value_error_inside_a_command_is_internal(self, mock_signature):
        code, _ = run(
            "signature", "--eq", sample_data.CUBIC_PATH, "--from", "1", "--to", "2"
        )
        self.assertEqual(code, cli.EXIT_INTERNAL)
        mock_signature.assert_called_once()


if __name__ == "__main__":
    unittest.main()
