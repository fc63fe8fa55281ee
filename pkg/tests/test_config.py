import os
import tempfile
import unittest
from unittest import mock

from abel_equiv import config
from abel_equiv.config import RunConfig
from abel_equiv.errors import ConfigError
from tests import sample_data


class TestRunConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = RunConfig.create()
        self.assertEqual(cfg.order, 8)
        self.assertEqual(cfg.tol_zero, 1e-9)
        self.assertEqual(cfg.tol_match, 1e-5)
        self.assertEqual(cfg.samples, 128)
        self.assertEqual(cfg.output_format, "json")
        self.assertEqual(cfg.threads, 1)

    def test_sections(self):
        cfg = RunConfig.create(
            {
                "jet": {"order": 6},
                "tolerances": {"zero": "1e-8", "min_overlap": 0.25},
                "signature": {"window": 0.2, "samples": 32},
                "verify": {"seed": 7},
                "output": {"format": "text"},
                "threads": 2,
            }
        )
        self.assertEqual(cfg.order, 6)
        self.assertEqual(cfg.tol_zero, 1e-8)
        self.assertEqual(cfg.min_overlap, 0.25)
        self.assertEqual(cfg.window, 0.2)
        self.assertEqual(cfg.samples, 32)
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(cfg.output_format, "text")
        self.assertEqual(cfg.threads, 2)

    def test_unknown_section(self):
        with self.assertRaises(ConfigError):
            RunConfig.create({"server": {"url": "x"}})

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            RunConfig.create({"jet": {"depth": 3}})

    def test_section_must_be_a_mapping(self):
        with self.assertRaises(ConfigError):
            RunConfig.create({"jet": 3})

    def test_not_a_mapping(self):
        with self.assertRaises(ConfigError):
            RunConfig.create(["jet"])

    def test_bad_values(self):
        with self.assertRaises(ConfigError):
            RunConfig.create({"signature": {"samples": "many"}})
        with self.assertRaises(ConfigError):
            RunConfig.create({"signature": {"samples": 4}})
        with self.assertRaises(ConfigError):
            RunConfig.create({"tolerances": {"min_overlap": 1.5}})
        with self.assertRaises(ConfigError):
            RunConfig.create({"output": {"format": "xml"}})
        with self.assertRaises(ConfigError):
            RunConfig(order=1)

    @mock.patch.dict(os.environ, {"ABEL_EQUIV_THREADS": "3"})
    def test_threads_from_environment(self):
        cfg = RunConfig.create({"threads": 2})
        self.assertEqual(cfg.threads, 3)

    def test_override(self):
        cfg = RunConfig().override(samples=16, window=None)
        self.assertEqual(cfg.samples, 16)
        self.assertEqual(cfg.window, 0.5)
        with self.assertRaises(ConfigError):
            cfg.override(trials=0)


class TestLoadConfig(unittest.TestCase):
    def test_docs_config(self):
        cfg = config.load_config(sample_data.CONFIG_PATH)
        self.assertEqual(cfg, RunConfig())

    def test_missing_explicit_path(self):
        with self.assertRaises(ConfigError):
            config.load_config("./docs/missing.yml")

    def test_invalid_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "config.yml")
            with open(path, "w", encoding="utf-8") as f:
                f.write("jet: [order\n")
            with self.assertRaises(ConfigError):
                config.load_config(path)

    def test_default_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "config.yml")
            with mock.patch.dict(os.environ, {"ABEL_EQUIV_CFG_PATH": path}):
                self.assertEqual(config.default_config_path(), path)
                self.assertEqual(config.load_config(), RunConfig())

                with open(path, "w", encoding="utf-8") as f:
                    f.write("verify:\n  trials: 3\n")
                self.assertEqual(config.load_config().trials, 3)


if __name__ == "__main__":
    unittest.main()
