# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Tests for pipeline settings and simulator config loading."""

from __future__ import annotations

import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from oaca.api import OacaPipeline
from oaca.config import PRESETS, OacaSettings, SimConfigSchemaError, load_config, load_preset, load_sim_config
from oaca.config.loader import default_config_path
from oaca.core.errors import InvalidConfig, OacaDataError
from oaca.core.simulate import generate
from tests.support import small_sim_config


def _write(tmpdir: str, name: str, text: str) -> Path:
    path = Path(tmpdir) / name
    path.write_text(text, encoding="utf-8")
    return path


class PipelineConfigTests(unittest.TestCase):
    def test_defaults(self) -> None:
        settings = load_config()
        self.assertEqual(settings.ingest.window, (2010, 2020))
        self.assertEqual(settings.rake.tolerance, 1e-8)
        self.assertEqual(settings.rake.max_iterations, 1000)
        self.assertIsNone(settings.rake.max_weight_ratio)
        self.assertEqual(settings.metrics.periods, ["2010-2012", "2018-2020"])
        self.assertEqual(settings.runtime.threads, 1)
        self.assertIsNone(settings.runtime.seed)

    def test_shipped_yaml_matches_defaults(self) -> None:
        self.assertEqual(load_config(default_config_path()).model_dump(), OacaSettings().model_dump())

    def test_file_values(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = _write(tmp, "oaca.yaml", "rake:\n  per_year: true\n  max_weight_ratio: 5\nmetrics:\n  periods: 2010-2014\n")
            settings = load_config(path)
        self.assertTrue(settings.rake.per_year)
        self.assertEqual(settings.rake.max_weight_ratio, 5.0)
        self.assertEqual(settings.metrics.periods, ["2010-2014"])

    def test_environment_overrides_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = _write(tmp, "oaca.yaml", "rake:\n  tolerance: 1.0e-4\n  max_iterations: 50\n")
            with patch.dict(os.environ, {"OACA_RAKE__TOLERANCE": "1e-6"}):
                settings = load_config(path)
        self.assertEqual(settings.rake.tolerance, 1e-6)
        self.assertEqual(settings.rake.max_iterations, 50)

    def test_invalid_values(self) -> None:
        for text in ("rake:\n  tolerance: -1\n", "rake:\n  unknown: 1\n", "ingest:\n  window_start: 2020\n  window_end: 2010\n"):
            with self.subTest(text=text):
                with tempfile.TemporaryDirectory() as tmp:
                    with self.assertRaises(InvalidConfig) as ctx:
                        load_config(_write(tmp, "oaca.yaml", text))
                self.assertIn("Invalid pipeline config", str(ctx.exception))

    def test_top_level_must_be_mapping(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(OacaDataError) as ctx:
                load_config(_write(tmp, "oaca.yaml", "- rake\n- metrics\n"))
        self.assertIn("Expected: mapping", str(ctx.exception))

    def test_missing_file(self) -> None:
        with self.assertRaises(OacaDataError):
            load_config("/nonexistent/oaca.yaml")

    def test_invalid_yaml(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(OacaDataError):
                load_config(_write(tmp, "oaca.yaml", "rake: [unclosed\n"))


class RuntimeSeedTests(unittest.TestCase):
    def test_simulator_seed_kept_by_default(self) -> None:
        pipeline = OacaPipeline.from_config()
        self.assertIsNone(pipeline.settings.runtime.seed)
        pipeline.simulate(small_sim_config(n_records=10))
        self.assertEqual(pipeline.sim_config.seed, 42)  # type: ignore[union-attr]

    def test_environment_seed_replaces_simulator_seed(self) -> None:
        with patch.dict(os.environ, {"OACA_RUNTIME__SEED": "5"}):
            pipeline = OacaPipeline.from_config()
        corpus = pipeline.simulate(small_sim_config(n_records=10))
        self.assertEqual(pipeline.sim_config.seed, 5)  # type: ignore[union-attr]
        self.assertEqual(corpus, generate(small_sim_config(n_records=10, seed=5)))

    def test_file_seed_replaces_simulator_seed(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            pipeline = OacaPipeline.from_config(_write(tmp, "oaca.yaml", "runtime:\n  seed: 9\n"))
        pipeline.simulate(small_sim_config(n_records=10))
        self.assertEqual(pipeline.sim_config.seed, 9)  # type: ignore[union-attr]

    def test_explicit_seed_wins(self) -> None:
        with patch.dict(os.environ, {"OACA_RUNTIME__SEED": "5"}):
            pipeline = OacaPipeline.from_config(seed=11)
        pipeline.simulate(small_sim_config(n_records=10))
        self.assertEqual(pipeline.sim_config.seed, 11)  # type: ignore[union-attr]
        pipeline.simulate(small_sim_config(n_records=10), seed=3)
        self.assertEqual(pipeline.sim_config.seed, 3)  # type: ignore[union-attr]


class SimConfigLoadingTests(unittest.TestCase):
    def test_every_preset_loads(self) -> None:
        for name in PRESETS:
            with self.subTest(preset=name):
                config = load_preset(name)
                self.assertEqual(config.n_records, 200_000)

    def test_preset_effects(self) -> None:
        self.assertEqual(load_preset("null").citations.delta_full, 0.0)
        self.assertEqual(load_preset("null").oa_assignment.gold_full.impact_coef, 0.0)
        self.assertEqual(load_preset("confounded-null").oa_assignment.gold_full.impact_coef, 0.5)
        self.assertEqual(load_preset("planted-30").citations.delta_hybrid, 0.3)
        shape = load_preset("paper-shape")
        self.assertLess(shape.citations.delta_full, 0)
        self.assertGreater(shape.citations.delta_hybrid, 0)

    def test_preset_name_or_path(self) -> None:
        self.assertEqual(load_sim_config("planted-30"), load_preset("planted-30"))
        with tempfile.TemporaryDirectory() as tmp:
            path = _write(tmp, "sim.json", json.dumps({"seed": 5, "n_records": 10}))
            config = load_sim_config(path)
        self.assertEqual((config.seed, config.n_records), (5, 10))

    def test_unknown_preset(self) -> None:
        with self.assertRaises(OacaDataError):
            load_preset("planted-50")

    def test_schema_error_names_json_path(self) -> None:
        document = {"seed": "x", "oa_assignment": {"gold_full": {"base_probability": 2}}}
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(SimConfigSchemaError) as ctx:
                load_sim_config(_write(tmp, "sim.json", json.dumps(document)))
        message = str(ctx.exception)
        self.assertIn("$.oa_assignment.gold_full.base_probability", message)
        self.assertIn("(1 additional error(s))", message)

    def test_model_checks_after_schema(self) -> None:
        document = {"year_start": 2020, "year_end": 2010}
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(InvalidConfig):
                load_sim_config(_write(tmp, "sim.yaml", json.dumps(document)))


if __name__ == "__main__":
    unittest.main()
