# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Tests for the synthetic corpus generator."""

from __future__ import annotations

import os
import unittest

import numpy as np
from scipy import stats

from oaca.core.errors import InvalidConfig
from oaca.core.models import DISCIPLINES, DOC_TYPES
from oaca.core.simulate import SIM_BLOCK_SIZE, generate, parse_sim_config, route_probabilities, true_oaca
from oaca.core.stratify import classify_corpus
from tests.support import small_sim_config

ACCEPTANCE = os.environ.get("OACA_ACCEPTANCE") == "1"


class GenerateTests(unittest.TestCase):
    def test_empty_corpus(self) -> None:
        corpus = generate(small_sim_config(n_records=0))
        self.assertEqual(len(corpus), 0)
        self.assertTrue(corpus.source_digest.startswith("sha256:"))

    def test_same_config_same_corpus(self) -> None:
        config = small_sim_config(n_records=2_000)
        first, second = generate(config), generate(config)
        self.assertEqual(first, second)
        self.assertEqual(first.source_digest, second.source_digest)

    def test_thread_count_does_not_change_corpus(self) -> None:
        config = small_sim_config(n_records=2 * SIM_BLOCK_SIZE + 123)
        serial = generate(config, threads=1)
        threaded = generate(config, threads=4)
        self.assertEqual(serial, threaded)
        self.assertEqual(serial.source_digest, threaded.source_digest)

    def test_seed_changes_corpus(self) -> None:
        first = generate(small_sim_config(n_records=500, seed=1))
        second = generate(small_sim_config(n_records=500, seed=2))
        self.assertNotEqual(first, second)

    def test_ids_and_window(self) -> None:
        corpus = generate(small_sim_config(n_records=10))
        self.assertEqual(str(corpus.ids[0]), "sim000000000")
        self.assertEqual(str(corpus.ids[9]), "sim000000009")
        self.assertEqual(corpus.window, (2019, 2020))
        self.assertTrue(np.all((corpus.pub_year >= 2019) & (corpus.pub_year <= 2020)))

    def test_records_are_in_domain(self) -> None:
        corpus = generate(small_sim_config(n_records=3_000))
        self.assertTrue(np.all(corpus.n_countries >= 1))
        self.assertTrue(np.all(corpus.n_fundings >= 0))
        self.assertTrue(np.all(corpus.citations >= 0))
        self.assertTrue(np.all(np.isfinite(corpus.journal_impact)))
        self.assertFalse(corpus.has_erc_funding.any())
        self.assertFalse(corpus.cited_by_patent.any())

    def test_discipline_and_doc_type_marginals(self) -> None:
        config = small_sim_config(n_records=20_000, discipline_weights={"LS1": 1.0, "PE2": 1.0, "SH3": 2.0})
        corpus = generate(config)
        codes = [DISCIPLINES.index(name) for name in ("LS1", "PE2", "SH3")]
        observed = np.bincount(corpus.discipline, minlength=len(DISCIPLINES))[codes]
        self.assertEqual(int(observed.sum()), len(corpus))
        result = stats.chisquare(observed, len(corpus) * np.array([0.25, 0.25, 0.5]))
        self.assertGreater(result.pvalue, 1e-6)

        weights = np.array([config.doc_type_weights[name] for name in DOC_TYPES])
        observed = np.bincount(corpus.doc_type, minlength=len(DOC_TYPES))
        result = stats.chisquare(observed, len(corpus) * weights / weights.sum())
        self.assertGreater(result.pvalue, 1e-6)

    def test_oa_assignment_follows_impact(self) -> None:
        corpus = generate(small_sim_config(n_records=20_000))
        impact = classify_corpus(corpus).indices["impact"]
        full = corpus.oa_status == 0
        low_share = full[impact == 0].mean()
        high_share = full[impact == 4].mean()
        self.assertGreater(high_share, 2 * low_share)

    def test_unconfounded_assignment_matches_base_rates(self) -> None:
        config = small_sim_config(
            n_records=20_000,
            oa_assignment={
                "gold_full": {"base_probability": 0.2, "impact_coef": 0.0},
                "gold_hybrid": {"base_probability": 0.1, "impact_coef": 0.0},
            },
        )
        counts = generate(config).status_counts()
        self.assertAlmostEqual(counts["gold_full"] / 20_000, 0.2, delta=0.015)
        self.assertAlmostEqual(counts["gold_hybrid"] / 20_000, 0.1, delta=0.015)


class NullModelTests(unittest.TestCase):
    def test_oa_and_non_oa_citations_indistinguishable(self) -> None:
        config = small_sim_config(
            n_records=2_000,
            oa_assignment={
                "gold_full": {"base_probability": 0.15, "impact_coef": 0.0},
                "gold_hybrid": {"base_probability": 0.10, "impact_coef": 0.0},
            },
            citations={"impact_effects": [1.0] * 5},
        )
        pvalues: list[float] = []
        for seed in range(100):
            corpus = generate(config.model_copy(update={"seed": seed}))
            oa = np.concatenate([corpus.citations[corpus.status_rows(route)] for route in ("gold_full", "gold_hybrid")])
            non_oa = corpus.citations[corpus.status_rows("non_oa")]
            pvalues.append(float(stats.ttest_ind(oa, non_oa, equal_var=False).pvalue))
        self.assertLessEqual(sum(value < 0.01 for value in pvalues), 6)
        self.assertGreater(stats.kstest(pvalues, "uniform").pvalue, 1e-3)


@unittest.skipUnless(ACCEPTANCE, "set OACA_ACCEPTANCE=1 to run large marginal checks")
class MarginalDistributionTests(unittest.TestCase):
    def test_marginals_over_seeds(self) -> None:
        config = small_sim_config(n_records=100_000)
        n = config.n_records
        discipline_codes = [DISCIPLINES.index(name) for name in config.discipline_weights]
        discipline_p = np.array(list(config.discipline_weights.values()))
        doc_weights = np.array([config.doc_type_weights.get(name, 0.0) for name in DOC_TYPES])
        doc_codes = np.flatnonzero(doc_weights > 0)
        years = np.arange(config.year_start, config.year_end + 1)
        eu27 = config.features.eu27_probability
        failures = {"discipline": 0, "doc_type": 0, "pub_year": 0, "eu27": 0}
        for seed in range(20):
            corpus = generate(config.model_copy(update={"seed": seed}))
            observed = {
                "discipline": np.bincount(corpus.discipline, minlength=len(DISCIPLINES))[discipline_codes],
                "doc_type": np.bincount(corpus.doc_type, minlength=len(DOC_TYPES))[doc_codes],
                "pub_year": np.array([np.count_nonzero(corpus.pub_year == year) for year in years]),
                "eu27": np.array([np.count_nonzero(corpus.has_eu27_address), np.count_nonzero(~corpus.has_eu27_address)]),
            }
            expected = {
                "discipline": n * discipline_p / discipline_p.sum(),
                "doc_type": n * doc_weights[doc_codes] / doc_weights[doc_codes].sum(),
                "pub_year": np.full(len(years), n / len(years)),
                "eu27": n * np.array([eu27, 1.0 - eu27]),
            }
            for name in failures:
                if stats.chisquare(observed[name], expected[name]).pvalue < 0.001:
                    failures[name] += 1
        for name, count in failures.items():
            with self.subTest(marginal=name):
                self.assertLessEqual(count, 1)


class RouteProbabilityTests(unittest.TestCase):
    def test_middle_class_gets_base_probabilities(self) -> None:
        config = small_sim_config()
        p_full, p_hybrid = route_probabilities(config, np.array([3]), np.array([0]))
        self.assertAlmostEqual(float(p_full[0]), 0.15, places=12)
        self.assertAlmostEqual(float(p_hybrid[0]), 0.10, places=12)

    def test_probabilities_stay_valid(self) -> None:
        config = small_sim_config()
        classes = np.array([1, 2, 3, 4, 5])
        p_full, p_hybrid = route_probabilities(config, classes, np.zeros(5, dtype=np.int64))
        self.assertTrue(np.all(p_full + p_hybrid < 1.0))
        self.assertTrue(np.all(np.diff(p_full) > 0))

    def test_zero_base_probability_disables_route(self) -> None:
        config = small_sim_config(oa_assignment={"gold_hybrid": {"base_probability": 0.0}})
        _, p_hybrid = route_probabilities(config, np.array([1, 5]), np.array([0, 0]))
        self.assertEqual(p_hybrid.tolist(), [0.0, 0.0])


class TrueOacaTests(unittest.TestCase):
    def test_planted_effect(self) -> None:
        config = small_sim_config(citations={"delta_full": 0.3, "delta_hybrid": -0.1})
        self.assertAlmostEqual(true_oaca(config, "gold_full"), 30.0, places=9)
        self.assertAlmostEqual(true_oaca(config, "gold_hybrid"), -10.0, places=9)

    def test_negative_effect(self) -> None:
        config = small_sim_config(citations={"delta_full": -0.2})
        self.assertAlmostEqual(true_oaca(config, "gold_full"), -20.0, places=9)

    def test_unknown_route(self) -> None:
        with self.assertRaises(ValueError):
            true_oaca(small_sim_config(), "green")  # type: ignore[arg-type]


class SimConfigValidationTests(unittest.TestCase):
    def test_invalid_documents(self) -> None:
        cases = [
            ({"n_records": -1}, "n_records"),
            ({"unknown_key": 1}, "unknown_key"),
            ({"year_start": 2020, "year_end": 2010}, "year_end"),
            ({"citations": {"impact_effects": [1.0, 1.0]}}, "impact_effects"),
            (
                {"oa_assignment": {"gold_full": {"base_probability": 0.6}, "gold_hybrid": {"base_probability": 0.5}}},
                "base_probability",
            ),
        ]
        for document, needle in cases:
            with self.subTest(document=document):
                with self.assertRaises(InvalidConfig) as ctx:
                    parse_sim_config(document)
                self.assertIn(needle, str(ctx.exception))
                self.assertTrue(ctx.exception.messages)

    def test_model_instances_pass_through(self) -> None:
        config = small_sim_config()
        self.assertIs(parse_sim_config(config), config)


if __name__ == "__main__":
    unittest.main()
