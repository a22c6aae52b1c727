# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Tests for raking-ratio calibration of control weights."""

from __future__ import annotations

import unittest
from dataclasses import replace

import numpy as np

from oaca.core.cohort import build_cohort
from oaca.core.errors import EmptySample, InfeasibleTargets, OacaDataError, StructuralZero
from oaca.core.models import DISCIPLINES, DOC_TYPES
from oaca.core.rake import (
    MarginSpec,
    RakingProblem,
    WeightVector,
    build_raking_problem,
    compute_margins,
    margin_discrepancy,
    post_stratification_weights,
    rake_cohort,
    rake_weights,
    trim_weights,
)
from oaca.core.records import Corpus
from oaca.core.stratify import classify_corpus
from tests.support import make_corpus, small_corpus

LABELS_A = [0, 0, 0, 1, 1, 1]
LABELS_B = [0, 1, 1, 0, 0, 1]
WIDE_MARGIN_SIZES = (11, 27, 5, 5, 6, 2, 2, 2)


def two_margin_problem(**options) -> RakingProblem:
    margins = [
        MarginSpec("a", (0, 1), np.array([0.3, 0.7])),
        MarginSpec("b", (0, 1), np.array([0.6, 0.4])),
    ]
    return RakingProblem.from_labels(np.arange(6), {"a": LABELS_A, "b": LABELS_B}, margins, **options)


def dense_ipf(labels: list, targets: list[np.ndarray], total: float, max_sweeps: int = 100_000) -> np.ndarray:
    """Reference: IPF on the dense contingency table, cell mass spread evenly over its records."""
    labels = [np.asarray(item) for item in labels]
    shape = tuple(len(item) for item in targets)
    counts = np.zeros(shape)
    np.add.at(counts, tuple(labels), 1.0)
    fitted = counts / counts.sum()
    for _ in range(max_sweeps):
        gap = 0.0
        for axis, target in enumerate(targets):
            others = tuple(index for index in range(len(shape)) if index != axis)
            current = fitted.sum(axis=others)
            gap = max(gap, float(np.max(np.abs(current - target))))
            view = [1] * len(shape)
            view[axis] = -1
            fitted = fitted * np.divide(target, current, out=np.zeros_like(current), where=current > 0).reshape(view)
        if gap < 1e-15:
            break
    cells = tuple(labels)
    return total * fitted[cells] / counts[cells]


def random_feasible_problem(rng: np.random.Generator) -> tuple[RakingProblem, list[np.ndarray], list[np.ndarray]]:
    n = int(rng.integers(12, 40))
    hidden = rng.uniform(0.5, 2.0, n)
    margins, labels, targets = [], [], []
    for position in range(int(rng.integers(2, 4))):
        size = int(rng.integers(2, 5))
        column = np.concatenate([np.arange(size), rng.integers(0, size, n - size)])
        rng.shuffle(column)
        target = np.bincount(column, weights=hidden, minlength=size) / hidden.sum()
        target = target / target.sum()
        margins.append(MarginSpec(f"m{position}", tuple(range(size)), target))
        labels.append(column)
        targets.append(target)
    problem = RakingProblem(
        rows=np.arange(n),
        margins=tuple(margins),
        pool_indices=tuple(labels),
        tolerance=1e-14,
        max_iterations=20_000,
        total_weight=float(n),
    )
    return problem, labels, targets


def random_wide_problem(rng: np.random.Generator, n: int = 400) -> RakingProblem:
    """Eight margins of mixed width, every category present, targets from lognormal hidden weights."""
    hidden = rng.lognormal(0.0, 0.5, n)
    margins, indices = [], []
    for position, size in enumerate(WIDE_MARGIN_SIZES):
        column = np.concatenate([np.arange(size), rng.integers(0, size, n - size)])
        rng.shuffle(column)
        target = np.bincount(column, weights=hidden, minlength=size)
        margins.append(MarginSpec(f"m{position}", tuple(range(size)), target / target.sum()))
        indices.append(column)
    return RakingProblem(
        rows=np.arange(n), margins=tuple(margins), pool_indices=tuple(indices), total_weight=float(n)
    )


def random_cohort_corpus(rng: np.random.Generator, n: int = 60) -> Corpus:
    """Records drawn from a handful of random profiles; the first two always form a matched pair."""
    profiles = [
        {
            "pub_year": int(rng.integers(2010, 2013)),
            "discipline": DISCIPLINES[int(rng.integers(0, 3))],
            "doc_type": DOC_TYPES[int(rng.integers(0, 2))],
            "journal_impact": float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])),
            "n_countries": int(rng.integers(1, 4)),
            "n_fundings": int(rng.integers(0, 3)),
            "has_eu27_address": bool(rng.integers(0, 2)),
        }
        for _ in range(int(rng.integers(3, 8)))
    ]
    statuses = rng.choice(["gold_full", "non_oa", "non_oa"], size=n)
    statuses[:2] = ["gold_full", "non_oa"]
    picks = rng.integers(0, len(profiles), n)
    picks[:2] = 0
    return make_corpus({**profiles[pick], "oa_status": str(status)} for pick, status in zip(picks, statuses))


class RakeWeightsTests(unittest.TestCase):
    def test_matches_dense_ipf(self) -> None:
        problem = two_margin_problem(tolerance=1e-15, max_iterations=10_000, total_weight=10.0)
        vector = rake_weights(problem)
        expected = dense_ipf([LABELS_A, LABELS_B], [np.array([0.3, 0.7]), np.array([0.6, 0.4])], 10.0)
        np.testing.assert_allclose(vector.weights, expected, rtol=0, atol=1e-12)
        self.assertAlmostEqual(float(vector.weights.sum()), 10.0, places=12)

    def test_unbalanced_two_by_two(self) -> None:
        labels_a, labels_b = [0, 0, 0, 1, 1], [0, 0, 1, 0, 1]
        half = np.array([0.5, 0.5])
        margins = [MarginSpec("a", (0, 1), half), MarginSpec("b", (0, 1), half)]
        problem = RakingProblem.from_labels(
            np.arange(5), {"a": labels_a, "b": labels_b}, margins, tolerance=1e-15, max_iterations=10_000, total_weight=5.0
        )
        vector = rake_weights(problem)
        self.assertTrue(vector.converged)
        np.testing.assert_allclose(vector.weights, dense_ipf([labels_a, labels_b], [half, half], 5.0), rtol=0, atol=1e-12)

    def test_random_feasible_problems_match_dense_ipf(self) -> None:
        rng = np.random.default_rng(20240611)
        for case in range(20):
            problem, labels, targets = random_feasible_problem(rng)
            with self.subTest(case=case, n=len(problem.rows), margins=len(labels)):
                vector = rake_weights(problem)
                self.assertTrue(vector.converged)
                expected = dense_ipf(labels, targets, float(len(problem.rows)))
                np.testing.assert_allclose(vector.weights, expected, rtol=0, atol=1e-12)

    def test_random_sweep_orders_reach_same_weights(self) -> None:
        rng = np.random.default_rng(7)
        for case in range(20):
            problem, labels, _ = random_feasible_problem(rng)
            order = [int(item) for item in rng.permutation(len(labels))]
            with self.subTest(case=case, order=order):
                forward = rake_weights(problem)
                permuted = rake_weights(problem, sweep_order=order)
                self.assertTrue(permuted.converged)
                np.testing.assert_allclose(permuted.weights, forward.weights, rtol=0, atol=1e-11)

    def test_wide_random_problems_converge(self) -> None:
        rng = np.random.default_rng(20240612)
        converged = 0
        for case in range(100):
            problem = random_wide_problem(rng)
            vector = rake_weights(problem)
            if vector.converged:
                converged += 1
                with self.subTest(case=case):
                    self.assertLessEqual(margin_discrepancy(problem, vector.weights), 1e-8)
                    self.assertLessEqual(vector.iterations_used, 1000)
        self.assertGreaterEqual(converged, 95)

    def test_total_weight_scales_weights(self) -> None:
        rng = np.random.default_rng(3)
        for case in range(10):
            problem, _, _ = random_feasible_problem(rng)
            base = rake_weights(problem)
            for factor in (0.25, 7.0, 1e3):
                with self.subTest(case=case, factor=factor):
                    scaled = rake_weights(replace(problem, total_weight=problem.total_weight * factor))
                    np.testing.assert_allclose(scaled.weights, base.weights * factor, rtol=1e-12)
                    self.assertAlmostEqual(float(scaled.weights.sum()), problem.total_weight * factor, delta=1e-9 * factor)

    def test_margins_satisfied(self) -> None:
        problem = two_margin_problem()
        vector = rake_weights(problem)
        self.assertTrue(vector.converged)
        self.assertLessEqual(margin_discrepancy(problem, vector.weights), 1e-8)
        self.assertEqual(vector.final_discrepancy, margin_discrepancy(problem, vector.weights))

    def test_reported_discrepancy_is_of_returned_weights(self) -> None:
        problem = two_margin_problem(total_weight=10.0)
        vector = rake_weights(problem)
        self.assertEqual(vector.final_discrepancy, margin_discrepancy(problem, vector.weights))
        self.assertEqual(vector.converged, vector.final_discrepancy <= problem.tolerance)

    def test_sweep_order_does_not_change_limit(self) -> None:
        problem = two_margin_problem(tolerance=1e-13, max_iterations=10_000)
        forward = rake_weights(problem)
        backward = rake_weights(problem, sweep_order=[1, 0])
        np.testing.assert_allclose(forward.weights, backward.weights, rtol=1e-6)

    def test_bad_sweep_order_rejected(self) -> None:
        with self.assertRaises(OacaDataError):
            rake_weights(two_margin_problem(), sweep_order=[0, 0])

    def test_single_margin_converges_in_one_sweep(self) -> None:
        margin = MarginSpec("a", (0, 1), np.array([0.25, 0.75]))
        problem = RakingProblem.from_labels(np.arange(6), {"a": LABELS_A}, [margin], total_weight=4.0)
        vector = rake_weights(problem)
        self.assertEqual(vector.iterations_used, 1)
        self.assertTrue(vector.converged)
        np.testing.assert_allclose(vector.weights, [1 / 3, 1 / 3, 1 / 3, 1.0, 1.0, 1.0], rtol=1e-12)

    def test_structural_zero(self) -> None:
        margin = MarginSpec("a", (0, 1), np.array([0.5, 0.5]))
        problem = RakingProblem.from_labels(np.arange(3), {"a": [0, 0, 0]}, [margin])
        with self.assertRaises(StructuralZero) as ctx:
            rake_weights(problem)
        self.assertEqual(ctx.exception.margin, "a")
        self.assertEqual(ctx.exception.category, 1)

    def test_infeasible_targets(self) -> None:
        for targets in ([0.5, 0.4], [1.2, -0.2]):
            with self.subTest(targets=targets):
                margin = MarginSpec("a", (0, 1), np.array(targets))
                problem = RakingProblem.from_labels(np.arange(6), {"a": LABELS_A}, [margin])
                with self.assertRaises(InfeasibleTargets):
                    rake_weights(problem)

    def test_target_length_must_match_categories(self) -> None:
        with self.assertRaises(InfeasibleTargets):
            MarginSpec("a", (0, 1, 2), np.array([0.5, 0.5]))

    def test_zero_target_category_gets_zero_weight(self) -> None:
        margin = MarginSpec("a", (0, 1), np.array([1.0, 0.0]))
        problem = RakingProblem.from_labels(np.arange(3), {"a": [0, 0, 1]}, [margin], total_weight=2.0)
        vector = rake_weights(problem)
        self.assertTrue(vector.converged)
        np.testing.assert_allclose(vector.weights, [1.0, 1.0, 0.0])
        self.assertEqual(vector.zero_target_categories, (("a", 1),))
        self.assertEqual(vector.diagnostics()["zero_weight_records"], 1)

    def test_label_outside_categories(self) -> None:
        margin = MarginSpec("a", (0, 1), np.array([0.5, 0.5]))
        with self.assertRaises(OacaDataError):
            RakingProblem.from_labels(np.arange(2), {"a": [0, 7]}, [margin])

    def test_empty_pool(self) -> None:
        margin = MarginSpec("a", (0, 1), np.array([0.5, 0.5]))
        problem = RakingProblem.from_labels(np.arange(0), {"a": []}, [margin])
        with self.assertRaises(EmptySample):
            rake_weights(problem)

    def test_non_convergence_is_reported_not_raised(self) -> None:
        vector = rake_weights(two_margin_problem(tolerance=1e-15, max_iterations=1))
        self.assertFalse(vector.converged)
        self.assertEqual(vector.iterations_used, 1)
        self.assertGreater(vector.final_discrepancy, 1e-15)


class TrimWeightsTests(unittest.TestCase):
    def test_caps_weight_ratio_and_keeps_total(self) -> None:
        vector = WeightVector(
            rows=np.arange(4),
            weights=np.array([1.0, 1.0, 1.0, 10.0]),
            iterations_used=1,
            final_discrepancy=0.0,
            converged=True,
            total_weight=13.0,
        )
        trimmed = trim_weights(vector, 2.0)
        self.assertTrue(trimmed.trimmed)
        self.assertAlmostEqual(float(trimmed.weights.sum()), 13.0, places=9)
        self.assertLessEqual(float(trimmed.weights.max() / trimmed.weights.mean()), 2.0 + 1e-9)

    def test_ratio_must_exceed_one(self) -> None:
        vector = rake_weights(two_margin_problem())
        with self.assertRaises(OacaDataError):
            trim_weights(vector, 1.0)

    def test_trim_without_effect_keeps_convergence(self) -> None:
        problem = two_margin_problem()
        vector = rake_weights(problem)
        kept = trim_weights(vector, 1e6, problem)
        self.assertFalse(kept.trimmed)
        self.assertTrue(kept.converged)
        np.testing.assert_array_equal(kept.weights, vector.weights)

    def test_binding_trim_rechecks_margins(self) -> None:
        problem = two_margin_problem(tolerance=1e-12, max_iterations=10_000)
        vector = rake_weights(problem)
        self.assertTrue(vector.converged)
        capped = trim_weights(vector, 1.05, problem)
        self.assertTrue(capped.trimmed)
        self.assertEqual(capped.final_discrepancy, margin_discrepancy(problem, capped.weights))
        self.assertGreater(capped.final_discrepancy, problem.tolerance)
        self.assertFalse(capped.converged)


class RakeCohortTests(unittest.TestCase):
    corpus = small_corpus(n_records=6_000)

    def setUp(self) -> None:
        self.cohort = build_cohort(self.corpus, "gold_full")

    def test_margins_of_oa_sample_reproduced(self) -> None:
        vector = rake_cohort(self.cohort)
        self.assertTrue(vector.converged)
        problem = build_raking_problem(self.cohort)
        self.assertLessEqual(margin_discrepancy(problem, vector.weights), 1e-8)
        self.assertAlmostEqual(float(vector.weights.sum()), float(len(self.cohort.oa_rows)), places=6)
        np.testing.assert_array_equal(vector.rows, self.cohort.control_rows)

    def test_post_stratified_cell_ratio(self) -> None:
        shared = {"journal_impact": 1.0}
        rows = [
            *({**shared, "oa_status": "gold_full"} for _ in range(2)),
            *({**shared, "oa_status": "non_oa"} for _ in range(4)),
            {"journal_impact": 2.0, "oa_status": "gold_full"},
            {"journal_impact": 2.0, "oa_status": "non_oa"},
        ]
        cohort = build_cohort(make_corpus(rows), "gold_full")
        closed_form = post_stratification_weights(cohort)
        raked = rake_cohort(cohort, full_cross=True)
        np.testing.assert_allclose(closed_form.weights, [0.5, 0.5, 0.5, 0.5, 1.0])
        np.testing.assert_allclose(raked.weights, closed_form.weights, rtol=1e-12)
        np.testing.assert_array_equal(closed_form.rows, [2, 3, 4, 5, 7])

    def test_year_margin_tallies(self) -> None:
        years = [2010, 2010, 2011, 2012]
        corpus = make_corpus([{"pub_year": year, "oa_status": "gold_full"} for year in years])
        (margin,) = compute_margins(np.arange(4), classify_corpus(corpus), features=["year"])
        self.assertEqual(margin.categories[:3], (2010, 2011, 2012))
        np.testing.assert_array_equal(margin.targets[:3], [0.5, 0.25, 0.25])
        self.assertEqual(float(margin.targets[3:].sum()), 0.0)
        self.assertEqual(margin.sample_size, 4)

    def test_margins_are_oa_proportions(self) -> None:
        margins = compute_margins(self.cohort.oa_rows, self.cohort.table)
        self.assertEqual([margin.feature for margin in margins][:2], ["year", "discipline"])
        for margin in margins:
            self.assertAlmostEqual(float(margin.targets.sum()), 1.0, places=12)

    def test_full_cross_equals_post_stratification(self) -> None:
        raked = rake_cohort(self.cohort, full_cross=True)
        closed_form = post_stratification_weights(self.cohort)
        self.assertEqual(raked.iterations_used, 1)
        np.testing.assert_allclose(raked.weights, closed_form.weights, rtol=1e-9)

    def test_per_year_totals_follow_oa_counts(self) -> None:
        vector = rake_cohort(self.cohort, per_year=True)
        years = self.corpus.pub_year
        for year in np.unique(years[self.cohort.oa_rows]):
            with self.subTest(year=int(year)):
                in_year = years[vector.rows] == year
                expected = np.count_nonzero(years[self.cohort.oa_rows] == year)
                self.assertAlmostEqual(float(vector.weights[in_year].sum()), float(expected), places=6)
        np.testing.assert_array_equal(vector.rows, self.cohort.control_rows)

    def test_thread_count_does_not_change_weights(self) -> None:
        serial = rake_cohort(self.cohort, threads=1)
        threaded = rake_cohort(self.cohort, threads=4)
        np.testing.assert_array_equal(serial.weights, threaded.weights)
        self.assertEqual(serial.iterations_used, threaded.iterations_used)

    def test_trimmed_cohort_weights(self) -> None:
        vector = rake_cohort(self.cohort, max_weight_ratio=3.0)
        self.assertLessEqual(float(vector.weights.max() / vector.weights.mean()), 3.0 + 1e-9)

    def test_tight_trim_reports_nonconvergence(self) -> None:
        problem = build_raking_problem(self.cohort)
        vector = rake_cohort(self.cohort, max_weight_ratio=1.5)
        self.assertTrue(vector.trimmed)
        self.assertAlmostEqual(vector.final_discrepancy, margin_discrepancy(problem, vector.weights), places=15)
        self.assertGreater(vector.final_discrepancy, problem.tolerance)
        self.assertFalse(vector.converged)
        self.assertFalse(vector.diagnostics()["converged"])

    def test_random_cohorts_full_cross_matches_closed_form(self) -> None:
        rng = np.random.default_rng(99)
        for case in range(50):
            cohort = build_cohort(random_cohort_corpus(rng), "gold_full")
            with self.subTest(case=case, oa=len(cohort.oa_rows), controls=len(cohort.control_rows)):
                raked = rake_cohort(cohort, full_cross=True, tolerance=1e-12)
                closed_form = post_stratification_weights(cohort)
                self.assertTrue(raked.converged)
                np.testing.assert_array_equal(raked.rows, closed_form.rows)
                np.testing.assert_allclose(raked.weights, closed_form.weights, rtol=0, atol=1e-9)

    def test_diagnostics_shape(self) -> None:
        stats = rake_cohort(self.cohort).diagnostics()
        for key in ("n", "iterations", "final_discrepancy", "converged", "min", "max", "quantiles", "kish_effective_n"):
            self.assertIn(key, stats)
        self.assertEqual(stats["n"], len(self.cohort.control_rows))


if __name__ == "__main__":
    unittest.main()
