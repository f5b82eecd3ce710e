import os
import sys
import math
import unittest as ut
import warnings

import numpy as np

import cvplan as cv
from cvplan.montecarlo import distributions as dist
from cvplan.montecarlo import engine, tables

SLOW = bool(os.environ.get("CVPLAN_SLOW"))
SQUARED = cv.loss_models.LOSSES["squared"]


class TestStreams(ut.TestCase):
    def test_make_rng(self):
        a = engine.make_rng(5, 1, 2).standard_normal(4)
        b = engine.make_rng(5, 1, 2).standard_normal(4)
        c = engine.make_rng(5, 2, 1).standard_normal(4)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))
        self.assertRaises(cv.errors.InvalidConfig, lambda: engine.make_rng(5, -1))
        self.assertRaises(cv.errors.InvalidConfig, lambda: engine.make_rng(-5))

    def test_splits(self):
        masks = engine.draw_splits(20, 12, 6, 3, 0)
        self.assertEqual(masks.shape, (6, 20))
        self.assertTrue(np.all(masks.sum(axis=1) == 12))
        np.testing.assert_array_equal(masks, engine.draw_splits(20, 12, 6, 3, 0))

    def test_kfold_masks(self):
        masks = engine.kfold_masks(12, 4, engine.make_rng(1))
        # every row is tested exactly once
        np.testing.assert_array_equal((~masks).sum(axis=0), np.ones(12))
        self.assertTrue(np.all(masks.sum(axis=1) == 9))
        self.assertRaises(
            cv.errors.NotDivisible,
            lambda: engine.kfold_masks(10, 3, engine.make_rng(1)),
        )


class TestMomentEstimator(ut.TestCase):
    def test_recovers_components(self):
        rng = np.random.default_rng(17)
        reps, splits = 4000, 5
        # shared part with variance c, split part with variance v - c
        E = rng.normal(0.0, math.sqrt(0.3), (reps, 1)) + rng.normal(
            0.0, math.sqrt(0.7), (reps, splits)
        )
        est = engine.moments_from_errors(E)
        self.assertAlmostEqual(est["v_hat"], 1.0, delta=5 * est["se"]["v_hat"])
        self.assertAlmostEqual(est["c_hat"], 0.3, delta=5 * est["se"]["c_hat"])
        self.assertAlmostEqual(
            est["rho_hat"], 0.3, delta=5 * est["se"]["rho_hat"]
        )

    def test_small_reps(self):
        est = engine.moments_from_errors(np.array([[1.0, 2.0], [3.0, 5.0]]))
        self.assertTrue(math.isnan(est["se"]["v_hat"]))

    def test_sample_mean_rule(self):
        x = np.array([1.0, 2.0, 3.0, 6.0])
        masks = np.array([[True, True, False, False], [False, True, True, True]])
        errors = engine.SampleMeanRule(SQUARED)(x, masks)
        # training means 1.5 and 11/3
        np.testing.assert_allclose(
            errors,
            [(1.5**2 + 4.5**2) / 2, (1 - 11 / 3) ** 2],
        )


class TestEmpirical(ut.TestCase):
    def test_squared_normal(self):
        report = tables.simulate_sample_mean(
            SQUARED, "N(0,1)", 100, 50, reps=3000, splits=2, seed=21
        )
        est, se = report.estimates, report.standard_errors
        theory = report.theoretical
        self.assertAlmostEqual(theory["v_hat"], 0.0416)
        self.assertAlmostEqual(theory["c_hat"], 0.0204)
        for key in ("v_hat", "c_hat", "rho_hat"):
            with self.subTest(key=key):
                self.assertAlmostEqual(
                    est[key], theory[key], delta=5 * se[key]
                )
        self.assertEqual(est["var_cv_inf"], est["c_hat"])
        self.assertAlmostEqual(est["var_cv_1"], est["v_hat"])
        self.assertEqual(report.reps, 3000)

    def test_parallel_is_serial(self):
        generator = engine.DistGenerator(dist.parse_dist("exp(1)"), 30)
        rule = engine.SampleMeanRule(SQUARED)
        serial = engine.split_errors(generator, rule, 30, 15, 40, 3, 8, 1)
        parallel = engine.split_errors(generator, rule, 30, 15, 40, 3, 8, 4)
        np.testing.assert_array_equal(serial, parallel)

    def test_config_errors(self):
        generator = engine.DistGenerator(dist.normal(), 10)
        rule = engine.SampleMeanRule(SQUARED)
        self.assertRaises(
            cv.errors.InvalidConfig,
            lambda: engine.empirical_cv_moments(generator, rule, 10, 5, 1),
        )
        self.assertRaises(
            cv.errors.InvalidConfig,
            lambda: engine.empirical_cv_moments(generator, rule, 10, 10, 5),
        )

    def test_kfold(self):
        generator = engine.DistGenerator(dist.normal(), 20)
        report = engine.empirical_kfold_variance(
            generator, engine.SampleMeanRule(SQUARED), 20, 5, 500, seed=2
        )
        theory = cv.split_optimizer.kfold_variance(
            20, 5, cv.model.MomentParams(0.0, 2.0, 4.0, 0.0)
        )
        self.assertAlmostEqual(
            report.estimates["var_kfold"],
            theory,
            delta=5 * report.standard_errors["var_kfold"],
        )

    def test_curve(self):
        rows = tables.empirical_curve(
            SQUARED, "N(0,1)", 20, [10, 15], reps=100, seed=4
        )
        self.assertEqual([r["n1"] for r in rows], [10, 15])
        self.assertEqual(
            set(rows[0]),
            {"n1", "v_hat", "v_se", "c_hat", "c_se", "v_theory", "c_theory"},
        )


class TestDistributions(ut.TestCase):
    def test_labels(self):
        for label in tables.SYMMETRIC_DISTS + tables.SHIFTED_DISTS:
            with self.subTest(label=label):
                self.assertEqual(dist.parse_dist(label).label, label)
        self.assertRaises(
            cv.errors.InvalidParams, lambda: dist.parse_dist("Gamma(2)")
        )
        self.assertRaises(
            cv.errors.InvalidParams, lambda: dist.parse_dist("N(0,0)")
        )

    def test_draws_match_laws(self):
        for label in ("N(1,1)", "U(0,1)", "t12(5)", "exp(1)", "Pareto(15)"):
            with self.subTest(label=label):
                spec = dist.parse_dist(label)
                x = dist.sample(spec, 40_000, seed=1)
                law = dist.frozen(spec)
                se = math.sqrt(law.var() / x.size)
                self.assertAlmostEqual(x.mean(), law.mean(), delta=5 * se)

    def test_moment_warning(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", cv.errors.MomentWarning)
            self.assertTrue(dist.check_moments(dist.normal(), 8))
        self.assertWarns(
            cv.errors.MomentWarning,
            lambda: dist.check_moments(dist.student_t(6.0), 8),
        )
        self.assertEqual(dist.finite_moments(dist.student_t(9.0)), 8)


class TestTables(ut.TestCase):
    def test_resampling_table(self):
        rows = tables.simulate_table("T10")
        self.assertEqual([r.estimates["n1"] for r in rows], [50, 75, 80, 85, 90])
        first = rows[0].estimates
        self.assertAlmostEqual(first["rho"], 0.0204 / 0.0416)
        self.assertAlmostEqual(
            first["re_10"], cv.cv_variance.resampling_effectiveness(first["rho"], 10)
        )
        rhos = [r.estimates["rho"] for r in rows]
        self.assertEqual(rhos, sorted(rhos, reverse=True))

    def test_sample_mean_table(self):
        rows = tables.simulate_table(
            "T4", scale=0.005, seed=3, sizes=[750], dists=["N(0,1)"]
        )
        self.assertEqual(len(rows), 1)
        row = rows[0]
        self.assertEqual(row.reps, 50)
        self.assertEqual(row.estimates["n1_ratio"], 0.5)
        self.assertEqual(row.estimates["k_ratio"], 1.0)
        self.assertAlmostEqual(row.theoretical["rho_opt"], 0.5, 2)
        self.assertEqual(row.mse["n1_ratio"], 0.0)
        frame = tables.to_frame(rows)
        self.assertIn("rho_opt_theory", frame.columns)

    def test_regression_table(self):
        rows = tables.simulate_table("T9", scale=0.01, seed=2, sizes=[40])
        self.assertEqual(len(rows), 5)
        self.assertTrue(all(r.estimates["n1_opt_hat"] == 20 for r in rows))
        self.assertEqual(
            [r.config["fraction"] for r in rows], [0.5, 0.75, 0.8, 0.85, 0.9]
        )

    def test_invalid(self):
        self.assertRaises(
            cv.errors.InvalidConfig, lambda: tables.simulate_table("T3")
        )
        self.assertRaisesRegex(
            cv.errors.InvalidConfig,
            "at least 50",
            lambda: tables.simulate_table("T4", scale=0.001),
        )
        self.assertRaises(
            cv.errors.InvalidConfig,
            lambda: tables.simulate_table("T4", scale=2.0),
        )

    @ut.skipUnless(SLOW, "set CVPLAN_SLOW to run")
    def test_regression_agrees_with_closed_form(self):
        rows = tables.simulate_table("T9", scale=0.4, seed=5, sizes=[60])
        for row in rows:
            with self.subTest(fraction=row.config["fraction"]):
                se = row.standard_errors["v_hat"]
                self.assertAlmostEqual(
                    row.estimates["v_hat"],
                    row.theoretical["v_hat"],
                    delta=5 * se,
                )

    @ut.skipUnless(SLOW, "set CVPLAN_SLOW to run")
    def test_logistic_table(self):
        rows = tables.simulate_table(
            "T11", seed=1, sizes=[60], dists=["normal"], workers=4
        )
        estimates = rows[0].estimates
        self.assertGreaterEqual(estimates["n1_opt_hat"], 30)
        self.assertLessEqual(estimates["share_at_half"], 1.0)
        self.assertLess(estimates["v_opt"], estimates["v_90"])


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
