import sys
import math
import unittest as ut

import numpy as np

import cvplan as cv

rp = cv.regression_planner


class TestDesign(ut.TestCase):
    def setUp(self) -> None:
        self.X, self.y = rp.regression_dataset(100, seed=5)
        self.stats = rp.design_stats(self.X, self.y)

    def test_stats(self):
        stats = self.stats
        self.assertEqual((stats.n, stats.p), (100, 5))
        self.assertAlmostEqual(stats.leverages.sum(), 5.0)
        self.assertAlmostEqual(stats.theta, float(np.sum(stats.leverages**2)))
        self.assertLessEqual(stats.theta, stats.p)
        np.testing.assert_allclose(
            stats.V_hat, 100 * np.linalg.inv(self.X.T @ self.X)
        )
        # responses are built with unit variance errors
        self.assertAlmostEqual(stats.sigma2_hat, 1.0, delta=0.5)
        np.testing.assert_allclose(stats.beta_hat, rp.RECIPE_BETA, atol=1.2)

    def test_reproducible(self):
        X, y = rp.regression_dataset(100, seed=5)
        np.testing.assert_array_equal(X, self.X)
        np.testing.assert_array_equal(y, self.y)
        _, other = rp.regression_dataset(100, seed=6)
        self.assertFalse(np.array_equal(other, self.y))

    def test_errors(self):
        X, y = self.X, self.y
        self.assertRaises(
            cv.errors.ShapeMismatch, lambda: rp.design_stats(X, y[:-1])
        )
        self.assertRaises(
            cv.errors.InvalidParams, lambda: rp.design_stats(X[:5], y[:5])
        )
        collinear = np.column_stack([X, X[:, 1]])
        self.assertRaises(
            cv.errors.SingularDesign, lambda: rp.design_stats(collinear, y)
        )
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: rp.recipe_errors(10, np.random.default_rng(0), "cauchy"),
        )


class TestMoments(ut.TestCase):
    def setUp(self) -> None:
        X, y = rp.regression_dataset(60, seed=2)
        self.stats = rp.design_stats(X, y)

    def test_kfold_assembly(self):
        for k in (2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60):
            with self.subTest(k=k):
                mom = rp.kfold_cv_moments_normal(self.stats, k)
                self.assertAlmostEqual(
                    (mom.variance + (k - 1) * mom.covariance) / k,
                    rp.kfold_variance_assembled(self.stats, k),
                )
        self.assertRaises(
            cv.errors.NotDivisible,
            lambda: rp.kfold_cv_moments_normal(self.stats, 7),
        )

    def test_random_cv(self):
        stats = self.stats
        for n1 in (30, 40, 59):
            with self.subTest(n1=n1):
                mom = rp.random_cv_moments_normal(stats, n1)
                self.assertAlmostEqual(
                    mom.mean, stats.sigma2_hat * (1 + stats.p / n1)
                )
                self.assertGreater(mom.variance, mom.covariance)
                self.assertGreater(mom.covariance, 0.0)
        self.assertRaises(
            cv.errors.OutOfRange,
            lambda: rp.random_cv_moments_normal(stats, 29),
        )

    def test_nonnormal(self):
        stats = self.stats.edit(sigma2_hat=1.0, mu4_hat=3.0)
        n1 = 30
        value = rp.random_cv_var_nonnormal(stats, n1)
        self.assertAlmostEqual(
            value, 2 / 30 + (4 * stats.p + 3 * stats.theta) / (30 * 30)
        )
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: rp.random_cv_var_nonnormal(
                stats.edit(mu4_hat=math.inf), n1
            ),
        )


class TestPlans(ut.TestCase):
    def test_optimal_split(self):
        sizes = np.random.default_rng(3).integers(40, 201, 100)
        for seed, n in enumerate(sizes.tolist()):
            with self.subTest(n=n, seed=seed):
                X, y = rp.regression_dataset(n, seed=seed)
                plan = rp.regression_optimal_split(rp.design_stats(X, y))
                self.assertEqual(plan.n1_opt, (n + 1) // 2)
                self.assertEqual(plan.k_opt, n)
                self.assertEqual(len(plan.curve), n - (n + 1) // 2)

    def test_kfold_covariance_order(self):
        # folds of a fixed count: n^2 |cov| stays bounded as n grows
        k = 5
        for n in (50, 100, 200, 400, 800, 1600):
            with self.subTest(n=n):
                X, y = rp.regression_dataset(n, seed=8)
                stats = rp.design_stats(X, y)
                mom = rp.kfold_cv_moments_normal(stats, k)
                scaled = abs(mom.covariance) / stats.sigma2_hat**2 * n * n
                self.assertLess(scaled, 50.0)
                self.assertLess(abs(mom.covariance), mom.variance / 10)

    def test_resampling(self):
        self.assertEqual(rp.regression_resampling_plan(pi=0.9).J, 9)
        self.assertEqual(rp.regression_resampling_plan(r=0.01).J, 11)
        self.assertEqual(rp.regression_resampling_plan(pi=0.95).J, 19)
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: rp.regression_resampling_plan(pi=0.9, r=0.1),
        )
        self.assertRaises(
            cv.errors.InvalidParams, lambda: rp.regression_resampling_plan()
        )

    def test_table(self):
        X, y = rp.regression_dataset(100, seed=4)
        rows = rp.regression_table(rp.design_stats(X, y))
        self.assertEqual([r["n1"] for r in rows], [50, 75, 80, 85, 90])
        for row in rows:
            with self.subTest(n1=row["n1"]):
                self.assertAlmostEqual(row["CV_1"], row["v"])
                self.assertEqual(row["CV_inf"], row["c"])
                self.assertGreater(row["CV_10"], row["CV_15"])
        # variance grows with the training size
        cv_10 = [r["CV_10"] for r in rows]
        self.assertEqual(cv_10, sorted(cv_10))


class TestConvergence(ut.TestCase):
    def test_design_converges(self):
        for law in ("normal", "trinomial"):
            with self.subTest(law=law):
                gaps = rp.design_convergence(
                    (30, 100, 250), reps=200, seed=9, law=law
                )
                values = [gaps[n] for n in (30, 100, 250)]
                self.assertGreater(values[0], values[1])
                self.assertGreater(values[1], values[2])
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: rp.design_convergence((10,), reps=1, law="gamma"),
        )


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
