import sys
import unittest as ut

import numpy as np

import cvplan as cv

so = cv.split_optimizer
MomentParams = cv.model.MomentParams

SQUARED_NORMAL = MomentParams(0.0, 2.0, 4.0, 0.0)
MODSQ_SHIFTED = MomentParams(4.0, 2.0, 4.0, 0.0)


class TestRandomSplit(ut.TestCase):
    def test_half_split(self):
        for n in (4, 5, 60, 100, 301, 750, 1501, 5000):
            with self.subTest(n=n):
                plan = so.optimal_n1(n, SQUARED_NORMAL)
                self.assertEqual(plan.n1_opt, (n + 1) // 2)
                self.assertEqual(plan.method, "ClosedForm")
                self.assertFalse(plan.flagged)

    def test_rho_near_half(self):
        plan = so.optimal_n1(100, SQUARED_NORMAL)
        self.assertAlmostEqual(plan.v, 0.0416)
        self.assertAlmostEqual(plan.c_approx, 0.0204)
        self.assertAlmostEqual(plan.rho_opt, 0.0204 / 0.0416)
        self.assertAlmostEqual(
            so.optimal_n1(5000, SQUARED_NORMAL).rho_opt, 0.5, 3
        )

    def test_closed_form_above_half(self):
        plan = so.optimal_n1(100, MODSQ_SHIFTED)
        self.assertEqual(plan.n1_opt, 58)
        self.assertEqual(plan.method, "ClosedForm")

    def test_grid_argmin(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            a, b, g = rng.uniform(0.0, 5.0, 3)
            d = rng.uniform(-g, 5.0)
            params = MomentParams(a, b + 0.01, g, d)
            n = int(rng.integers(10, 2001))
            with self.subTest(params=params, n=n):
                plan = so.optimal_n1(n, params)
                grid = range((n + 1) // 2, n)
                values = [so.approx_v(n, n1, params) for n1 in grid]
                self.assertEqual(plan.n1_opt, list(grid)[int(np.argmin(values))])
                self.assertIn(plan.method, cv.model.METHODS)

    def test_nonpositive_B(self):
        params = MomentParams(0.95, 0.1, 0.0, -1.5)
        plan = so.optimal_n1(10, params)
        self.assertTrue(plan.flagged)
        self.assertEqual(plan.method, "GridArgmin")
        self.assertEqual(plan.n1_opt, 9)
        self.assertRaisesRegex(
            cv.errors.InvalidParams,
            "not positive",
            lambda: so.optimal_n1(10, MomentParams(1.0, 0.1, 0.0, -2.0)),
        )

    def test_errors(self):
        self.assertRaises(
            cv.errors.OutOfRange, lambda: so.optimal_n1(3, SQUARED_NORMAL)
        )
        self.assertRaises(
            cv.errors.OutOfRange, lambda: so.approx_v(100, 49, SQUARED_NORMAL)
        )
        self.assertRaises(
            cv.errors.OutOfRange, lambda: so.approx_c(100, 100, SQUARED_NORMAL)
        )

    def test_moments(self):
        for n1 in (50, 70, 99):
            with self.subTest(n1=n1):
                model = so.sample_mean_moments(100, n1, MODSQ_SHIFTED)
                self.assertAlmostEqual(
                    model.v, so.approx_v(100, n1, MODSQ_SHIFTED)
                )
                self.assertAlmostEqual(
                    model.c, so.approx_c(100, n1, MODSQ_SHIFTED)
                )
        rows = so.variance_curve(SQUARED_NORMAL, 10)
        self.assertEqual([r["n1"] for r in rows], list(range(1, 10)))
        self.assertEqual(set(rows[0]), {"n1", "v", "c", "rho"})

    def test_summary(self):
        plan = so.optimal_n1(100, SQUARED_NORMAL)
        summary = so.split_summary(plan)
        self.assertEqual(summary["n1_opt"], 50)
        self.assertEqual(
            summary["J_re(0.9)"],
            cv.cv_variance.j_for_effectiveness(plan.rho_opt, 0.9).J,
        )
        self.assertIn("J_rr(0.01)", summary)


class TestKFold(ut.TestCase):
    def test_relative_efficiency(self):
        for (n, k), expected in (
            ((24, 2), 1.073),
            ((30, 2), 1.060),
            ((30, 3), 1.029),
            ((40, 2), 1.046),
            ((40, 4), 1.015),
            ((50, 2), 1.038),
            ((50, 5), 1.009),
            ((100, 5), 1.005),
            ((100, 10), 1.002),
            ((150, 5), 1.003),
            ((150, 10), 1.001),
            ((150, 15), 1.001),
        ):
            with self.subTest(n=n, k=k):
                self.assertAlmostEqual(
                    so.relative_efficiency_kfold(n, k, SQUARED_NORMAL),
                    expected,
                    delta=0.001,
                )

    def test_optimal_k(self):
        self.assertEqual(so.optimal_k(100, SQUARED_NORMAL).k_opt, 100)
        negative = MomentParams(0.0, 2.0, 1.0, -3.0)
        self.assertEqual(so.optimal_k(301, negative).k_opt, 7)
        self.assertEqual(so.optimal_k(97, negative).k_opt, 97)
        self.assertEqual(so.optimal_k(750, negative).k_opt, 2)
        plan = so.optimal_k(24, SQUARED_NORMAL)
        self.assertEqual([row[0] for row in plan.curve], so.divisors(24))
        self.assertEqual(plan.relative_efficiency(24), 1.0)
        self.assertAlmostEqual(plan.relative_efficiency(2), 1.073, 3)

    def test_fold_moments(self):
        for k in (2, 4, 5, 10, 20):
            with self.subTest(k=k):
                v, c = so.kfold_moments(20, k, MODSQ_SHIFTED)
                self.assertAlmostEqual(
                    (v + (k - 1) * c) / k,
                    so.kfold_variance(20, k, MODSQ_SHIFTED),
                )

    def test_divisors(self):
        self.assertEqual(so.divisors(12), [2, 3, 4, 6, 12])
        self.assertEqual(so.min_divisor(49), 7)
        self.assertRaises(
            cv.errors.NotDivisible,
            lambda: so.kfold_variance(10, 3, SQUARED_NORMAL),
        )
        self.assertRaises(cv.errors.OutOfRange, lambda: so.min_divisor(1))


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
