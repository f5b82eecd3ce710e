import sys
import unittest as ut

import numpy as np
from scipy import stats

import cvplan as cv

lm = cv.loss_models


def as_tuple(params: cv.model.MomentParams):
    return params.alpha, params.beta, params.gamma, params.delta


class TestDerivatives(ut.TestCase):
    def test_against_finite_differences(self):
        h = 1e-5
        x = np.linspace(-2.0, 3.0, 11)
        for name, spec in lm.LOSSES.items():
            for mu in (-0.7, 0.3, 1.9):
                with self.subTest(loss=name, mu=mu):
                    L, dL, d2L = lm.loss_derivatives(spec, mu, x, d=0.1)
                    up = lm.loss_derivatives(spec, mu + h, x, d=0.1)
                    down = lm.loss_derivatives(spec, mu - h, x, d=0.1)
                    np.testing.assert_allclose(
                        dL, (up[0] - down[0]) / (2 * h), rtol=1e-5, atol=1e-6
                    )
                    np.testing.assert_allclose(
                        d2L, (up[1] - down[1]) / (2 * h), rtol=1e-5, atol=1e-6
                    )

    def test_values(self):
        self.assertEqual(lm.loss_value(lm.LOSSES["squared"], 0.5, 2.5), 4.0)
        self.assertAlmostEqual(
            lm.loss_value(lm.LOSSES["absapprox"], 0.0, 2.0, d=5.0), 3.0
        )
        self.assertEqual(lm.loss_value(lm.LOSSES["doublesq"], 1.0, 2.0), 9.0)
        values = lm.loss_value(lm.LOSSES["modsq"], 1.0, np.array([1.0, 3.0]))
        self.assertEqual(values.tolist(), [1.0, 5.0])
        self.assertRaisesRegex(
            cv.errors.InvalidParams,
            "absapprox needs d",
            lambda: lm.loss_value(lm.LOSSES["absapprox"], 0.0, 1.0),
        )


class TestSpecs(ut.TestCase):
    def test_registry(self):
        self.assertEqual(lm.get_loss("qsqrt").name, "qclass[sqrt]")
        self.assertRaisesRegex(
            cv.errors.InvalidParams, "Unknown loss", lambda: lm.get_loss("hinge")
        )
        self.assertRaises(cv.errors.InvalidParams, lambda: lm.LossSpec("qclass"))
        self.assertRaises(
            cv.errors.InvalidParams, lambda: lm.LossSpec("absapprox", d=0.0)
        )
        needed = {k: lm.moments_required(v) for k, v in lm.LOSSES.items()}
        self.assertEqual(
            needed,
            {"squared": 4, "qsqrt": 2, "absapprox": 2, "modsq": 4, "doublesq": 8},
        )

    def test_custom_generator(self):
        log_q = lm.LossSpec.custom_q(
            q=np.log,
            dq=lambda x: 1.0 / np.asarray(x),
            d2q=lambda x: -1.0 / np.square(x),
            d3q=lambda x: 2.0 / np.asarray(x) ** 3,
            name="log",
            domain=(0.0, np.inf),
        )
        self.assertEqual(log_q.name, "qclass[log]")
        self.assertRaises(
            cv.errors.DomainError, lambda: lm.loss_value(log_q, 1.0, -1.0)
        )
        sample = np.linspace(0.5, 4.0, 30)
        params = lm.estimate_moment_params(log_q, sample)
        self.assertEqual(params.alpha, 0.0)
        self.assertGreater(params.beta, 0.0)

        convex = lm.LossSpec.custom_q(
            q=np.square,
            dq=lambda x: 2.0 * np.asarray(x),
            d2q=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
            d3q=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        )
        self.assertRaisesRegex(
            cv.errors.DomainError,
            "not concave",
            lambda: lm.estimate_moment_params(convex, sample),
        )


class TestPopulation(ut.TestCase):
    def test_squared_normal(self):
        params = lm.population_moment_params(lm.LOSSES["squared"], stats.norm())
        np.testing.assert_allclose(as_tuple(params), (0, 2, 4, 0), atol=1e-12)
        wide = lm.population_moment_params(
            lm.LOSSES["squared"], stats.norm(scale=2.0), n=100
        )
        np.testing.assert_allclose(as_tuple(wide), (0, 32, 64, 0), atol=1e-9)
        self.assertEqual(wide.n, 100)
        self.assertAlmostEqual(wide.A, 0.64)

    def test_polynomial_losses(self):
        modsq = lm.population_moment_params(
            lm.LOSSES["modsq"], stats.norm(loc=1.0)
        )
        np.testing.assert_allclose(as_tuple(modsq), (4, 2, 4, 0), atol=1e-9)
        doublesq = lm.population_moment_params(
            lm.LOSSES["doublesq"], stats.norm()
        )
        np.testing.assert_allclose(
            as_tuple(doublesq), (0, 96, 0, -48), atol=1e-9
        )

    def test_numeric_expectations(self):
        qsqrt = lm.population_moment_params(lm.LOSSES["qsqrt"], stats.norm())
        self.assertEqual(qsqrt.alpha, 0.0)
        self.assertGreater(qsqrt.beta, 0.0)
        absapprox = lm.population_moment_params(
            lm.LOSSES["absapprox"], stats.norm(), n=100
        )
        # symmetric law, mean zero derivative
        self.assertAlmostEqual(absapprox.alpha, 0.0, 8)
        self.assertGreater(absapprox.beta, 0.0)

    def test_missing_moments(self):
        self.assertRaisesRegex(
            cv.errors.DomainError,
            "finite moments",
            lambda: lm.population_moment_params(
                lm.LOSSES["doublesq"], stats.t(6)
            ),
        )


class TestEstimation(ut.TestCase):
    def test_large_sample_agrees(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(200_000)
        for name, expected in (
            ("squared", (0, 2, 4, 0)),
            ("modsq", (0, 2, 4, 0)),
        ):
            with self.subTest(loss=name):
                params = lm.estimate_moment_params(lm.LOSSES[name], x)
                np.testing.assert_allclose(
                    as_tuple(params), expected, atol=0.1
                )
                self.assertEqual(params.n, x.size)

    def test_bad_samples(self):
        squared = lm.LOSSES["squared"]
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: lm.estimate_moment_params(squared, [1.0, 2.0, 3.0]),
        )
        self.assertRaises(
            cv.errors.InvalidParams,
            lambda: lm.estimate_moment_params(squared, [1.0, np.nan, 2.0, 3.0]),
        )
        self.assertRaises(
            cv.errors.DegenerateSample,
            lambda: lm.estimate_moment_params(squared, np.ones(10)),
        )
        # numerical failures are arithmetic errors as well
        self.assertRaises(
            ArithmeticError,
            lambda: lm.estimate_moment_params(squared, np.ones(10)),
        )


if __name__ == "__main__":
    result = ut.main(exit=False)
    sys.exit(len(result.result.failures))
