"""Test-set error moments of least squares under squared error loss.

The design is fixed; errors are i.i.d. with variance ``sigma2``. Everything
is expressed through ``p`` (columns of ``X``), the leverages ``h_ii`` and
``theta = sum h_ii^2``. The random CV variance is smallest at
``n1 = ceil(n/2)`` and the k-fold variance at ``k = n`` for every design, so
:func:`regression_resampling_plan` works at ``rho = 1/2``.

>>> from cvplan.regression_planner import regression_resampling_plan
>>> regression_resampling_plan(pi=0.9).J, regression_resampling_plan(r=0.01).J
(9, 11)
"""

from __future__ import annotations
import logging
import math
import typing as t

import numpy as np

from . import config, cv_variance, errors
from .model import (
    CvVarianceModel,
    RegressionCvMoments,
    RegressionPlan,
    RegressionStats,
    ResamplingPlan,
    half_up,
)
from .montecarlo.engine import make_rng

logger = logging.getLogger(__name__)

RECIPE_BETA = np.array([1.0, 1.0, 1.0, -1.0, 1.0])
ERROR_LAWS = ("normal", "uniform", "t12")
TABLE_FRACTIONS = (0.5, 0.75, 0.8, 0.85, 0.9)
TABLE_J = (1, 10, 15, math.inf)


# ============================== DESIGN ===============================


def design_stats(X: np.ndarray, y: np.ndarray) -> RegressionStats:
    """design_stats(X, y) -> RegressionStats
    Fits ordinary least squares and summarizes the design.

    ``sigma2_hat`` divides the residual sum of squares by ``n - p``,
    ``mu4_hat`` is the plain mean of the fourth powers of the residuals.
    Leverages are computed row by row, the hat matrix is never formed.

    >>> import numpy as np
    >>> from cvplan.regression_planner import design_stats
    >>> stats = design_stats(np.ones((4, 1)), np.array([1.0, 2.0, 3.0, 4.0]))
    >>> stats.leverages.tolist(), stats.theta
    ([0.25, 0.25, 0.25, 0.25], 0.25)

    Raises
    ------
    ShapeMismatch
        If ``X`` is not ``n x p`` with ``y`` of length ``n``.
    InvalidParams
        If ``n <= p``.
    SingularDesign
        If ``X'X`` has a condition number above
        :data:`cvplan.config.CONDITION_LIMIT` or the fit fails its
        consistency checks.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise errors.ShapeMismatch(
            f"Need an n x p design and n responses, got {X.shape} and {y.shape}."
        )
    n, p = X.shape
    if n <= p:
        raise errors.InvalidParams(f"Need n > p, got n={n}, p={p}.")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise errors.InvalidParams("Design or response contain non finite values.")
    xtx = X.T @ X
    cond = np.linalg.cond(xtx)
    if not np.isfinite(cond) or cond > config.CONDITION_LIMIT:
        raise errors.SingularDesign(
            f"X'X is numerically singular (condition number {cond:.3g})."
        )
    inv = np.linalg.solve(xtx, np.eye(p))
    inv = (inv + inv.T) / 2
    beta = inv @ (X.T @ y)
    resid = y - X @ beta
    leverages = np.einsum("ij,jk,ik->i", X, inv, X)
    tol = max(1e-8, cond * 1e-14) * p
    if abs(leverages.sum() - p) > tol:
        raise errors.SingularDesign(
            f"Hat matrix trace {leverages.sum()} differs from p={p}."
        )
    _check_idempotent(X, inv, tol)
    V_hat = n * inv
    try:
        np.linalg.cholesky(V_hat)
    except np.linalg.LinAlgError:
        raise errors.SingularDesign("n (X'X)^-1 is not positive definite.") from None
    return RegressionStats(
        n=n,
        p=p,
        theta=float(np.sum(leverages**2)),
        leverages=leverages,
        V_hat=V_hat,
        sigma2_hat=float(resid @ resid / (n - p)),
        mu4_hat=float(np.mean(resid**4)),
        beta_hat=beta,
    )


def _check_idempotent(
    X: np.ndarray, inv: np.ndarray, tol: float, rows: int = 5
) -> None:
    n = X.shape[0]
    idx = np.unique(np.linspace(0, n - 1, min(rows, n)).astype(int))
    H_rows = X[idx] @ inv @ X.T
    squared = H_rows @ H_rows.T
    gap = np.max(np.abs(squared - H_rows[:, idx]))
    if gap > tol:
        raise errors.SingularDesign(
            f"Hat matrix is not idempotent (gap {gap:.3g})."
        )


def _check_n1(n: int, n1: int) -> None:
    if not half_up(n) <= n1 <= n - 1:
        raise errors.OutOfRange(
            f"n1={n1} outside [{half_up(n)}, {n - 1}] for n={n}."
        )


def _check_k(n: int, k: int) -> None:
    if not 2 <= k <= n:
        raise errors.OutOfRange(f"Need 2 <= k <= n, got n={n}, k={k}.")
    if n % k:
        raise errors.NotDivisible(f"k={k} does not divide n={n}.")


# ============================ RANDOM CV ==============================


def random_cv_moments_normal(stats: RegressionStats, n1: int) -> RegressionCvMoments:
    """random_cv_moments_normal(stats, n1) -> RegressionCvMoments
    Mean, variance and covariance of test-set averages of squared errors
    under normal errors, all terms kept.

    >>> import numpy as np
    >>> from cvplan.model import RegressionStats
    >>> from cvplan.regression_planner import random_cv_moments_normal
    >>> stats = RegressionStats(40, 4, 1.0, np.full(40, 0.1), np.eye(4),
    ...                         1.0, 3.0, np.zeros(4))
    >>> random_cv_moments_normal(stats, 20).mean
    1.2

    Raises
    ------
    OutOfRange
        If ``n1`` is outside ``[ceil(n/2), n - 1]``.
    """
    n, p, th = stats.n, stats.p, stats.theta
    _check_n1(n, n1)
    n2 = n - n1
    s2 = stats.sigma2_hat
    s4 = s2 * s2
    var = (
        2 / n2
        + 4 * p / (n1 * n2)
        + (3 * n + 1) * th / ((n - 1) * n1 * n2)
        + (2 * n * (n2 - 1) - n1 * p) * p / ((n - 1) * n1**2 * n2)
    )
    if n > 2:
        cov = (
            2 / n
            + (n + 2 * n1) * p / (n * (n - 1) * n1)
            + 2 * (n + n1 * (n1 - 2) - 1) * th / ((n - 1) * (n - 2) * n1**2)
            + ((n - 2) * (n + n1**2 + 2 * n1 * n2 - 1) - (n1 - 1) ** 2)
            * (p - th)
            / ((n - 1) ** 2 * (n - 2) * n1**4)
        )
    else:
        cov = 2 / n
    return RegressionCvMoments(
        mean=s2 * (1 + p / n1),
        variance=s4 * var,
        covariance=s4 * cov,
        order_note=(
            "full closed form; leading values keep terms to order 1/n^2"
        ),
        variance_leading=s4 * (2 / n2 + (4 * p + 3 * th) / (n1 * n2)),
        covariance_leading=s4
        * (2 / n + (n + 2 * n1) * p / (n * n * n1) + 2 * th / (n * n)),
    )


def random_cv_var_nonnormal(stats: RegressionStats, n1: int) -> float:
    """random_cv_var_nonnormal(stats, n1) -> float
    Variance of a test-set average for errors with a finite fourth moment,
    ``(mu4 - sigma^4)/n2 + (4p + 3 theta) sigma^4/(n1 n2)``.
    """
    n = stats.n
    _check_n1(n, n1)
    n2 = n - n1
    s4 = stats.sigma2_hat**2
    if not math.isfinite(stats.mu4_hat):
        raise errors.InvalidParams("mu4_hat must be finite.")
    return (stats.mu4_hat - s4) / n2 + (4 * stats.p + 3 * stats.theta) * s4 / (
        n1 * n2
    )


# ============================== K-FOLD ===============================


def kfold_cv_moments_normal(stats: RegressionStats, k: int) -> RegressionCvMoments:
    """kfold_cv_moments_normal(stats, k) -> RegressionCvMoments
    Moments of one fold's test average under normal errors. The covariance
    between two folds is of order ``1/n^2`` and may be negative.

    Raises
    ------
    NotDivisible
        If ``k`` does not divide ``n``.
    """
    n, p, th = stats.n, stats.p, stats.theta
    _check_k(n, k)
    s2 = stats.sigma2_hat
    s4 = s2 * s2
    var = (
        2 * k / n
        + 4 * k * k * p / ((k - 1) * n * n)
        + 3 * k * k * th / ((k - 1) * n * n)
        + p * k**3 / ((k - 1) ** 2 * n * n)
    )
    cov = 2 * k**4 * (p - th) / ((k - 1) ** 4 * n * (n - 1)) - k * k * th / (
        (k - 1) ** 2 * n * (n - 1)
    )
    return RegressionCvMoments(
        mean=s2 * (1 + k * p / ((k - 1) * n)),
        variance=s4 * var,
        covariance=s4 * cov,
        order_note="variance to order 1/n^2, covariance exact at order 1/n^2",
        variance_leading=s4 * 2 * k / n,
        covariance_leading=0.0,
    )


def kfold_variance_assembled(stats: RegressionStats, k: int) -> float:
    """kfold_variance_assembled(stats, k) -> float
    Variance of the k-fold estimator, equal to ``(var + (k-1) cov) / k`` of
    :func:`kfold_cv_moments_normal`.
    """
    n, p, th = stats.n, stats.p, stats.theta
    _check_k(n, k)
    s4 = stats.sigma2_hat**2
    value = (
        2 / n
        + k
        * ((p - th) * n + (3 * n - 4) * p + 3 * th * (n - 1))
        / ((k - 1) * n * n * (n - 1))
        + k * k * p / ((k - 1) ** 2 * n * n)
        + 2 * k**3 * (p - th) / ((k - 1) ** 3 * n * (n - 1))
    )
    return s4 * value


# ============================== PLANS ================================


def regression_optimal_split(
    stats: RegressionStats, normal: bool = True
) -> RegressionPlan:
    """regression_optimal_split(stats, normal=True) -> RegressionPlan
    Grid argmins of the random CV variance over ``n1`` and of the k-fold
    variance over the divisors of ``n``. With ``normal=False`` the random CV
    curve uses :func:`random_cv_var_nonnormal`.
    """
    n = stats.n
    grid = range(half_up(n), n)
    if normal:
        curve = tuple(
            (n1, random_cv_moments_normal(stats, n1).variance) for n1 in grid
        )
    else:
        curve = tuple((n1, random_cv_var_nonnormal(stats, n1)) for n1 in grid)
    ks = [k for k in range(2, n + 1) if n % k == 0]
    kfold_curve = tuple((k, kfold_variance_assembled(stats, k)) for k in ks)
    n1_opt = min(curve, key=lambda row: row[1])[0]
    k_opt = min(kfold_curve, key=lambda row: row[1])[0]
    if n1_opt != half_up(n) or k_opt != n:
        logger.warning(
            "Unexpected regression optimum n1=%d, k=%d at n=%d", n1_opt, k_opt, n
        )
    return RegressionPlan(
        n=n, n1_opt=n1_opt, k_opt=k_opt, curve=curve, kfold_curve=kfold_curve
    )


def regression_resampling_plan(
    pi: t.Optional[float] = None, r: t.Optional[float] = None
) -> ResamplingPlan:
    """regression_resampling_plan(pi=None, r=None) -> ResamplingPlan
    Minimum resampling size at the optimal split, where ``rho = 1/2``:
    ``ceil(pi/(1-pi))`` or ``ceil(sqrt(1 + 1/r))``. Give exactly one target.
    """
    if (pi is None) == (r is None):
        raise errors.InvalidParams("Give exactly one of pi and r.")
    if pi is not None:
        return cv_variance.j_for_effectiveness(0.5, pi)
    return cv_variance.j_for_reduction(0.5, t.cast(float, r))


def regression_table(
    stats: RegressionStats,
    fractions: t.Sequence[float] = TABLE_FRACTIONS,
    Js: t.Sequence[float] = TABLE_J,
) -> t.List[t.Dict[str, t.Any]]:
    """regression_table(stats, fractions, Js) -> list[dict]
    ``Var(mu_CV,J)`` at training sizes ``ceil(f n)`` for the given fractions
    (clipped to the admissible range), from the full normal-error moments.
    """
    n = stats.n
    rows: t.List[t.Dict[str, t.Any]] = []
    for f in fractions:
        n1 = min(n - 1, max(half_up(n), math.ceil(f * n - 1e-9)))
        mom = random_cv_moments_normal(stats, n1)
        model = CvVarianceModel(v=mom.variance, c=max(mom.covariance, 0.0))
        row: t.Dict[str, t.Any] = {"n1": n1, "v": model.v, "c": model.c}
        for J in Js:
            key = "CV_inf" if J == math.inf else f"CV_{J}"
            row[key] = cv_variance.var_cv(model, J)
        rows.append(row)
    return rows


# ============================= RECIPES ===============================


def recipe_covariates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Design ``[1, X1, X2, X3, X4]`` with ``X1 ~ Bernoulli(.6)``,
    ``X2 ~ Poisson(2)``, ``X3 ~ U(0, 5)`` and ``X4 ~ U(0, 3)``."""
    return np.column_stack(
        [
            np.ones(n),
            rng.binomial(1, 0.6, n),
            rng.poisson(2.0, n),
            rng.uniform(0.0, 5.0, n),
            rng.uniform(0.0, 3.0, n),
        ]
    ).astype(float)


def recipe_errors(n: int, rng: np.random.Generator, law: str = "normal") -> np.ndarray:
    """Error draws: ``normal`` N(0,1), ``uniform`` U(-1,1) or ``t12``."""
    if law == "normal":
        return rng.standard_normal(n)
    if law == "uniform":
        return rng.uniform(-1.0, 1.0, n)
    if law == "t12":
        return rng.standard_t(12.0, n)
    raise errors.InvalidParams(
        f"Unknown error law {law!r}, expected one of {', '.join(ERROR_LAWS)}."
    )


def regression_dataset(
    n: int, seed: t.Optional[int] = None, law: str = "normal"
) -> t.Tuple[np.ndarray, np.ndarray]:
    """regression_dataset(n, seed=None, law="normal") -> (X, y)
    One draw of the simulation design with
    ``y = 1 + X1 + X2 - X3 + X4 + error``.
    """
    rng = make_rng(seed, n, 0)
    X = recipe_covariates(n, rng)
    return X, X @ RECIPE_BETA + recipe_errors(n, rng, law)


CONVERGENCE_SIGMA = np.array(
    [[1.0, 0.5, 0.7], [0.5, 1.0, -0.1], [0.7, -0.1, 1.0]]
)
TRINOMIAL_P = np.array([0.1, 0.2, 0.7])


def design_convergence(
    n_values: t.Sequence[int] = (30, 100, 250),
    reps: int = 1000,
    seed: t.Optional[int] = None,
    law: str = "normal",
) -> t.Dict[int, float]:
    """design_convergence(n_values, reps=1000, seed=None, law="normal")
    Average max-norm distance between ``X'X / n`` and its limit
    ``Sigma + mu mu'`` over ``reps`` covariate samples of each size.

    ``law`` is ``normal`` (trivariate normal, mean zero, covariance
    :data:`CONVERGENCE_SIGMA`) or ``trinomial`` (10 trials with
    probabilities :data:`TRINOMIAL_P`).
    """
    if law == "normal":
        limit = CONVERGENCE_SIGMA
    elif law == "trinomial":
        mean = 10 * TRINOMIAL_P
        cov = 10 * (np.diag(TRINOMIAL_P) - np.outer(TRINOMIAL_P, TRINOMIAL_P))
        limit = cov + np.outer(mean, mean)
    else:
        raise errors.InvalidParams(f"Unknown covariate law {law!r}.")
    out: t.Dict[int, float] = {}
    for n in n_values:
        total = 0.0
        for rep in range(reps):
            rng = make_rng(seed, n, rep)
            if law == "normal":
                X = rng.multivariate_normal(np.zeros(3), CONVERGENCE_SIGMA, n)
            else:
                X = rng.multinomial(10, TRINOMIAL_P, n).astype(float)
            total += float(np.max(np.abs(X.T @ X / n - limit)))
        out[n] = total / reps
        logger.debug("design convergence n=%d: %.4f", n, out[n])
    return out


__all__ = [
    "RECIPE_BETA",
    "design_stats",
    "random_cv_moments_normal",
    "random_cv_var_nonnormal",
    "kfold_cv_moments_normal",
    "kfold_variance_assembled",
    "regression_optimal_split",
    "regression_resampling_plan",
    "regression_table",
    "recipe_covariates",
    "recipe_errors",
    "regression_dataset",
    "design_convergence",
]
