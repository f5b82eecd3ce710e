"""Training size and fold count for the sample-mean decision rule.

The variance of one test-set average is approximated by
``v(n1) = A/n1 + B/(n - n1)`` with ``A = alpha + (gamma + delta)/n`` and
``B = beta + (gamma + delta)/n``; the covariance of two of them by
``c = (alpha + beta)/n + gamma/n^2 + delta/(n1 n)``. The optimal ``n1``
minimizes ``v`` over ``ceil(n/2) <= n1 <= n - 1``.

For k-fold CV the variance is ``(alpha + beta)/n + k/(k-1) (gamma +
delta)/n^2`` which is monotone in ``k``: leave-one-out wins when
``gamma + delta > 0`` and the smallest divisor of ``n`` otherwise.

>>> from cvplan.model import MomentParams
>>> from cvplan.split_optimizer import optimal_n1, optimal_k
>>> squared_normal = MomentParams(0.0, 2.0, 4.0, 0.0)
>>> optimal_n1(100, squared_normal).n1_opt
50
>>> optimal_k(100, squared_normal).k_opt
100
"""

from __future__ import annotations
import logging
import math
import typing as t

import numpy as np

from . import cv_variance, errors
from .model import CvVarianceModel, FoldPlan, MomentParams, SplitPlan, half_up

logger = logging.getLogger(__name__)


def _check_n1(n: int, n1: int) -> None:
    if not half_up(n) <= n1 <= n - 1:
        raise errors.OutOfRange(
            f"n1={n1} outside [{half_up(n)}, {n - 1}] for n={n}."
        )


def _v(n: int, n1: t.Any, A: float, B: float) -> t.Any:
    return A / n1 + B / (n - n1)


def _c(n: int, n1: t.Any, params: MomentParams) -> t.Any:
    p = params
    return (p.alpha + p.beta) / n + p.gamma / n**2 + p.delta / (n1 * n)


def approx_v(n: int, n1: int, params: MomentParams) -> float:
    """approx_v(n, n1, params) -> float
    Approximate variance of one test-set average.

    >>> from cvplan.model import MomentParams
    >>> from cvplan.split_optimizer import approx_v
    >>> round(approx_v(100, 50, MomentParams(0.0, 2.0, 4.0, 0.0)), 6)
    0.0416

    Raises
    ------
    OutOfRange
        If ``n1`` is outside ``[ceil(n/2), n - 1]``.
    """
    _check_n1(n, n1)
    A, B = params.shifted(n)
    return float(_v(n, n1, A, B))


def approx_c(n: int, n1: int, params: MomentParams) -> float:
    """approx_c(n, n1, params) -> float
    Approximate covariance of two test-set averages; ``n1`` only enters
    through ``delta``.

    Raises
    ------
    OutOfRange
        If ``n1`` is outside ``[ceil(n/2), n - 1]``.
    """
    _check_n1(n, n1)
    return float(_c(n, n1, params))


def closed_form_n1(n: int, A: float, B: float) -> int:
    """closed_form_n1(n, A, B) -> int
    The rounded continuous minimizer ``sqrt(A) / (sqrt(A) + sqrt(B)) n``,
    or ``ceil(n/2)`` when ``A <= B``.

    >>> from cvplan.split_optimizer import closed_form_n1
    >>> closed_form_n1(100, 4.0, 1.0)
    67
    >>> closed_form_n1(11, 1.0, 1.0)
    6
    """
    if A <= B:
        return half_up(n)
    ra, rb = math.sqrt(A), math.sqrt(B)
    n1 = math.floor(ra / (ra + rb) * n + 0.5)
    return max(half_up(n), min(n - 1, n1))


def optimal_n1(n: int, params: MomentParams) -> SplitPlan:
    """optimal_n1(n, params) -> SplitPlan
    Training size minimizing the approximate variance.

    The closed form is checked against the full integer grid
    ``ceil(n/2) .. n-1``; the plan always carries the grid argmin (ties go to
    the smaller ``n1``) and ``method`` tells whether the closed form
    attained it. When ``B <= 0``, which only happens at small ``n`` with
    strongly negative ``gamma + delta``, the closed form does not apply;
    the grid argmin is returned and the plan is flagged.

    Parameters
    ----------
    n : int
        Sample size, at least 4.
    params : MomentParams
        Moment parameters of the loss.

    Raises
    ------
    OutOfRange
        If ``n < 4``.
    InvalidParams
        If the variance is not positive anywhere on the grid.
    """
    if n < 4:
        raise errors.OutOfRange(f"Need n >= 4, got {n}.")
    A, B = params.shifted(n)
    grid = np.arange(half_up(n), n)
    values = _v(n, grid, A, B)
    best = int(grid[np.argmin(values)])
    if values.min() <= 0:
        raise errors.InvalidParams(
            f"Approximate variance is not positive on the grid (A={A}, B={B})."
        )
    flagged = False
    if B <= 0:
        logger.debug("B=%s <= 0 at n=%d, using the grid argmin", B, n)
        method = "GridArgmin"
        flagged = True
    elif closed_form_n1(n, A, B) == best:
        method = "ClosedForm"
    else:
        logger.debug(
            "closed form n1=%d replaced by grid argmin %d at n=%d",
            closed_form_n1(n, A, B), best, n,
        )
        method = "GridArgmin"
    c = float(_c(n, best, params))
    v = float(_v(n, best, A, B))
    return SplitPlan(
        n=n,
        n1_opt=best,
        curve=tuple((int(g), float(x)) for g, x in zip(grid, values)),
        c_approx=c,
        rho_opt=c / v,
        method=method,
        flagged=flagged,
    )


# ============================ K-FOLD =================================


def min_divisor(n: int) -> int:
    """min_divisor(n) -> int
    Smallest divisor of ``n`` above 1.

    >>> from cvplan.split_optimizer import min_divisor
    >>> min_divisor(301), min_divisor(97), min_divisor(750)
    (7, 97, 2)
    """
    if n < 2:
        raise errors.OutOfRange(f"Need n >= 2, got {n}.")
    for k in range(2, math.isqrt(n) + 1):
        if n % k == 0:
            return k
    return n


def divisors(n: int) -> t.List[int]:
    """All divisors ``k >= 2`` of ``n`` in increasing order."""
    return [k for k in range(2, n + 1) if n % k == 0]


def _check_k(n: int, k: int) -> None:
    if not 2 <= k <= n:
        raise errors.OutOfRange(f"Need 2 <= k <= n, got n={n}, k={k}.")
    if n % k:
        raise errors.NotDivisible(f"k={k} does not divide n={n}.")


def kfold_variance(n: int, k: int, params: MomentParams) -> float:
    """kfold_variance(n, k, params) -> float
    Approximate variance of the k-fold estimator.

    Raises
    ------
    NotDivisible
        If ``k`` does not divide ``n``.
    """
    _check_k(n, k)
    p = params
    return (p.alpha + p.beta) / n + k / (k - 1) * (p.gamma + p.delta) / n**2


def kfold_moments(n: int, k: int, params: MomentParams) -> t.Tuple[float, float]:
    """kfold_moments(n, k, params) -> (v, c)
    Variance of one fold's test average and covariance between two folds.
    ``(v + (k - 1) c) / k`` reproduces :func:`kfold_variance`.
    """
    _check_k(n, k)
    p = params
    shift = p.gamma + p.delta
    v = k * p.alpha / ((k - 1) * n) + k * p.beta / n
    v += k * k * shift / ((k - 1) * n * n)
    c = k * (k - 2) * p.alpha / ((k - 1) ** 2 * n)
    return v, c


def optimal_k(n: int, params: MomentParams) -> FoldPlan:
    """optimal_k(n, params) -> FoldPlan
    Fold count minimizing :func:`kfold_variance`: ``n`` (leave-one-out) when
    ``gamma + delta > 0``, else the smallest divisor of ``n``. The curve
    lists every divisor with its variance and its efficiency relative to
    the optimum.

    >>> from cvplan.model import MomentParams
    >>> from cvplan.split_optimizer import optimal_k
    >>> optimal_k(301, MomentParams(0.0, 2.0, 1.0, -3.0)).k_opt
    7
    """
    if n < 4:
        raise errors.OutOfRange(f"Need n >= 4, got {n}.")
    k_opt = n if params.gamma + params.delta > 0 else min_divisor(n)
    ref = kfold_variance(n, k_opt, params)
    curve = tuple(
        (k, var, var / ref)
        for k, var in ((k, kfold_variance(n, k, params)) for k in divisors(n))
    )
    return FoldPlan(n=n, k_opt=k_opt, curve=curve)


def relative_efficiency_kfold(n: int, k: int, params: MomentParams) -> float:
    """relative_efficiency_kfold(n, k, params) -> float
    ``kfold_variance`` at ``k`` over its value at the optimal fold count.

    >>> from cvplan.model import MomentParams
    >>> from cvplan.split_optimizer import relative_efficiency_kfold
    >>> round(relative_efficiency_kfold(24, 2, MomentParams(0, 2, 4, 0)), 3)
    1.073
    """
    _check_k(n, k)
    k_opt = n if params.gamma + params.delta > 0 else min_divisor(n)
    return kfold_variance(n, k, params) / kfold_variance(n, k_opt, params)


# ============================= CURVES ================================


def sample_mean_moments(n: int, n1: int, params: MomentParams) -> CvVarianceModel:
    """sample_mean_moments(n, n1, params) -> CvVarianceModel
    ``v = alpha/n1 + beta/n2 + (gamma + delta)/(n1 n2)`` and the approximate
    covariance at any ``1 <= n1 <= n - 1``.

    Raises
    ------
    OutOfRange
    InvalidParams
        If the approximations leave ``0 <= c <= v``.
    """
    if not 1 <= n1 <= n - 1:
        raise errors.OutOfRange(f"Need 1 <= n1 <= n-1, got n={n}, n1={n1}.")
    p = params
    n2 = n - n1
    v = p.alpha / n1 + p.beta / n2 + (p.gamma + p.delta) / (n1 * n2)
    return CvVarianceModel(v=v, c=float(_c(n, n1, p)))


def variance_curve(params: MomentParams, n: int) -> t.List[t.Dict[str, float]]:
    """variance_curve(params, n) -> list[dict]
    Rows ``n1, v, c, rho`` for every ``n1`` in ``1 .. n-1``, the data behind
    a plot of the approximate variance against the training size.
    """
    if n < 2:
        raise errors.OutOfRange(f"Need n >= 2, got {n}.")
    A, B = params.shifted(n)
    rows: t.List[t.Dict[str, float]] = []
    for n1 in range(1, n):
        v = float(_v(n, n1, A, B))
        c = float(_c(n, n1, params))
        rows.append({"n1": n1, "v": v, "c": c, "rho": c / v})
    return rows


def split_summary(
    plan: SplitPlan,
    pis: t.Iterable[float] = cv_variance.TABLE_PI,
    rs: t.Iterable[float] = cv_variance.TABLE_R,
) -> t.Dict[str, t.Any]:
    """split_summary(plan, pis, rs) -> dict
    The plan with its minimum resampling sizes at ``rho_opt``.
    """
    out: t.Dict[str, t.Any] = {
        "n": plan.n,
        "n1_opt": plan.n1_opt,
        "n2": plan.n2,
        "v": plan.v,
        "c": plan.c_approx,
        "rho": plan.rho_opt,
        "method": plan.method,
        "flagged": plan.flagged,
    }
    if 0 < plan.rho_opt < 1:
        out.update(cv_variance.resampling_table(plan.rho_opt, pis, rs))
    else:
        logger.warning(
            "rho=%s outside (0, 1), no resampling sizes reported", plan.rho_opt
        )
    return out


__all__ = [
    "approx_v",
    "approx_c",
    "closed_form_n1",
    "optimal_n1",
    "min_divisor",
    "divisors",
    "kfold_variance",
    "kfold_moments",
    "optimal_k",
    "relative_efficiency_kfold",
    "sample_mean_moments",
    "variance_curve",
    "split_summary",
]
