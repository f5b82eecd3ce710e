"""Variance of the random cross validation estimator.

With ``v`` the variance of one test-set average and ``c`` the covariance of
two of them, the average over ``J`` random splits has variance
``(v - c) / J + c``. This module evaluates it, brackets it and picks the
smallest ``J`` meeting an effectiveness or reduction target.

>>> from cvplan.cv_variance import j_for_effectiveness, j_for_reduction
>>> j_for_effectiveness(0.3, 0.9).J
21
>>> j_for_reduction(0.3, 0.01).J
15
"""

from __future__ import annotations
import logging
import math
import typing as t
from fractions import Fraction

from . import errors
from .model import CvVarianceModel, ResamplingPlan

logger = logging.getLogger(__name__)

Number = t.Union[int, float]


def _check_J(J: Number, least: int = 1) -> None:
    if J == math.inf:
        return
    if isinstance(J, bool) or not isinstance(J, int) or J < least:
        raise errors.InvalidJ(f"J must be an integer >= {least}, got {J!r}.")


def _exact(x: float) -> Fraction:
    # decimal literal, so that 0.3 means 3/10
    return Fraction(repr(float(x)))


def var_cv(model: CvVarianceModel, J: Number) -> float:
    """var_cv(model, J) -> float
    Variance of the average over ``J`` random splits. ``J`` may be
    ``math.inf``, which returns the limit ``c``.

    >>> from cvplan.model import CvVarianceModel
    >>> from cvplan.cv_variance import var_cv
    >>> var_cv(CvVarianceModel(2.0, 1.0), 4)
    1.25
    """
    _check_J(J)
    if J == math.inf:
        return model.c
    return (model.v - model.c) / J + model.c


def var_bounds(model: CvVarianceModel, J: int) -> t.Tuple[float, float]:
    """var_bounds(model, J) -> (lower, upper)
    ``max(c, v/J) <= var_cv(model, J) <= v``.
    """
    _check_J(J)
    if J == math.inf:
        return model.c, model.v
    return max(model.c, model.v / J), model.v


def resampling_effectiveness(rho: float, J: Number) -> float:
    """resampling_effectiveness(rho, J) -> float
    Ratio of the limiting variance ``c`` to the variance with ``J`` splits,
    ``(1 + (1 - rho) / (rho J))^-1``.

    Raises
    ------
    InvalidRho
        If ``rho`` is outside ``(0, 1]``.
    InvalidJ
        If ``J`` is not a positive integer.
    """
    if not 0 < rho <= 1:
        raise errors.InvalidRho(f"rho must lie in (0, 1], got {rho}.")
    _check_J(J)
    if J == math.inf:
        return 1.0
    return 1.0 / (1.0 + (1.0 - rho) / (rho * J))


def reduction_ratio(rho: float, J: Number) -> float:
    """reduction_ratio(rho, J) -> float
    Relative variance decrease from ``J - 1`` to ``J`` splits,
    ``(1 - rho) / ((J - 1) + (J - 1)^2 rho)``.

    >>> from cvplan.cv_variance import reduction_ratio
    >>> reduction_ratio(1.0, 7)
    0.0
    >>> reduction_ratio(0.5, 1)
    Traceback (most recent call last):
    ...
    cvplan.errors.InvalidJ: J must be an integer >= 2, got 1.
    """
    if not 0 <= rho <= 1:
        raise errors.InvalidRho(f"rho must lie in [0, 1], got {rho}.")
    _check_J(J, 2)
    if J == math.inf:
        return 0.0
    step = J - 1
    return (1.0 - rho) / (step + step * step * rho)


def _check_rho(rho: float) -> None:
    if not 0 < rho < 1:
        raise errors.InvalidRho(f"rho must lie in (0, 1), got {rho}.")


def _re_holds(rho: Fraction, pi: Fraction, J: int) -> bool:
    # re(J) >= pi  <=>  J (1 - pi) rho >= pi (1 - rho)
    return J * (1 - pi) * rho >= pi * (1 - rho)


def _rr_holds(rho: Fraction, r: Fraction, J: int) -> bool:
    step = J - 1
    return 1 - rho <= r * (step + step * step * rho)


def j_for_effectiveness(rho: float, pi: float) -> ResamplingPlan:
    """j_for_effectiveness(rho, pi) -> ResamplingPlan
    Smallest ``J`` whose resampling effectiveness reaches ``pi``.

    The criterion is evaluated in exact rationals built from the decimal
    form of the inputs, so boundary cases such as ``rho=0.2, pi=0.9``
    (exactly 36) do not drift by one.

    Parameters
    ----------
    rho : float
        Correlation ``c / v``, in ``(0, 1)``.
    pi : float
        Target effectiveness, in ``(0, 1)``.

    Raises
    ------
    InvalidRho
    InvalidPi
    """
    _check_rho(rho)
    if not 0 < pi < 1:
        raise errors.InvalidPi(f"pi must lie in (0, 1), got {pi}.")
    q_rho, q_pi = _exact(rho), _exact(pi)
    J = max(1, math.ceil(q_pi * (1 - q_rho) / ((1 - q_pi) * q_rho)))
    while J > 1 and _re_holds(q_rho, q_pi, J - 1):
        J -= 1
    while not _re_holds(q_rho, q_pi, J):
        J += 1
    logger.debug("J_re(pi=%s) at rho=%s -> %d", pi, rho, J)
    return ResamplingPlan(
        criterion="effectiveness",
        target=pi,
        rho=rho,
        J=J,
        achieved_re=resampling_effectiveness(rho, J),
        achieved_rr=reduction_ratio(rho, J) if J >= 2 else None,
    )


def j_for_reduction(rho: float, r: float) -> ResamplingPlan:
    """j_for_reduction(rho, r) -> ResamplingPlan
    Smallest ``J >= 2`` whose reduction ratio is at most ``r``.

    Raises
    ------
    InvalidRho
    InvalidR
        If ``r <= 0``.
    """
    _check_rho(rho)
    if not r > 0 or not math.isfinite(r):
        raise errors.InvalidR(f"r must be a positive number, got {r}.")
    guess = 1 - 1 / (2 * rho) + math.sqrt(
        1 / (4 * rho * rho) + (1 - rho) / (rho * r)
    )
    J = max(2, math.ceil(guess))
    q_rho, q_r = _exact(rho), _exact(r)
    start = J
    while J > 2 and _rr_holds(q_rho, q_r, J - 1):
        J -= 1
    while not _rr_holds(q_rho, q_r, J):
        J += 1
    if J != start:
        logger.debug("J_rr(r=%s) at rho=%s adjusted %d -> %d", r, rho, start, J)
    return ResamplingPlan(
        criterion="reduction",
        target=r,
        rho=rho,
        J=J,
        achieved_re=resampling_effectiveness(rho, J),
        achieved_rr=reduction_ratio(rho, J),
    )


def naive_rho(n: int, n1: int) -> float:
    """naive_rho(n, n1) -> float
    The naive correlation estimate ``n2 / n``. Offered for quick looks only,
    the planners never fall back to it.

    >>> from cvplan.cv_variance import naive_rho
    >>> naive_rho(10, 6)
    0.4
    """
    if not 1 <= n1 < n:
        raise errors.OutOfRange(f"Need 1 <= n1 < n, got n={n}, n1={n1}.")
    return (n - n1) / n


TABLE_PI: t.Tuple[float, ...] = (0.8, 0.85, 0.9, 0.95)
TABLE_R: t.Tuple[float, ...] = (0.1, 0.05, 0.025, 0.01)


def resampling_table(
    rho: float,
    pis: t.Iterable[float] = TABLE_PI,
    rs: t.Iterable[float] = TABLE_R,
) -> t.Dict[str, int]:
    """resampling_table(rho, pis=TABLE_PI, rs=TABLE_R) -> dict
    Minimum resampling sizes for the usual targets, keyed ``J_re(0.9)`` and
    ``J_rr(0.01)`` style.

    >>> from cvplan.cv_variance import resampling_table
    >>> resampling_table(0.5)
    {'J_re(0.8)': 4, 'J_re(0.85)': 6, 'J_re(0.9)': 9, 'J_re(0.95)': 19, \
'J_rr(0.1)': 4, 'J_rr(0.05)': 5, 'J_rr(0.025)': 7, 'J_rr(0.01)': 11}
    """
    out: t.Dict[str, int] = {}
    for pi in pis:
        out[f"J_re({pi})"] = j_for_effectiveness(rho, pi).J
    for r in rs:
        out[f"J_rr({r})"] = j_for_reduction(rho, r).J
    return out


__all__ = [
    "var_cv",
    "var_bounds",
    "resampling_effectiveness",
    "reduction_ratio",
    "j_for_effectiveness",
    "j_for_reduction",
    "naive_rho",
    "resampling_table",
    "TABLE_PI",
    "TABLE_R",
]
