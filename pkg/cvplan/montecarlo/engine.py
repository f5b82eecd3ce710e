"""Seeded Monte Carlo estimation of ``v`` and ``c``.

Every rep draws a dataset and ``K`` independent random splits of it. With
``W`` the average within-rep variance of the ``K`` test-set errors and ``B``
the variance of the rep means,

    c_hat = B - W / K,    v_hat = c_hat + W,

are unbiased for the unconditional variance of one test-set error and the
covariance of two. Standard errors come from the delete-one-rep jackknife.

Random streams
--------------
Streams are ``Philox`` generators keyed by ``SeedSequence(seed,
spawn_key=(*prefix, rep, s))``: ``s = 0`` draws the data, ``s = 1 + j``
draws split ``j``. Reps therefore give identical results in any order and
on any number of workers.
"""

from __future__ import annotations
import logging
import math
import typing as t
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import config, errors
from ..loss_models import LossSpec, loss_value
from ..model import DistSpec, SimReport
from . import distributions

logger = logging.getLogger(__name__)

DataGenerator = t.Callable[[np.random.Generator], np.ndarray]
Key = t.Union[int, np.integer]

CV_J: t.Tuple[float, ...] = (1, 10, 15, math.inf)


def make_rng(seed: t.Optional[int], *key: Key) -> np.random.Generator:
    """make_rng(seed, *key) -> numpy.random.Generator
    A Philox stream for ``seed`` (``None`` reads the configured default)
    and a spawn key of non-negative integers.

    >>> from cvplan.montecarlo.engine import make_rng
    >>> a = make_rng(7, 1, 2).random()
    >>> b = make_rng(7, 1, 2).random()
    >>> a == b, a == make_rng(7, 1, 3).random()
    (True, False)
    """
    spawn = tuple(int(k) for k in key)
    if any(k < 0 for k in spawn):
        raise errors.InvalidConfig(f"Stream keys must be >= 0, got {spawn}.")
    seq = np.random.SeedSequence(config.resolve_seed(seed), spawn_key=spawn)
    return np.random.Generator(np.random.Philox(seq))


# ============================ GENERATORS =============================


class DistGenerator:
    """Draws ``n`` points of a distribution."""

    def __init__(self, spec: DistSpec, n: int):
        self.spec = spec
        self.n = n

    def __call__(self, rng: np.random.Generator) -> np.ndarray:
        return distributions.draw(self.spec, self.n, rng)


class RegressionGenerator:
    """Responses ``X beta + error`` over a fixed design."""

    def __init__(self, X: np.ndarray, beta: np.ndarray, law: str = "normal"):
        self.X = np.asarray(X, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        self.law = law

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def __call__(self, rng: np.random.Generator) -> np.ndarray:
        from ..regression_planner import recipe_errors

        return self.X @ self.beta + recipe_errors(self.n, rng, self.law)


# =============================== RULES ===============================


class SampleMeanRule:
    """Estimates the mean by the training average and scores the test set
    with ``loss``. ``absapprox`` defaults its ``d`` to ``1/n``."""

    def __init__(self, loss: LossSpec):
        self.loss = loss

    def __call__(self, data: np.ndarray, masks: np.ndarray) -> np.ndarray:
        x = np.asarray(data, dtype=float)
        n = x.size
        n1 = masks.sum(axis=1)
        mu = masks @ x / n1
        d = None
        if self.loss.family == "absapprox" and self.loss.d is None:
            d = 1.0 / n
        values = np.asarray(loss_value(self.loss, mu[:, None], x[None, :], d))
        test = ~masks
        return (values * test).sum(axis=1) / test.sum(axis=1)


class RegressionRule:
    """Least squares on the training rows, mean squared error on the test
    rows of a fixed design."""

    def __init__(self, X: np.ndarray):
        self.X = np.asarray(X, dtype=float)

    def __call__(self, data: np.ndarray, masks: np.ndarray) -> np.ndarray:
        y = np.asarray(data, dtype=float)
        out = np.empty(masks.shape[0])
        for j, mask in enumerate(masks):
            beta = np.linalg.lstsq(self.X[mask], y[mask], rcond=None)[0]
            resid = y[~mask] - self.X[~mask] @ beta
            out[j] = np.mean(resid**2)
        return out


Rule = t.Callable[[np.ndarray, np.ndarray], np.ndarray]


def draw_splits(
    n: int,
    n1: int,
    splits: int,
    seed: t.Optional[int],
    *key: Key,
) -> np.ndarray:
    """draw_splits(n, n1, splits, seed, *key) -> ndarray[bool]
    ``splits x n`` training masks; split ``j`` uses stream ``(*key, 1+j)``.
    """
    masks = np.zeros((splits, n), dtype=bool)
    for j in range(splits):
        rng = make_rng(seed, *key, 1 + j)
        masks[j, rng.choice(n, n1, replace=False)] = True
    return masks


def kfold_masks(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k x n`` training masks of a random partition into ``k`` folds."""
    if not 2 <= k <= n or n % k:
        raise errors.NotDivisible(f"k={k} must divide n={n} with 2 <= k <= n.")
    order = rng.permutation(n)
    masks = np.ones((k, n), dtype=bool)
    for f, fold in enumerate(np.split(order, k)):
        masks[f, fold] = False
    return masks


# ============================ ESTIMATION =============================


def _loo_var(x: np.ndarray) -> np.ndarray:
    # variance (ddof=1) of x with each element left out in turn
    m = x.size
    s1, s2 = x.sum(), np.square(x).sum()
    r1, r2 = s1 - x, s2 - np.square(x)
    return (r2 - r1 * r1 / (m - 1)) / (m - 2)


def _jackknife_se(leave_out: np.ndarray) -> float:
    m = leave_out.size
    dev = leave_out - leave_out.mean()
    return float(math.sqrt((m - 1) / m * np.sum(dev * dev)))


def _safe_rho(c: t.Any, v: t.Any) -> t.Any:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.asarray(v) > 0, np.asarray(c) / np.asarray(v), np.nan)


def split_errors(
    generator: DataGenerator,
    rule: Rule,
    n: int,
    n1: int,
    reps: int,
    splits: int,
    seed: t.Optional[int] = None,
    workers: t.Optional[int] = None,
    prefix: t.Sequence[Key] = (),
) -> np.ndarray:
    """split_errors(...) -> ndarray of shape (reps, splits)
    Test-set errors of ``splits`` random splits for each of ``reps``
    datasets."""
    seed = config.resolve_seed(seed)

    def one(rep: int) -> np.ndarray:
        data = generator(make_rng(seed, *prefix, rep, 0))
        masks = draw_splits(n, n1, splits, seed, *prefix, rep)
        return np.asarray(rule(data, masks), dtype=float)

    pool = config.resolve_workers(workers)
    if pool == 1:
        rows = [one(rep) for rep in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=pool) as ex:
            rows = list(ex.map(one, range(reps)))
    return np.vstack(rows)


def moments_from_errors(E: np.ndarray) -> t.Dict[str, t.Any]:
    """Estimates ``v, c, rho`` (and their jackknife standard errors) from a
    ``reps x splits`` array of test-set errors."""
    reps, K = E.shape
    within = E.var(axis=1, ddof=1)
    means = E.mean(axis=1)
    W = float(within.mean())
    B = float(means.var(ddof=1))
    c = B - W / K
    v = c + W
    out: t.Dict[str, t.Any] = {
        "v_hat": v,
        "c_hat": c,
        "rho_hat": float(_safe_rho(c, v)),
        "mean": float(E.mean()),
    }
    ses: t.Dict[str, float] = {}
    if reps >= 3:
        W_loo = (within.sum() - within) / (reps - 1)
        c_loo = _loo_var(means) - W_loo / K
        v_loo = c_loo + W_loo
        ses = {
            "v_hat": _jackknife_se(v_loo),
            "c_hat": _jackknife_se(c_loo),
            "rho_hat": _jackknife_se(_safe_rho(c_loo, v_loo)),
        }
    else:
        ses = {"v_hat": math.nan, "c_hat": math.nan, "rho_hat": math.nan}
    out["se"] = ses
    return out


def empirical_cv_moments(
    generator: DataGenerator,
    rule: Rule,
    n: int,
    n1: int,
    reps: int,
    splits: int = 2,
    seed: t.Optional[int] = None,
    workers: t.Optional[int] = None,
    prefix: t.Sequence[Key] = (),
    extra: t.Optional[t.Mapping[str, t.Any]] = None,
) -> SimReport:
    """empirical_cv_moments(generator, rule, n, n1, reps, splits=2, ...)
    Monte Carlo estimates of ``v``, ``c`` and ``rho`` with the variance of
    the random CV average for ``J`` in ``1, 10, 15, inf``.

    Parameters
    ----------
    generator : callable
        Draws one dataset from a numpy generator.
    rule : callable
        Maps ``(data, masks)`` to one test-set error per training mask.
    n, n1 : int
        Sample and training sizes.
    reps : int
        Number of datasets, at least 2.
    splits : int, default=2
        Random splits per dataset, at least 2.
    seed : int, optional
        Base seed, defaults to :func:`cvplan.config.default_seed`.
    workers : int, optional
        Threads running reps, defaults to :func:`cvplan.config.default_workers`.
    prefix : sequence of int
        Leading stream keys, to keep separate studies apart.
    extra : mapping, optional
        Added to the echoed config.

    Returns
    -------
    SimReport
        ``rho_hat`` is NaN when the data carry no variance and flagged when
        negative.

    Raises
    ------
    InvalidConfig
        On fewer than 2 reps or splits, or sizes that leave an empty set.
    """
    if reps < 2 or splits < 2:
        raise errors.InvalidConfig(
            f"Need reps >= 2 and splits >= 2, got reps={reps}, splits={splits}."
        )
    if not 1 <= n1 <= n - 1:
        raise errors.InvalidConfig(f"Need 1 <= n1 <= n-1, got n={n}, n1={n1}.")
    seed = config.resolve_seed(seed)
    E = split_errors(generator, rule, n, n1, reps, splits, seed, workers, prefix)
    est = moments_from_errors(E)
    ses = est.pop("se")
    v, c = est["v_hat"], est["c_hat"]
    for J in CV_J:
        key = "var_cv_inf" if J == math.inf else f"var_cv_{J}"
        est[key] = c if J == math.inf else (v - c) / J + c
    flags: t.List[str] = []
    if est["rho_hat"] < 0:
        flags.append("rho_negative")
    if math.isnan(est["rho_hat"]):
        flags.append("no_variance")
    cfg = {"n": n, "n1": n1, "splits": splits, "seed": seed}
    cfg.update(extra or {})
    logger.debug(
        "n=%d n1=%d reps=%d: v=%.5g c=%.5g rho=%.4f",
        n, n1, reps, v, c, est["rho_hat"],
    )
    return SimReport(
        config=cfg,
        estimates=est,
        reps=reps,
        standard_errors=ses,
        flags=tuple(flags),
    )


def empirical_kfold_variance(
    generator: DataGenerator,
    rule: Rule,
    n: int,
    k: int,
    reps: int,
    seed: t.Optional[int] = None,
    prefix: t.Sequence[Key] = (),
) -> SimReport:
    """Monte Carlo variance of the k-fold estimator over ``reps`` datasets,
    each partitioned at random."""
    if reps < 2:
        raise errors.InvalidConfig(f"Need reps >= 2, got {reps}.")
    seed = config.resolve_seed(seed)
    values = np.empty(reps)
    for rep in range(reps):
        data = generator(make_rng(seed, *prefix, rep, 0))
        masks = kfold_masks(n, k, make_rng(seed, *prefix, rep, 1))
        values[rep] = np.mean(rule(data, masks))
    var = float(values.var(ddof=1))
    se = var * math.sqrt(2.0 / (reps - 1))
    return SimReport(
        config={"n": n, "k": k, "seed": seed},
        estimates={"var_kfold": var, "mean": float(values.mean())},
        reps=reps,
        standard_errors={"var_kfold": se},
    )


__all__ = [
    "make_rng",
    "DistGenerator",
    "RegressionGenerator",
    "SampleMeanRule",
    "RegressionRule",
    "draw_splits",
    "kfold_masks",
    "split_errors",
    "moments_from_errors",
    "empirical_cv_moments",
    "empirical_kfold_variance",
]
