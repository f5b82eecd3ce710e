"""Desk scale runs of the published simulation tables.

Every table is addressed by an id and produces a list of
:class:`~cvplan.model.SimReport`, one per printed row:

====  ==============================================================
T4    sample mean, squared error loss
T5    sample mean, q-class loss with ``q(t) = -sqrt(1 + t^2)``
T6    sample mean, modified squared error loss
T7    sample mean, double squared error loss
T8    sample mean, approximated absolute error loss with ``d = 1/n``
T9    linear regression, squared error, ``Var(mu_CV,J)`` by ``n1``
T10   resampling effectiveness and reduction ratio off the optimum
T11   logistic classification, 0/1 loss, ``Var(mu_j)`` by ``n1``
====  ==============================================================

Repetitions are ``scale`` times the published counts. The sample-mean
tables report the averaged plug-in ``n1_opt/n``, ``rho_opt`` and ``k_opt/n``
with the population values in ``theoretical`` and the mean squared error of
each estimate against them.

>>> from cvplan.montecarlo.tables import simulate_table
>>> rows = simulate_table("T10")
>>> [row.estimates["n1"] for row in rows]
[50, 75, 80, 85, 90]
"""

from __future__ import annotations
import logging
import math
import typing as t
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from .. import config, cv_variance, errors
from ..logistic_planner import algorithm1_optimal_n1, logistic_dataset
from ..loss_models import (
    LossSpec,
    estimate_moment_params,
    get_loss,
    moments_required,
    population_moment_params,
)
from ..model import MomentParams, SimReport, half_up
from ..regression_planner import (
    ERROR_LAWS,
    RECIPE_BETA,
    TABLE_FRACTIONS,
    design_stats,
    random_cv_moments_normal,
    recipe_covariates,
    regression_optimal_split,
)
from ..split_optimizer import (
    approx_c,
    approx_v,
    optimal_k,
    optimal_n1,
    sample_mean_moments,
)
from . import distributions, engine

logger = logging.getLogger(__name__)

SYMMETRIC_DISTS = (
    "N(0,1)", "U(-1,1)", "t12", "t6", "exp(1)", "LogNormal", "Pareto(15)",
    "Pareto(6)",
)
SHIFTED_DISTS = (
    "N(1,1)", "U(0,1)", "t12(5)", "t6(5)", "exp(1)", "LogNormal",
    "Pareto(15)", "Pareto(6)",
)
EIGHT_MOMENT_DISTS = (
    "N(0,1)", "U(-1,1)", "t12", "t9", "exp(1)", "LogNormal", "Pareto(15)",
    "Pareto(9)",
)

SAMPLE_MEAN_TABLES: t.Dict[str, t.Tuple[str, t.Tuple[str, ...]]] = {
    "T4": ("squared", SYMMETRIC_DISTS),
    "T5": ("qsqrt", SYMMETRIC_DISTS),
    "T6": ("modsq", SHIFTED_DISTS),
    "T7": ("doublesq", EIGHT_MOMENT_DISTS),
    "T8": ("absapprox", SYMMETRIC_DISTS),
}
TABLES = ("T4", "T5", "T6", "T7", "T8", "T9", "T10", "T11")

PUBLISHED_REPS = {
    "T4": 10**4, "T5": 10**4, "T6": 10**4, "T7": 10**4, "T8": 10**4,
    "T9": 5000, "T11": 50,
}
DESK_SCALE = {
    "T4": 0.05, "T5": 0.05, "T6": 0.05, "T7": 0.05, "T8": 0.05,
    "T9": 0.4, "T11": 1.0,
}
MIN_REPS = 50

DEFAULT_SIZES = {
    "sample_mean": (60, 100, 301, 750, 1501, 5000),
    "T9": (40, 60, 100, 200),
    "T10": (100,),
    "T11": (60, 100),
}
REGRESSION_SPLITS = 10
SQUARED_NORMAL = MomentParams(0.0, 2.0, 4.0, 0.0)


def _reps(table_id: str, scale: t.Optional[float]) -> int:
    if scale is None:
        scale = DESK_SCALE[table_id]
    if not 0 < scale <= 1:
        raise errors.InvalidConfig(f"scale must lie in (0, 1], got {scale}.")
    reps = int(round(scale * PUBLISHED_REPS[table_id]))
    if reps < MIN_REPS:
        raise errors.InvalidConfig(
            f"{table_id} at scale {scale} gives {reps} reps, at least "
            f"{MIN_REPS} are needed."
        )
    return reps


def _fraction_n1(n: int, fraction: float) -> int:
    if fraction <= 0.5:
        return half_up(n)
    return min(n - 1, max(half_up(n), math.ceil(fraction * n - 1e-9)))


def _map(fn: t.Callable[[int], t.Any], count: int, workers: t.Optional[int]):
    pool = config.resolve_workers(workers)
    if pool == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=pool) as ex:
        return list(ex.map(fn, range(count)))


# =========================== SAMPLE MEAN =============================


def _plan(n: int, params: MomentParams) -> t.Dict[str, float]:
    plan = optimal_n1(n, params)
    return {
        "n1_ratio": plan.n1_opt / n,
        "rho_opt": plan.rho_opt,
        "k_ratio": optimal_k(n, params).k_opt / n,
    }


def theoretical_plan(
    loss: LossSpec, dist: str, n: int
) -> t.Dict[str, float]:
    """theoretical_plan(loss, dist, n) -> dict
    ``n1_ratio``, ``rho_opt`` and ``k_ratio`` from population moments; empty
    when the distribution lacks the moments the loss needs.
    """
    spec = distributions.parse_dist(dist)
    try:
        params = population_moment_params(
            loss, distributions.frozen(spec), n
        )
        return _plan(n, params)
    except errors.CvPlanError as e:
        logger.debug("no theoretical plan for %s at n=%d: %s", dist, n, e)
        return {}


def sample_mean_row(
    loss: LossSpec,
    dist: str,
    n: int,
    reps: int,
    seed: t.Optional[int] = None,
    workers: t.Optional[int] = None,
    prefix: t.Sequence[int] = (),
    table_id: str = "",
) -> SimReport:
    """sample_mean_row(loss, dist, n, reps, seed=None, ...) -> SimReport
    Averages the plug-in plan over ``reps`` samples of ``dist``. Samples on
    which estimation fails are skipped and counted in the flags.
    """
    seed = config.resolve_seed(seed)
    spec = distributions.parse_dist(dist)
    distributions.check_moments(spec, moments_required(loss))

    def one(rep: int) -> t.Optional[t.Dict[str, float]]:
        x = distributions.draw(spec, n, engine.make_rng(seed, *prefix, rep))
        try:
            return _plan(n, estimate_moment_params(loss, x))
        except errors.CvPlanError as e:
            logger.debug("rep %d of %s n=%d failed: %s", rep, dist, n, e)
            return None

    results = _map(one, reps, workers)
    kept = [r for r in results if r is not None]
    flags: t.List[str] = []
    if len(kept) < reps:
        flags.append(f"failed_reps={reps - len(kept)}")
    theory = theoretical_plan(loss, dist, n)
    keys = ("n1_ratio", "rho_opt", "k_ratio")
    if kept:
        values = {k: np.array([r[k] for r in kept]) for k in keys}
        estimates = {k: float(v.mean()) for k, v in values.items()}
        ses = {
            k: float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1
            else math.nan
            for k, v in values.items()
        }
        mse = {
            k: float(np.mean((values[k] - theory[k]) ** 2)) for k in theory
        }
    else:
        estimates = {k: math.nan for k in keys}
        ses, mse = {}, {}
    logger.debug("%s %s n=%d: %s", table_id, dist, n, estimates)
    return SimReport(
        config={
            "table": table_id, "loss": loss.name, "dist": dist, "n": n,
            "seed": seed,
        },
        estimates=estimates,
        reps=len(kept),
        standard_errors=ses,
        theoretical=theory,
        mse=mse,
        flags=tuple(flags),
    )


# ============================ REGRESSION =============================


def _regression_rows(
    reps: int,
    sizes: t.Sequence[int],
    seed: int,
    workers: t.Optional[int],
) -> t.List[SimReport]:
    out: t.List[SimReport] = []
    for ni, n in enumerate(sizes):
        X = recipe_covariates(n, engine.make_rng(seed, 9, ni))
        generator = engine.RegressionGenerator(X, RECIPE_BETA)
        rule = engine.RegressionRule(X)
        prefix = (9, ni)

        def n1_hat(rep: int) -> int:
            y = generator(engine.make_rng(seed, *prefix, rep, 0))
            return regression_optimal_split(design_stats(X, y)).n1_opt

        picks = np.array(_map(n1_hat, reps, workers), dtype=float)
        unit = design_stats(X, X @ RECIPE_BETA).edit(sigma2_hat=1.0)
        for f in TABLE_FRACTIONS:
            n1 = _fraction_n1(n, f)
            report = engine.empirical_cv_moments(
                generator, rule, n, n1, reps, REGRESSION_SPLITS, seed,
                workers, prefix, {"table": "T9", "fraction": f},
            )
            mom = random_cv_moments_normal(unit, n1)
            theory = {"v_hat": mom.variance, "c_hat": mom.covariance}
            estimates = dict(report.estimates)
            estimates["n1_opt_hat"] = float(picks.mean())
            mse = {"n1_opt_hat": float(np.mean((picks - half_up(n)) ** 2))}
            theory["n1_opt_hat"] = float(half_up(n))
            out.append(
                report.edit(
                    estimates=estimates, theoretical=theory, mse=mse
                )
            )
    return out


# ========================= RESAMPLING TABLE ==========================


def _resampling_rows(sizes: t.Sequence[int]) -> t.List[SimReport]:
    out: t.List[SimReport] = []
    for n in sizes:
        for f in TABLE_FRACTIONS:
            n1 = _fraction_n1(n, f)
            v = approx_v(n, n1, SQUARED_NORMAL)
            c = approx_c(n, n1, SQUARED_NORMAL)
            rho = c / v
            estimates: t.Dict[str, float] = {"n1": n1, "rho": rho}
            for J in (10, 15):
                estimates[f"re_{J}"] = cv_variance.resampling_effectiveness(
                    rho, J
                )
                estimates[f"rr_{J}"] = cv_variance.reduction_ratio(rho, J)
            out.append(
                SimReport(
                    config={"table": "T10", "n": n, "fraction": f},
                    estimates=estimates,
                    reps=0,
                )
            )
    return out


# ============================= LOGISTIC ==============================


def _logistic_rows(
    reps: int,
    sizes: t.Sequence[int],
    seed: int,
    workers: t.Optional[int],
    laws: t.Sequence[str] = ERROR_LAWS,
) -> t.List[SimReport]:
    out: t.List[SimReport] = []
    for law in laws:
        for n in sizes:
            targets = [half_up(n)] + [
                _fraction_n1(n, f) for f in TABLE_FRACTIONS[1:]
            ]
            picks: t.List[int] = []
            curves: t.List[t.List[float]] = []
            increasing = 0
            failed = 0
            for rep in range(reps):
                X, y = logistic_dataset(n, seed, law, rep)
                try:
                    curve = algorithm1_optimal_n1(X, y, workers=workers)
                except errors.CvPlanError as e:
                    logger.debug("logistic rep %d n=%d failed: %s", rep, n, e)
                    failed += 1
                    continue
                picks.append(curve.argmin_n1)
                values = [curve.v_at(n1) for n1 in targets]
                curves.append(values)
                increasing += bool(np.all(np.diff(values[1:]) > 0))
            flags = [f"failed_reps={failed}"] if failed else []
            estimates: t.Dict[str, float] = {}
            if picks:
                arr = np.array(picks, dtype=float)
                estimates["n1_opt_hat"] = float(arr.mean())
                estimates["n1_opt_var"] = float(arr.var())
                estimates["share_at_half"] = float(
                    np.mean(arr == half_up(n))
                )
                estimates["share_increasing"] = increasing / len(picks)
                means = np.mean(curves, axis=0)
                names = ["v_opt", "v_75", "v_80", "v_85", "v_90"]
                estimates.update(dict(zip(names, map(float, means))))
            logger.info(
                "T11 %s n=%d: n1_opt_hat=%s", law, n,
                estimates.get("n1_opt_hat"),
            )
            out.append(
                SimReport(
                    config={"table": "T11", "law": law, "n": n, "seed": seed},
                    estimates=estimates,
                    reps=len(picks),
                    flags=tuple(flags),
                )
            )
    return out


# ============================== DRIVER ===============================


def simulate_table(
    table_id: str,
    scale: t.Optional[float] = None,
    seed: t.Optional[int] = None,
    sizes: t.Optional[t.Sequence[int]] = None,
    dists: t.Optional[t.Sequence[str]] = None,
    workers: t.Optional[int] = None,
) -> t.List[SimReport]:
    """simulate_table(table_id, scale=None, seed=None, sizes=None,
    dists=None, workers=None) -> list[SimReport]

    Regenerates the estimator columns of a table.

    Parameters
    ----------
    table_id : str
        One of :data:`TABLES`.
    scale : float, optional
        Fraction of the published repetitions, in ``(0, 1]``. Defaults to
        ``.05`` for the sample-mean tables, ``.4`` for ``T9`` and ``1`` for
        ``T11``. Ignored by the closed form ``T10``.
    seed : int, optional
        Base seed.
    sizes : sequence of int, optional
        Sample sizes, the published ones by default.
    dists : sequence of str, optional
        Distribution labels for the sample-mean tables, ``T11`` reads them
        as error laws (``normal``, ``uniform``, ``t12``).
    workers : int, optional
        Worker threads.

    Raises
    ------
    InvalidConfig
        For an unknown table or fewer than 50 repetitions.
    """
    if table_id not in TABLES:
        raise errors.InvalidConfig(
            f"Unknown table {table_id!r}, expected one of {', '.join(TABLES)}."
        )
    if table_id == "T10":
        return _resampling_rows(sizes or DEFAULT_SIZES["T10"])
    reps = _reps(table_id, scale)
    seed = config.resolve_seed(seed)
    logger.info("simulating %s with %d reps, seed %d", table_id, reps, seed)
    if table_id == "T9":
        return _regression_rows(
            reps, sizes or DEFAULT_SIZES["T9"], seed, workers
        )
    if table_id == "T11":
        return _logistic_rows(
            reps, sizes or DEFAULT_SIZES["T11"], seed, workers,
            dists or ERROR_LAWS,
        )
    loss_name, table_dists = SAMPLE_MEAN_TABLES[table_id]
    loss = get_loss(loss_name)
    tid = int(table_id[1:])
    out: t.List[SimReport] = []
    for ni, n in enumerate(sizes or DEFAULT_SIZES["sample_mean"]):
        for di, dist in enumerate(dists or table_dists):
            out.append(
                sample_mean_row(
                    loss, dist, n, reps, seed, workers, (tid, ni, di),
                    table_id,
                )
            )
    return out


def simulate_sample_mean(
    loss: LossSpec,
    dist: str,
    n: int,
    n1: int,
    reps: int,
    splits: int = 2,
    seed: t.Optional[int] = None,
    workers: t.Optional[int] = None,
    prefix: t.Sequence[int] = (),
) -> SimReport:
    """simulate_sample_mean(loss, dist, n, n1, reps, splits=2, ...)
    Empirical ``v``, ``c`` and ``rho`` of the sample-mean rule next to their
    population approximations.
    """
    spec = distributions.parse_dist(dist)
    distributions.check_moments(spec, moments_required(loss))
    report = engine.empirical_cv_moments(
        engine.DistGenerator(spec, n),
        engine.SampleMeanRule(loss),
        n, n1, reps, splits, seed, workers, prefix,
        extra={"loss": loss.name, "dist": dist},
    )
    try:
        params = population_moment_params(loss, distributions.frozen(spec), n)
        model = sample_mean_moments(n, n1, params)
    except errors.CvPlanError as e:
        logger.debug("no theoretical moments for %s: %s", dist, e)
        return report
    return report.edit(
        theoretical={"v_hat": model.v, "c_hat": model.c, "rho_hat": model.rho}
    )


def empirical_curve(
    loss: LossSpec,
    dist: str,
    n: int,
    n1_values: t.Optional[t.Sequence[int]] = None,
    reps: int = 500,
    splits: int = 2,
    seed: t.Optional[int] = None,
    workers: t.Optional[int] = None,
) -> t.List[t.Dict[str, float]]:
    """empirical_curve(loss, dist, n, n1_values=None, reps=500, ...)
    Rows ``n1, v_hat, v_se, c_hat, c_se, v_theory, c_theory`` for plotting
    the simulated variance curve against its approximation. The default
    ``n1_values`` step through ``1 .. n-1`` in about twenty points.
    """
    if n1_values is None:
        step = max(1, (n - 1) // 20)
        n1_values = list(range(1, n, step))
    rows: t.List[t.Dict[str, float]] = []
    for i, n1 in enumerate(n1_values):
        report = simulate_sample_mean(
            loss, dist, n, n1, reps, splits, seed, workers, (i,),
        )
        rows.append(
            {
                "n1": n1,
                "v_hat": report.estimates["v_hat"],
                "v_se": report.standard_errors["v_hat"],
                "c_hat": report.estimates["c_hat"],
                "c_se": report.standard_errors["c_hat"],
                "v_theory": report.theoretical.get("v_hat", math.nan),
                "c_theory": report.theoretical.get("c_hat", math.nan),
            }
        )
    return rows


def to_frame(reports: t.Iterable[SimReport]) -> pd.DataFrame:
    """to_frame(reports) -> pandas.DataFrame
    One row per report as produced by :meth:`SimReport.row`."""
    return pd.DataFrame([report.row() for report in reports])


__all__ = [
    "TABLES",
    "SAMPLE_MEAN_TABLES",
    "PUBLISHED_REPS",
    "DESK_SCALE",
    "theoretical_plan",
    "sample_mean_row",
    "simulate_table",
    "simulate_sample_mean",
    "empirical_curve",
    "to_frame",
]
