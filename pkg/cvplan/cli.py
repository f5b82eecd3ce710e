"""Command line entry point.

Usage::

    cvplan plan-resamples --rho 0.3 --pi 0.9
    cvplan plan-split --theoretical 0,2,4,0 --n 100 --loss squared
    cvplan plan-folds --data sample.csv --column x --loss modsq
    cvplan regression-plan --data data.csv --response y
    cvplan logistic-plan --data data.csv --response y --curve-csv curve.csv
    cvplan simulate --table T4 --scale 0.05 --seed 42 --out t4.csv
    cvplan simulate --loss squared --dist "N(0,1)" --n 100 --n1 50 --reps 500
    cvplan oracle-check --n 6 --n1 3

Every command accepts ``--format json|text|csv``, ``--out``, ``--seed``,
``--workers`` and ``--verbose``. The resolved configuration is echoed ahead
of the result. Exit status is 0 on success, 1 on invalid input (or a failed
oracle check) and 2 on numerical failure.
"""

from __future__ import annotations
import argparse
import logging
import sys
import typing as t

from . import (
    __version__,
    config,
    converter,
    cv_variance,
    errors,
    index_combinatorics,
    logistic_planner,
    loss_models,
    printer,
    regression_planner,
    split_optimizer,
)
from .model import FORMATS, RunConfig, SplitGeometry
from .montecarlo import tables

logger = logging.getLogger(__name__)

Handler = t.Callable[[argparse.Namespace], t.Tuple[t.Any, int]]


def _floats(text: str) -> t.List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}")


def _ints(text: str) -> t.List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def _names(text: str) -> t.List[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# ============================ COMMANDS ===============================


def _loss(args: argparse.Namespace) -> loss_models.LossSpec:
    return loss_models.get_loss(args.loss)


def _params(args: argparse.Namespace):
    """Moment parameters and sample size from ``--theoretical`` or
    ``--data``."""
    if args.theoretical is not None:
        params = converter.parse_params(args.theoretical)
        n = args.n if args.n is not None else params.n
        if n is None:
            raise errors.InvalidParams("Give --n or a fifth --theoretical entry.")
        return params, n
    if args.data is None:
        raise errors.InvalidParams("Give --theoretical or --data.")
    frame = converter.read_table(args.data)
    x = converter.sample_column(frame, args.column)
    params = loss_models.estimate_moment_params(_loss(args), x, args.d)
    return params, x.size


def cmd_plan_resamples(args: argparse.Namespace):
    if args.pi is not None:
        plan = cv_variance.j_for_effectiveness(args.rho, args.pi)
    else:
        plan = cv_variance.j_for_reduction(args.rho, args.r)
    result = plan.as_dict()
    if args.table:
        result["table"] = [cv_variance.resampling_table(args.rho)]
    return result, 0


def cmd_plan_split(args: argparse.Namespace):
    params, n = _params(args)
    plan = split_optimizer.optimal_n1(n, params)
    result = split_optimizer.split_summary(plan)
    result["params"] = params.as_dict()
    if args.curve_csv:
        _write_csv(args.curve_csv, split_optimizer.variance_curve(params, n))
    return result, 0


def cmd_plan_folds(args: argparse.Namespace):
    params, n = _params(args)
    plan = split_optimizer.optimal_k(n, params)
    curve = [
        {"k": k, "variance": var, "relative_efficiency": re}
        for k, var, re in plan.curve
    ]
    result = {
        "n": n,
        "k_opt": plan.k_opt,
        "variance": plan.variance,
        "params": params.as_dict(),
        "curve": curve,
    }
    return result, 0


def cmd_regression_plan(args: argparse.Namespace):
    frame = converter.read_table(args.data)
    X, y = converter.design_matrix(
        frame, args.response, args.covariates, not args.no_intercept
    )
    stats = regression_planner.design_stats(X, y)
    plan = regression_planner.regression_optimal_split(
        stats, normal=not args.nonnormal
    )
    result = {
        "n": stats.n,
        "p": stats.p,
        "theta": stats.theta,
        "sigma2": stats.sigma2_hat,
        "mu4": stats.mu4_hat,
        "n1_opt": plan.n1_opt,
        "k_opt": plan.k_opt,
        "variance_curve": [{"n1": a, "var": b} for a, b in plan.curve],
        "table": regression_planner.regression_table(stats),
    }
    if args.curve_csv:
        _write_csv(args.curve_csv, result["variance_curve"])
    return result, 0


def cmd_logistic_plan(args: argparse.Namespace):
    frame = converter.read_table(args.data)
    X, y = converter.design_matrix(
        frame, args.response, args.covariates, not args.no_intercept
    )
    curve = logistic_planner.algorithm1_optimal_n1(
        X, y, args.covariance, args.sigma2, args.workers
    )
    rows = [
        {"n1": e.n1, "v": e.v, "mean_error": e.mean} for e in curve.entries
    ]
    if args.curve_csv:
        _write_csv(args.curve_csv, rows)
    return {"n": X.shape[0], "n1_opt": curve.argmin_n1, "curve": rows}, 0


def cmd_simulate(args: argparse.Namespace):
    if args.table is not None:
        reports = tables.simulate_table(
            args.table, args.scale, args.seed, args.sizes, args.dists,
            args.workers,
        )
        return [r.row() for r in reports], 0
    missing = [
        flag for flag, value in (
            ("--loss", args.loss), ("--dist", args.dist), ("--n", args.n),
        )
        if value is None
    ]
    if missing:
        raise errors.InvalidConfig(
            f"Give --table, or {', '.join(missing)} for a free-form run."
        )
    loss = loss_models.get_loss(args.loss)
    if args.curve:
        rows = tables.empirical_curve(
            loss, args.dist, args.n, args.n1_values, args.reps, args.splits,
            args.seed, args.workers,
        )
        return rows, 0
    if args.n1 is None:
        raise errors.InvalidConfig("Give --n1 or --curve.")
    SplitGeometry(args.n, args.n1)
    report = tables.simulate_sample_mean(
        loss, args.dist, args.n, args.n1, args.reps, args.splits, args.seed,
        args.workers,
    )
    return report.row(), 0


def cmd_oracle_check(args: argparse.Namespace):
    geom = SplitGeometry(args.n, args.n1)
    rows = index_combinatorics.oracle_table(geom, args.tag)
    failed = any(row["status"] == "FAIL" for row in rows)
    if failed:
        logger.error("closed forms and enumeration disagree")
    return rows, 1 if failed else 0


def _write_csv(path: str, rows: t.Sequence[t.Mapping[str, t.Any]]):
    with open(path, "w", newline="") as w:
        printer.format(rows, w, "csv")
    logger.info("curve written to %s", path)


# ============================= PARSER ================================


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=FORMATS, default="json", help="output format"
    )
    common.add_argument("--out", help="output file, stdout by default")
    common.add_argument(
        "--seed", type=int, help="base seed, CVPLAN_SEED by default"
    )
    common.add_argument(
        "--workers", type=int, help="worker threads, CVPLAN_WORKERS by default"
    )
    common.add_argument(
        "-v", "--verbose", action="store_true", help="log progress to stderr"
    )
    return common


def _moment_source(p: argparse.ArgumentParser):
    p.add_argument(
        "--theoretical", metavar="A,B,G,D[,N]",
        help="moment parameters alpha,beta,gamma,delta",
    )
    p.add_argument("--n", type=int, help="sample size for --theoretical")
    p.add_argument("--data", help="csv holding the sample")
    p.add_argument("--column", help="sample column of --data")
    p.add_argument(
        "--loss", choices=sorted(loss_models.LOSSES), default="squared"
    )
    p.add_argument("--d", type=float, help="smoothing of absapprox")


def _design_source(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True, help="csv with a header row")
    p.add_argument("--response", required=True, help="response column")
    p.add_argument(
        "--covariates", type=_names, help="covariate columns, all by default"
    )
    p.add_argument(
        "--no-intercept", action="store_true", help="do not add a constant"
    )
    p.add_argument("--curve-csv", help="also write the variance curve here")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="cvplan",
        description="Plan cross validation experiments by minimizing the "
        "variance of the estimated generalization error.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "plan-resamples", parents=[common], help="minimum number of splits J"
    )
    p.add_argument("--rho", type=float, required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--pi", type=float, help="resampling effectiveness")
    target.add_argument("--r", type=float, help="reduction ratio")
    p.add_argument(
        "--table", action="store_true", help="add J for the usual targets"
    )
    p.set_defaults(handler=cmd_plan_resamples)

    p = sub.add_parser(
        "plan-split", parents=[common], help="optimal training size"
    )
    _moment_source(p)
    p.add_argument("--curve-csv", help="also write v, c and rho for each n1")
    p.set_defaults(handler=cmd_plan_split)

    p = sub.add_parser("plan-folds", parents=[common], help="optimal k")
    _moment_source(p)
    p.set_defaults(handler=cmd_plan_folds)

    p = sub.add_parser(
        "regression-plan", parents=[common], help="least squares planner"
    )
    _design_source(p)
    p.add_argument(
        "--nonnormal", action="store_true",
        help="use the fourth moment of the residuals",
    )
    p.set_defaults(handler=cmd_regression_plan)

    p = sub.add_parser(
        "logistic-plan", parents=[common], help="0/1 loss logistic planner"
    )
    _design_source(p)
    p.add_argument(
        "--covariance", choices=logistic_planner.COVARIANCES,
        default="design",
    )
    p.add_argument("--sigma2", type=float, default=1.0)
    p.set_defaults(handler=cmd_logistic_plan)

    p = sub.add_parser(
        "simulate", parents=[common], help="Monte Carlo tables and runs"
    )
    p.add_argument("--table", choices=tables.TABLES)
    p.add_argument("--scale", type=float, help="fraction of published reps")
    p.add_argument("--sizes", type=_ints, help="sample sizes of --table")
    p.add_argument("--dists", type=_names, help="rows of --table")
    p.add_argument("--loss", choices=sorted(loss_models.LOSSES))
    p.add_argument("--dist", help='distribution label, e.g. "N(0,1)"')
    p.add_argument("--n", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--splits", type=int, default=2)
    p.add_argument(
        "--curve", action="store_true", help="empirical curve over n1"
    )
    p.add_argument("--n1-values", type=_ints, help="n1 grid of --curve")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser(
        "oracle-check", parents=[common],
        help="closed form moments against enumeration",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--tag", action="append", help="restrict to these tags")
    p.set_defaults(handler=cmd_oracle_check)
    return parser


# ============================== RUN ==================================


def _run_config(args: argparse.Namespace) -> RunConfig:
    skip = {"command", "handler", "format", "out", "seed", "data", "verbose"}
    options = {k: v for k, v in vars(args).items() if k not in skip}
    options["workers"] = config.resolve_workers(args.workers)
    return RunConfig(
        command=args.command,
        input=getattr(args, "data", None),
        output=args.out,
        format=args.format,
        seed=config.resolve_seed(args.seed),
        options=options,
    )


def run(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """run(argv=None) -> int
    Parses ``argv``, dispatches and writes the result. Returns the exit
    status instead of exiting.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        run_config = _run_config(args)
        args.seed = run_config.seed
        result, status = args.handler(args)
        header = run_config.as_dict()
        if args.out:
            with open(args.out, "w", newline="") as w:
                printer.format(result, w, args.format, header)
        else:
            printer.format(result, sys.stdout, args.format, header)
    except errors.CvPlanError as e:
        sys.stderr.write(errors.describe(e) + "\n")
        return errors.exit_code(e)
    except OSError as e:
        sys.stderr.write(f"{e.__class__.__name__}: {e}\n")
        return 1
    return status


def main():
    sys.exit(run())


__all__ = ["build_parser", "run", "main"]
