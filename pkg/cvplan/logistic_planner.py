"""Optimal training size for 0/1 loss classification by logistic regression.

No closed form exists here, so the variance of a test-set error rate is
swept numerically over ``n1``:

1. fit the logistic model on the whole sample (:func:`fit_logistic`);
2. derive per-row probabilities ``p_i``, standardized scores ``zeta_i`` and
   pairwise score correlations ``rho_ii'`` (:func:`logistic_design`);
3. for every ``n1`` compute the misclassification moments ``e_i`` and
   ``e_ii'`` (:func:`classification_error_moments`) and the variance of the
   test-set average (:func:`var_mu_j_general`);
4. return the curve with its argmin (:func:`algorithm1_optimal_n1`).

The pair moments need the bivariate normal distribution function, computed
by :func:`bivariate_normal_cdf` from the one dimensional integral over the
correlation path with adaptive Gauss-Legendre panels.
"""

from __future__ import annotations
import logging
import math
import typing as t
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from . import config, errors
from .model import CurveEntry, LogisticDesign, VarianceCurve, half_up
from .montecarlo.engine import make_rng
from .regression_planner import recipe_errors

logger = logging.getLogger(__name__)

LOGISTIC_BETA = np.array([0.5, 0.5, 0.5, -0.5])
COVARIANCES = ("design", "fisher")
CLIP = 40.0

_NODES, _WEIGHTS = leggauss(20)
_MAX_DEPTH = 30


class LogisticFit(t.NamedTuple):
    beta_hat: np.ndarray
    sigma2_hat: float
    V_hat: np.ndarray
    iterations: int


# ========================== NORMAL CDFS ==============================


def std_normal_cdf(x: t.Any) -> t.Any:
    """std_normal_cdf(x) -> float | ndarray
    ``Phi(x)`` through the complementary error function, accurate in both
    tails.

    >>> from cvplan.logistic_planner import std_normal_cdf
    >>> float(std_normal_cdf(0.0)), round(float(std_normal_cdf(1.96)), 7)
    (0.5, 0.9750021)
    """
    value = 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(value) if np.ndim(value) == 0 else value


def _phi(x: np.ndarray) -> np.ndarray:
    return np.atleast_1d(std_normal_cdf(x))


def _gl(lo: np.ndarray, hi: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    theta = mid[:, None] + half[:, None] * _NODES[None, :]
    s = np.sin(theta)
    c2 = np.cos(theta) ** 2
    A, B = a[:, None], b[:, None]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.exp(-(A * A + B * B - 2 * A * B * s) / (2 * c2))
    f = np.nan_to_num(f, nan=0.0, posinf=0.0)
    return half * (f @ _WEIGHTS)


def _path_integral(a: np.ndarray, b: np.ndarray, top: np.ndarray) -> np.ndarray:
    """Integral of the correlation-path integrand from 0 to ``top`` for
    every element, refining panels until halves agree with the whole."""
    m = a.size
    total = np.zeros(m)
    tol = config.BVN_TOLERANCE * 2 * math.pi / 4
    width = np.abs(top)
    idx = np.nonzero(width > 0)[0]
    lo = np.zeros(idx.size)
    hi = top[idx].astype(float)
    depth = 0
    while idx.size:
        mid = (lo + hi) / 2
        pa, pb = a[idx], b[idx]
        whole = _gl(lo, hi, pa, pb)
        halves = _gl(lo, mid, pa, pb) + _gl(mid, hi, pa, pb)
        share = np.abs(hi - lo) / np.maximum(width[idx], 1e-300)
        done = np.abs(whole - halves) <= tol * share
        if depth >= _MAX_DEPTH:
            done[:] = True
        np.add.at(total, idx[done], halves[done])
        keep = ~done
        idx = np.concatenate([idx[keep], idx[keep]])
        lo, hi = (
            np.concatenate([lo[keep], mid[keep]]),
            np.concatenate([mid[keep], hi[keep]]),
        )
        depth += 1
    return total


def bivariate_normal_cdf(a: t.Any, b: t.Any, rho: t.Any) -> t.Any:
    """bivariate_normal_cdf(a, b, rho) -> float | ndarray
    ``P(X <= a, Y <= b)`` for standard normals with correlation ``rho``.
    Arguments broadcast; ``rho = +-1`` are handled exactly.

    >>> from cvplan.logistic_planner import bivariate_normal_cdf
    >>> round(bivariate_normal_cdf(0.0, 0.0, 0.0), 9)
    0.25
    >>> round(bivariate_normal_cdf(0.0, 0.0, 0.5), 7)
    0.3333333

    Raises
    ------
    InvalidRho
        If ``|rho| > 1``.
    """
    a, b, rho = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float),
        np.asarray(rho, dtype=float),
    )
    scalar = a.ndim == 0
    shape = a.shape
    a = np.clip(a.ravel(), -CLIP, CLIP)
    b = np.clip(b.ravel(), -CLIP, CLIP)
    rho = rho.ravel()
    if np.any(np.abs(rho) > 1) or np.any(np.isnan(rho)):
        raise errors.InvalidRho("Correlations must lie in [-1, 1].")
    pa, pb = std_normal_cdf(a), std_normal_cdf(b)
    pa, pb = np.atleast_1d(pa), np.atleast_1d(pb)
    out = pa * pb
    upper, lower = rho == 1, rho == -1
    inner = ~(upper | lower)
    if np.any(inner):
        top = np.arcsin(rho[inner])
        out[inner] += _path_integral(a[inner], b[inner], top) / (2 * math.pi)
    out[upper] = np.minimum(pa, pb)[upper]
    out[lower] = np.maximum(0.0, pa - _phi(-b))[lower]
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out.reshape(shape)


# ============================ FITTING ================================


def _loglik(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _check_xy(X: np.ndarray, y: np.ndarray) -> t.Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise errors.ShapeMismatch(
            f"Need an n x p design and n labels, got {X.shape} and {y.shape}."
        )
    if X.shape[0] <= X.shape[1]:
        raise errors.InvalidParams(f"Need n > p, got shape {X.shape}.")
    if not np.all((y == 0) | (y == 1)):
        raise errors.InvalidParams("Labels must be 0 or 1.")
    if y.min() == y.max():
        raise errors.NoVariation("Only one class is present.")
    return X, y


def fit_logistic(X: np.ndarray, y: np.ndarray, sigma2: float = 1.0) -> LogisticFit:
    """fit_logistic(X, y, sigma2=1.0) -> LogisticFit
    Maximum likelihood by iteratively reweighted least squares from
    ``beta = 0`` with step halving. ``V_hat`` is ``n (X'X)^-1``; the latent
    scale ``sigma2`` is fixed by the logit model and passed through.

    >>> import numpy as np
    >>> from cvplan.logistic_planner import fit_logistic
    >>> X = np.ones((8, 1))
    >>> fit = fit_logistic(X, np.array([1, 1, 1, 0, 1, 1, 1, 0]))
    >>> bool(abs(float(fit.beta_hat[0]) - np.log(3)) < 1e-8)
    True

    Raises
    ------
    NoVariation
        If ``y`` holds one class only.
    Separation
        If some coefficient vector classifies every row correctly, the
        coefficients run past :data:`cvplan.config.SEPARATION_NORM` or the
        iterations do not converge.
    SingularDesign
        If the weighted normal equations cannot be solved.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    beta = np.zeros(p)
    ll = _loglik(X, y, beta)
    for it in range(1, config.IRLS_MAX_ITER + 1):
        eta = X @ beta
        prob = special.expit(eta)
        score = X.T @ (y - prob)
        if np.max(np.abs(score)) < config.IRLS_TOLERANCE:
            break
        if np.all(np.where(y == 1, eta > 0, eta < 0)):
            raise errors.Separation(
                "The classes are linearly separable, no maximum likelihood "
                "estimate exists."
            )
        weights = prob * (1 - prob)
        info = X.T @ (X * weights[:, None])
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise errors.SingularDesign("X'WX is singular.") from None
        size = 1.0
        while size > 1e-10:
            new_ll = _loglik(X, y, beta + size * step)
            if new_ll >= ll - 1e-12:
                break
            size /= 2
        beta = beta + size * step
        ll = _loglik(X, y, beta)
        if np.linalg.norm(beta) > config.SEPARATION_NORM:
            raise errors.Separation(
                f"Coefficients diverge (norm {np.linalg.norm(beta):.3g})."
            )
        logger.debug("IRLS iteration %d: loglik=%.10g", it, ll)
    else:
        raise errors.Separation(
            f"IRLS did not converge in {config.IRLS_MAX_ITER} iterations."
        )
    V_hat = n * np.linalg.inv(X.T @ X)
    return LogisticFit(beta, float(sigma2), (V_hat + V_hat.T) / 2, it)


def logistic_design(
    X: np.ndarray,
    y: np.ndarray,
    covariance: str = "design",
    sigma2: float = 1.0,
) -> LogisticDesign:
    """logistic_design(X, y, covariance="design", sigma2=1.0) -> LogisticDesign
    Fits the model and computes ``p_i``, ``zeta_i`` and ``rho_ii'``.

    ``covariance="design"`` uses ``V = n (X'X)^-1``; ``"fisher"`` uses
    ``n (X'WX)^-1`` with the fitted weights.
    """
    if covariance not in COVARIANCES:
        raise errors.InvalidParams(
            f"Unknown covariance {covariance!r}, expected one of {COVARIANCES}."
        )
    if not sigma2 > 0:
        raise errors.InvalidParams(f"sigma2 must be > 0, got {sigma2}.")
    fit = fit_logistic(X, y, sigma2)
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    eta = X @ fit.beta_hat
    prob = special.expit(eta)
    if covariance == "design":
        V = fit.V_hat
    else:
        w = prob * (1 - prob)
        V = n * np.linalg.inv(X.T @ (X * w[:, None]))
        V = (V + V.T) / 2
    G = X @ V @ X.T
    G = (G + G.T) / 2
    q = np.diag(G).copy()
    if np.any(q <= 0):
        raise errors.SingularDesign("x_i' V x_i must be positive.")
    root = np.sqrt(q)
    R = np.clip(G / np.outer(root, root), -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    tiny = np.finfo(float).tiny
    return LogisticDesign(
        n=n,
        p=p,
        beta_hat=fit.beta_hat,
        sigma2_hat=fit.sigma2_hat,
        V_hat=V,
        p_i=np.clip(prob, tiny, np.nextafter(1.0, 0.0)),
        zeta_i=eta / (math.sqrt(fit.sigma2_hat) * root),
        rho_pair=R,
    )


# ============================ MOMENTS ================================


def classification_error_moments(
    design: LogisticDesign, n1: int
) -> t.Tuple[np.ndarray, np.ndarray]:
    """classification_error_moments(design, n1) -> (e_i, e_pair)
    Misclassification probabilities of single rows and of row pairs for a
    training set of size ``n1``. The diagonal of ``e_pair`` is ``e_i``.

    Raises
    ------
    OutOfRange
        If ``n1`` is outside ``[ceil(n/2), n - 1]``.
    """
    n = design.n
    if not half_up(n) <= n1 <= n - 1:
        raise errors.OutOfRange(
            f"n1={n1} outside [{half_up(n)}, {n - 1}] for n={n}."
        )
    s = math.sqrt(n1) * design.zeta_i
    prob = design.p_i
    e_i = _phi(-s) * prob + _phi(s) * (1 - prob)
    rows, cols = np.triu_indices(n, 1)
    si, sj = s[rows], s[cols]
    pi, pj = prob[rows], prob[cols]
    r = design.rho_pair[rows, cols]
    upper = (
        bivariate_normal_cdf(-si, -sj, r) * pi * pj
        + bivariate_normal_cdf(-si, sj, -r) * pi * (1 - pj)
        + bivariate_normal_cdf(si, -sj, -r) * (1 - pi) * pj
        + bivariate_normal_cdf(si, sj, r) * (1 - pi) * (1 - pj)
    )
    e_pair = np.empty((n, n))
    e_pair[rows, cols] = upper
    e_pair[cols, rows] = upper
    e_pair[np.diag_indices(n)] = e_i
    return e_i, e_pair


def var_mu_j_general(e_i: t.Any, e_pair: t.Any, n: int, n1: int) -> t.Any:
    """var_mu_j_general(e_i, e_pair, n, n1) -> float | Fraction
    Variance of a test-set average from first and second moments of the
    per-row losses. Object arrays of :class:`fractions.Fraction` stay
    exact.

    >>> from cvplan.logistic_planner import var_mu_j_general
    >>> import numpy as np
    >>> e = np.full(6, 0.5)
    >>> E = np.full((6, 6), 0.25)
    >>> np.fill_diagonal(E, 0.5)
    >>> var_mu_j_general(e, E, 6, 3)
    0.08333333333333333

    Raises
    ------
    ShapeMismatch
        If the shapes do not agree with ``n``.
    """
    e = np.asarray(e_i)
    E = np.asarray(e_pair)
    if e.shape != (n,) or E.shape != (n, n):
        raise errors.ShapeMismatch(
            f"Need e_i of length {n} and an {n} x {n} e_pair, got "
            f"{e.shape} and {E.shape}."
        )
    if not 1 <= n1 <= n - 1:
        raise errors.OutOfRange(f"Need 1 <= n1 <= n-1, got n={n}, n1={n1}.")
    n2 = n - n1
    diag_sum = sum(E[i, i] for i in range(n))
    sq_sum = sum(x * x for x in e)
    total = sum(e)
    diag = n * diag_sum - n2 * sq_sum
    pair_sum = (E.sum() - diag_sum) / 2
    prod_sum = (total * total - sq_sum) / 2
    off = 2 * (n * (n2 - 1) * pair_sum - (n - 1) * n2 * prod_sum) / (n - 1)
    return (diag + off) / (n * n * n2)


def variance_sweep(
    design: LogisticDesign, workers: t.Optional[int] = None
) -> VarianceCurve:
    """variance_sweep(design, workers=None) -> VarianceCurve
    Evaluates the variance for every ``n1`` in ``ceil(n/2) .. n-1``.
    Parallel runs return the same curve as serial ones.
    """
    n = design.n

    def one(n1: int) -> CurveEntry:
        e_i, e_pair = classification_error_moments(design, n1)
        v = float(var_mu_j_general(e_i, e_pair, n, n1))
        return CurveEntry(n1=n1, e_i=e_i, v=v, mean=float(e_i.mean()))

    grid = list(range(half_up(n), n))
    pool = config.resolve_workers(workers)
    if pool == 1:
        entries = [one(n1) for n1 in grid]
    else:
        with ThreadPoolExecutor(max_workers=pool) as ex:
            entries = list(ex.map(one, grid))
    best = min(entries, key=lambda entry: entry.v)
    return VarianceCurve(entries=tuple(entries), argmin_n1=best.n1)


def algorithm1_optimal_n1(
    X: np.ndarray,
    y: np.ndarray,
    covariance: str = "design",
    sigma2: float = 1.0,
    workers: t.Optional[int] = None,
) -> VarianceCurve:
    """algorithm1_optimal_n1(X, y, covariance="design", sigma2=1.0,
    workers=None) -> VarianceCurve

    Fits, derives the design quantities and sweeps the training size.
    ``argmin_n1`` of the result is the recommended training size.
    """
    design = logistic_design(X, y, covariance, sigma2)
    curve = variance_sweep(design, workers)
    logger.info("logistic sweep n=%d: n1_opt=%d", design.n, curve.argmin_n1)
    return curve


# ============================= RECIPES ===============================


def logistic_covariates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Design ``[1, X1, X2, X3]`` with ``X1 ~ Bernoulli(.6)``,
    ``X2 ~ Poisson(2)`` and ``X3`` uniform on ``{0, ..., 4}``."""
    return np.column_stack(
        [
            np.ones(n),
            rng.binomial(1, 0.6, n),
            rng.poisson(2.0, n),
            rng.integers(0, 5, n),
        ]
    ).astype(float)


def logistic_dataset(
    n: int,
    seed: t.Optional[int] = None,
    law: str = "normal",
    rep: int = 0,
    beta: np.ndarray = LOGISTIC_BETA,
) -> t.Tuple[np.ndarray, np.ndarray]:
    """logistic_dataset(n, seed=None, law="normal", rep=0) -> (X, y)
    Labels ``1{x'beta + error > 0}``. The covariates depend on ``(seed,
    n)`` only, so every ``rep`` shares one design.
    """
    X = logistic_covariates(n, make_rng(seed, 11, n, 0))
    rng = make_rng(seed, 11, n, 1 + rep)
    latent = X @ beta + recipe_errors(n, rng, law)
    return X, (latent > 0).astype(float)


__all__ = [
    "LOGISTIC_BETA",
    "LogisticFit",
    "std_normal_cdf",
    "bivariate_normal_cdf",
    "fit_logistic",
    "logistic_design",
    "classification_error_moments",
    "var_mu_j_general",
    "variance_sweep",
    "algorithm1_optimal_n1",
    "logistic_covariates",
    "logistic_dataset",
]
