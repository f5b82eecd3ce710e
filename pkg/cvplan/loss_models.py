"""Loss families and their moment parameters.

A loss is evaluated at an estimate ``mu`` of the mean and a data point
``x``. Besides the value every family provides the first two derivatives in
``mu``; these drive the moment parameters ``alpha, beta, gamma, delta``.

Families
--------
squared
    ``(x - mu)^2``, the q-class loss generated by ``q(t) = -t^2``.
qclass
    Efron's ``q(mu) + q'(mu) (x - mu) - q(x)`` for a concave generator ``q``
    (:class:`QGenerator`). The built in ``qsqrt`` uses ``-sqrt(1 + t^2)``.
absapprox
    ``sqrt((x - mu)^2 + d)``, a smooth absolute error; ``d`` defaults to
    ``1/n`` when the sample size is known.
modsq
    ``(x - mu)^2 + mu^2``.
doublesq
    ``(x^2 - mu^2)^2``.

>>> from cvplan.loss_models import LOSSES, loss_value
>>> loss_value(LOSSES["squared"], 1.0, 3.0)
4.0
>>> loss_value(LOSSES["modsq"], 2.0, 2.0)
4.0
"""

from __future__ import annotations
import logging
import math
import typing as t
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from . import errors
from .model import MomentParams, Record

logger = logging.getLogger(__name__)

ArrayLike = t.Union[float, np.ndarray]
Fn = t.Callable[[ArrayLike], ArrayLike]

FAMILIES = ("squared", "qclass", "absapprox", "modsq", "doublesq")


# ============================ GENERATORS =============================


@dataclass(frozen=True)
class QGenerator:
    """QGenerator(name, q, dq, d2q, d3q, domain=(-inf, inf), moments=4)
    A concave q-class generator with its first three derivatives. ``moments``
    is the number of finite data moments the resulting loss needs.
    """

    name: str
    q: Fn
    dq: Fn
    d2q: Fn
    d3q: Fn
    domain: t.Tuple[float, float] = (-math.inf, math.inf)
    moments: int = 4

    def inside(self, x: ArrayLike) -> bool:
        x = np.asarray(x)
        lo, hi = self.domain
        return bool(np.all((x >= lo) & (x <= hi)))


def _zero(x: ArrayLike) -> ArrayLike:
    return np.zeros_like(np.asarray(x, dtype=float))


QUADRATIC = QGenerator(
    "quadratic",
    q=lambda x: -np.square(x),
    dq=lambda x: -2.0 * np.asarray(x),
    d2q=lambda x: np.full_like(np.asarray(x, dtype=float), -2.0),
    d3q=_zero,
)

EFRON_SQRT = QGenerator(
    "sqrt",
    q=lambda x: -np.sqrt(1.0 + np.square(x)),
    dq=lambda x: -np.asarray(x) / np.sqrt(1.0 + np.square(x)),
    d2q=lambda x: -((1.0 + np.square(x)) ** -1.5),
    d3q=lambda x: 3.0 * np.asarray(x) * (1.0 + np.square(x)) ** -2.5,
    moments=2,
)


# ============================== SPECS ================================


@dataclass(frozen=True, eq=False, repr=False)
class LossSpec(Record):
    """LossSpec(family, d=None, generator=None)
    A loss family. ``generator`` is required for ``qclass``; ``d`` only
    applies to ``absapprox``.
    """

    family: str
    d: t.Optional[float] = None
    generator: t.Optional[QGenerator] = None

    _derived = ("name",)

    @property
    def name(self) -> str:
        if self.family == "qclass" and self.generator is not None:
            return f"qclass[{self.generator.name}]"
        return self.family

    @property
    def q(self) -> t.Optional[QGenerator]:
        """Generator of a q-class loss, ``None`` for the other families."""
        if self.family == "squared":
            return QUADRATIC
        if self.family == "qclass":
            return self.generator
        return None

    @classmethod
    def custom_q(
        cls,
        q: Fn,
        dq: Fn,
        d2q: Fn,
        d3q: Fn,
        name: str = "custom",
        domain: t.Tuple[float, float] = (-math.inf, math.inf),
        moments: int = 4,
    ) -> "LossSpec":
        """Builds a q-class loss from user supplied derivatives."""
        gen = QGenerator(name, q, dq, d2q, d3q, domain, moments)
        return cls("qclass", generator=gen)

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise errors.InvalidParams(
                f"Unknown loss family {self.family!r}, expected one of "
                f"{', '.join(FAMILIES)}."
            )
        if self.family == "qclass" and self.generator is None:
            raise errors.InvalidParams("A qclass loss needs a generator.")
        if self.d is not None and not self.d > 0:
            raise errors.InvalidParams(f"d must be > 0, got {self.d}.")


LOSSES: t.Dict[str, LossSpec] = {
    "squared": LossSpec("squared"),
    "qsqrt": LossSpec("qclass", generator=EFRON_SQRT),
    "absapprox": LossSpec("absapprox"),
    "modsq": LossSpec("modsq"),
    "doublesq": LossSpec("doublesq"),
}


def get_loss(name: str) -> LossSpec:
    try:
        return LOSSES[name]
    except KeyError:
        raise errors.InvalidParams(
            f"Unknown loss {name!r}, expected one of {', '.join(LOSSES)}."
        ) from None


def moments_required(spec: LossSpec) -> int:
    """Finite data moments the loss needs for its moment parameters."""
    if spec.q is not None:
        return spec.q.moments
    return {"absapprox": 2, "modsq": 4, "doublesq": 8}[spec.family]


def _d(spec: LossSpec, d: t.Optional[float], n: t.Optional[int]) -> float:
    if d is None:
        d = spec.d
    if d is None and n:
        d = 1.0 / n
    if d is None:
        raise errors.InvalidParams(
            "absapprox needs d or a sample size to default it to 1/n."
        )
    return d


# ============================ EVALUATION =============================


def _check_domain(spec: LossSpec, *values: ArrayLike):
    gen = spec.q
    if gen is None:
        return
    for v in values:
        if not gen.inside(v):
            raise errors.DomainError(
                f"Values outside the domain {gen.domain} of generator "
                f"{gen.name!r}."
            )


def loss_derivatives(
    spec: LossSpec,
    mu: ArrayLike,
    x: ArrayLike,
    d: t.Optional[float] = None,
) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """loss_derivatives(spec, mu, x, d=None) -> (L, dL, d2L)
    Loss and its first two derivatives in ``mu``. ``mu`` and ``x``
    broadcast against each other.

    >>> import numpy as np
    >>> from cvplan.loss_models import LOSSES, loss_derivatives
    >>> L, dL, d2L = loss_derivatives(LOSSES["doublesq"], 1.0, np.array([2.0]))
    >>> float(L[0]), float(dL[0]), float(d2L[0])
    (9.0, -12.0, -4.0)

    Raises
    ------
    DomainError
        If a q-class loss is evaluated outside its generator's domain.
    """
    mu = np.asarray(mu, dtype=float)
    x = np.asarray(x, dtype=float)
    gen = spec.q
    if gen is not None:
        _check_domain(spec, mu, x)
        diff = x - mu
        d2 = gen.d2q(mu)
        value = gen.q(mu) + gen.dq(mu) * diff - gen.q(x)
        return value, d2 * diff, gen.d3q(mu) * diff - d2
    if spec.family == "absapprox":
        d = _d(spec, d, None)
        root = np.sqrt(np.square(x - mu) + d)
        return root, (mu - x) / root, d / root**3
    if spec.family == "modsq":
        value = np.square(x - mu) + np.square(mu)
        return value, 4.0 * mu - 2.0 * x, np.full(value.shape, 4.0)
    # doublesq
    gap = np.square(x) - np.square(mu)
    return np.square(gap), -4.0 * mu * gap, -4.0 * gap + 8.0 * np.square(mu)


def loss_value(
    spec: LossSpec, mu_hat: ArrayLike, y: ArrayLike, d: t.Optional[float] = None
) -> t.Any:
    """loss_value(spec, mu_hat, y, d=None) -> float | ndarray
    Loss of the estimate ``mu_hat`` at the point ``y``.
    """
    value = loss_derivatives(spec, mu_hat, y, d)[0]
    return float(value) if value.ndim == 0 else value


# ============================ ESTIMATION =============================


def _finish(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    sigma2: float,
    mu: float,
    n: t.Optional[int],
) -> MomentParams:
    if not beta > 0:
        raise errors.DegenerateSample(
            f"The loss has no variance on this sample (beta={beta})."
        )
    return MomentParams(
        alpha=float(max(alpha, 0.0)),
        beta=float(beta),
        gamma=float(max(gamma, 0.0)),
        delta=float(delta),
        sigma2=float(sigma2),
        mu=float(mu),
        n=n,
    )


def qclass_population_params(
    q: QGenerator,
    mu: float,
    sigma2: float,
    var_q: float,
    cov_x_q: float,
    n: t.Optional[int] = None,
) -> MomentParams:
    """qclass_population_params(q, mu, sigma2, var_q, cov_x_q) -> MomentParams
    Moment parameters of a q-class loss from ``Var q(X)`` and
    ``Cov(X, q(X))``. ``alpha`` is zero for every q-class loss.

    >>> from cvplan.loss_models import qclass_population_params, QUADRATIC
    >>> p = qclass_population_params(QUADRATIC, 0.0, 1.0, 2.0, 0.0)
    >>> p.alpha, p.beta, p.gamma, p.delta
    (0.0, 2.0, 4.0, 0.0)
    """
    d1 = float(q.dq(mu))
    d2 = float(q.d2q(mu))
    d3 = float(q.d3q(mu))
    beta = d1 * d1 * sigma2 + var_q - 2.0 * d1 * cov_x_q
    gamma = d2 * d2 * sigma2 * sigma2
    delta = d1 * d3 * sigma2 * sigma2 - d3 * cov_x_q * sigma2
    return _finish(0.0, beta, gamma, delta, sigma2, mu, n)


def estimate_moment_params(
    spec: LossSpec, sample: t.Sequence[float], d: t.Optional[float] = None
) -> MomentParams:
    """estimate_moment_params(spec, sample, d=None) -> MomentParams
    Plug-in estimates of ``alpha, beta, gamma, delta`` with unbiased
    (``n - 1``) variances and covariances.

    Q-class losses use the closed forms in ``Var q(X)`` and ``Cov(X, q(X))``
    so that ``alpha`` is exactly zero. The other families average their
    analytic derivatives at the sample mean.

    >>> import numpy as np
    >>> from cvplan.loss_models import LOSSES, estimate_moment_params
    >>> p = estimate_moment_params(LOSSES["squared"], np.arange(8.0))
    >>> p.alpha == 0, p.delta == 0, p.n
    (True, True, 8)

    Parameters
    ----------
    spec : LossSpec
        The loss.
    sample : sequence of float
        One dimensional data, at least 4 points.
    d : float, optional
        Smoothing of ``absapprox``; defaults to ``spec.d`` then ``1/n``.

    Raises
    ------
    InvalidParams
        On fewer than 4 points or a non finite sample.
    DegenerateSample
        If the sample is constant.
    DomainError
        If a q-class generator is not concave on the sample or the sample
        leaves its domain.
    """
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if n < 4:
        raise errors.InvalidParams(f"Need at least 4 observations, got {n}.")
    if not np.all(np.isfinite(x)):
        raise errors.InvalidParams("The sample contains non finite values.")
    mu = float(x.mean())
    sigma2 = float(x.var(ddof=1))
    if sigma2 == 0:
        raise errors.DegenerateSample("The sample is constant.")
    gen = spec.q
    if gen is not None:
        _check_domain(spec, x, mu)
        if np.any(np.asarray(gen.d2q(x)) > 0) or gen.d2q(mu) > 0:
            raise errors.DomainError(
                f"Generator {gen.name!r} is not concave on the sample."
            )
        qx = np.asarray(gen.q(x), dtype=float)
        var_q = float(qx.var(ddof=1))
        cov_x_q = float(np.cov(x, qx, ddof=1)[0, 1])
        return qclass_population_params(gen, mu, sigma2, var_q, cov_x_q, n)
    value, d1, d2 = loss_derivatives(spec, mu, x, _d(spec, d, n))
    alpha = sigma2 * float(d1.mean()) ** 2
    beta = float(value.var(ddof=1))
    gamma = sigma2 * float(d1.var(ddof=1))
    delta = sigma2 * float(np.cov(value, d2, ddof=1)[0, 1])
    return _finish(alpha, beta, gamma, delta, sigma2, mu, n)


# ============================ POPULATION =============================


def _polynomials(
    spec: LossSpec, mu: float
) -> t.Optional[t.Tuple[Polynomial, Polynomial, Polynomial]]:
    # families whose loss is a polynomial in x
    if spec.family == "modsq":
        return (
            Polynomial([2 * mu * mu, -2 * mu, 1.0]),
            Polynomial([4 * mu, -2.0]),
            Polynomial([4.0]),
        )
    if spec.family == "doublesq":
        m2 = mu * mu
        return (
            Polynomial([m2 * m2, 0.0, -2 * m2, 0.0, 1.0]),
            Polynomial([4 * mu * m2, 0.0, -4 * mu]),
            Polynomial([12 * m2, 0.0, -4.0]),
        )
    return None


def _poly_expect(poly: Polynomial, raw: t.Sequence[float]) -> float:
    return float(sum(c * raw[k] for k, c in enumerate(poly.coef)))


def population_moment_params(
    spec: LossSpec,
    dist: t.Any,
    n: t.Optional[int] = None,
    d: t.Optional[float] = None,
) -> MomentParams:
    """population_moment_params(spec, dist, n=None, d=None) -> MomentParams
    Moment parameters of a loss under a frozen :mod:`scipy.stats`
    distribution. Polynomial losses use the raw moments of ``dist``, the
    others numerical expectations.

    >>> from scipy import stats
    >>> from cvplan.loss_models import LOSSES, population_moment_params
    >>> p = population_moment_params(LOSSES["modsq"], stats.expon())
    >>> round(p.alpha, 6), round(p.beta, 6)
    (4.0, 8.0)

    Raises
    ------
    DomainError
        If ``dist`` lacks the moments the loss needs or an expectation does
        not come out finite.
    """
    need = moments_required(spec)
    raw = [1.0] + [float(dist.moment(k)) for k in range(1, need + 1)]
    if not all(math.isfinite(m) for m in raw):
        raise errors.DomainError(
            f"{spec.name} needs {need} finite moments of the distribution."
        )
    mu = float(dist.mean())
    sigma2 = float(dist.var())
    gen = spec.q
    if gen is not None:
        if gen is QUADRATIC:
            e_q, e_q2, e_xq = -raw[2], raw[4], -raw[3]
        else:
            e_q = float(dist.expect(gen.q))
            e_q2 = float(dist.expect(lambda x: gen.q(x) ** 2))
            e_xq = float(dist.expect(lambda x: x * gen.q(x)))
        var_q = e_q2 - e_q * e_q
        cov = e_xq - mu * e_q
        if not all(map(math.isfinite, (var_q, cov))):
            raise errors.DomainError(f"Non finite moments for {spec.name}.")
        return qclass_population_params(gen, mu, sigma2, var_q, cov, n)
    polys = _polynomials(spec, mu)
    if polys is not None:
        L, d1, d2 = polys
        e_L = _poly_expect(L, raw)
        e_d1 = _poly_expect(d1, raw)
        var_L = _poly_expect(L * L, raw) - e_L * e_L
        var_d1 = _poly_expect(d1 * d1, raw) - e_d1 * e_d1
        cov_L_d2 = _poly_expect(L * d2, raw) - e_L * _poly_expect(d2, raw)
    else:
        dd = _d(spec, d, n)

        def expect(fn: t.Callable[[np.ndarray], t.Any]) -> float:
            def integrand(x: np.ndarray) -> t.Any:
                return fn(loss_derivatives(spec, mu, x, dd))

            return float(dist.expect(integrand))

        e_L = expect(lambda r: r[0])
        e_d1 = expect(lambda r: r[1])
        var_L = expect(lambda r: r[0] ** 2) - e_L * e_L
        var_d1 = expect(lambda r: r[1] ** 2) - e_d1 * e_d1
        cov_L_d2 = expect(lambda r: r[0] * r[2]) - e_L * expect(lambda r: r[2])
    values = (e_d1, var_L, var_d1, cov_L_d2)
    if not all(map(math.isfinite, values)):
        raise errors.DomainError(f"Non finite moments for {spec.name}.")
    return _finish(
        sigma2 * e_d1 * e_d1,
        var_L,
        sigma2 * var_d1,
        sigma2 * cov_L_d2,
        sigma2,
        mu,
        n,
    )


__all__ = [
    "FAMILIES",
    "QGenerator",
    "QUADRATIC",
    "EFRON_SQRT",
    "LossSpec",
    "LOSSES",
    "get_loss",
    "moments_required",
    "loss_derivatives",
    "loss_value",
    "estimate_moment_params",
    "qclass_population_params",
    "population_moment_params",
]
