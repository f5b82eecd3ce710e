"""Record types passed between the planners, the simulator and the command
line. All of them are immutable and validate their invariants on
construction (see :class:`~cvplan.model.abc.Record`).
"""

from __future__ import annotations
import math
import typing as t
from dataclasses import dataclass, field

import numpy as np

from .. import errors
from . import abc
from .abc import Record

Curve = t.Tuple[t.Tuple[int, float], ...]

MOMENT_TAGS: t.Tuple[str, ...] = (
    "a", "b1", "b2", "c", "d_mean", "d_var", "e",
    "f", "g", "h", "i1", "i2", "j", "k",
)
CRITERIA = ("effectiveness", "reduction")
METHODS = ("ClosedForm", "GridArgmin")
DIST_FAMILIES = (
    "normal", "uniform", "student_t", "exponential", "lognormal", "pareto",
)
FORMATS = ("json", "text", "csv")


def _is_int(value: t.Any) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _finite(*values: t.Any) -> bool:
    return all(math.isfinite(float(v)) for v in values)


def half_up(n: int) -> int:
    """Smallest admissible training size, ``ceil(n/2)``."""
    return (n + 1) // 2


# ============================ SPLITS =================================


@dataclass(frozen=True, eq=False, repr=False)
class SplitGeometry(Record):
    """SplitGeometry(n, n1)
    Sizes of one random split: ``n1`` training and ``n2 = n - n1`` test
    observations, with ``1 <= n2 <= n1 < n``.

    >>> from cvplan.model import SplitGeometry
    >>> SplitGeometry(10, 6).n2
    4
    >>> SplitGeometry(10, 4)
    Traceback (most recent call last):
    ...
    cvplan.errors.InvalidGeometry: Need 1 <= n2 <= n1 < n, got n=10, n1=4.
    """

    n: int
    n1: int

    _derived = ("n2",)

    @property
    def n2(self) -> int:
        return self.n - self.n1

    def validate(self) -> None:
        if not (_is_int(self.n) and _is_int(self.n1)):
            raise errors.InvalidGeometry(
                f"Sizes must be integers, got n={self.n!r}, n1={self.n1!r}."
            )
        if not 1 <= self.n2 <= self.n1 < self.n:
            raise errors.InvalidGeometry(
                f"Need 1 <= n2 <= n1 < n, got n={self.n}, n1={self.n1}."
            )


@dataclass(frozen=True, eq=False, repr=False)
class IndexMomentId(Record):
    """Names one closed-form moment of random index sets."""

    tag: str

    def validate(self) -> None:
        if self.tag not in MOMENT_TAGS:
            raise errors.InvalidParams(
                f"Unknown moment tag {self.tag!r}, expected one of "
                f"{', '.join(MOMENT_TAGS)}."
            )


# ============================ MOMENTS ================================


@dataclass(frozen=True, eq=False, repr=False)
class MomentParams(Record):
    """MomentParams(alpha, beta, gamma, delta, sigma2=None, mu=None, n=None)
    Moment parameters of a loss/distribution pair. ``A`` and ``B`` are the
    parameters shifted by ``(gamma + delta) / n`` and are ``None`` while
    ``n`` is unknown.

    >>> from cvplan.model import MomentParams
    >>> params = MomentParams(0.0, 2.0, 4.0, 0.0, n=8)
    >>> params.A, params.B
    (0.5, 2.5)
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    sigma2: t.Optional[float] = None
    mu: t.Optional[float] = None
    n: t.Optional[int] = None

    _aliases = {"a": "alpha", "b": "beta", "g": "gamma", "d": "delta"}
    _derived = ("A", "B")

    @property
    def A(self) -> t.Optional[float]:
        return None if self.n is None else self.shifted(self.n)[0]

    @property
    def B(self) -> t.Optional[float]:
        return None if self.n is None else self.shifted(self.n)[1]

    def shifted(self, n: int) -> t.Tuple[float, float]:
        """shifted(n) -> (A, B) for an explicit sample size."""
        shift = (self.gamma + self.delta) / n
        return self.alpha + shift, self.beta + shift

    def validate(self) -> None:
        if not _finite(self.alpha, self.beta, self.gamma, self.delta):
            raise errors.InvalidParams(f"Non-finite moment parameters: {self}.")
        if self.alpha < 0 or self.gamma < 0:
            raise errors.InvalidParams(
                f"alpha and gamma must be >= 0, got alpha={self.alpha}, "
                f"gamma={self.gamma}."
            )
        if self.beta <= 0:
            raise errors.InvalidParams(f"beta must be > 0, got {self.beta}.")
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise errors.InvalidParams(
                f"sigma2 must be > 0, got {self.sigma2}."
            )
        if self.n is not None and not (_is_int(self.n) and self.n >= 1):
            raise errors.InvalidParams(f"n must be a positive int, got {self.n}.")


@dataclass(frozen=True, eq=False, repr=False)
class CvVarianceModel(Record):
    """CvVarianceModel(v, c)
    Variance ``v`` of one test-set average and covariance ``c`` of two of
    them; ``rho = c / v``.
    """

    v: float
    c: float

    _derived = ("rho",)

    @property
    def rho(self) -> float:
        return self.c / self.v

    def validate(self) -> None:
        if not _finite(self.v, self.c):
            raise errors.InvalidParams(f"Non-finite v={self.v}, c={self.c}.")
        if not self.v > 0:
            raise errors.InvalidParams(f"v must be > 0, got {self.v}.")
        if self.c < 0 or self.c > self.v * (1 + 1e-12):
            raise errors.InvalidParams(
                f"Need 0 <= c <= v, got v={self.v}, c={self.c}."
            )


@dataclass(frozen=True, eq=False, repr=False)
class ResamplingPlan(Record):
    """Smallest number of random splits ``J`` meeting a criterion."""

    criterion: str
    target: float
    rho: float
    J: int
    achieved_re: float
    achieved_rr: t.Optional[float]

    def validate(self) -> None:
        if self.criterion not in CRITERIA:
            raise errors.InvalidParams(f"Unknown criterion {self.criterion!r}.")
        if not (_is_int(self.J) and self.J >= 1):
            raise errors.InvalidJ(f"J must be a positive int, got {self.J}.")


@dataclass(frozen=True, eq=False, repr=False)
class SplitPlan(Record):
    """SplitPlan(n, n1_opt, curve, c_approx, rho_opt, method, flagged=False)
    Optimal training size of the sample-mean rule. ``curve`` holds
    ``(n1, v)`` for every admissible ``n1``; ``flagged`` marks plans found
    by the fallback grid search.
    """

    n: int
    n1_opt: int
    curve: Curve
    c_approx: float
    rho_opt: float
    method: str
    flagged: bool = False

    _derived = ("n2", "v")

    @property
    def n2(self) -> int:
        return self.n - self.n1_opt

    @property
    def v(self) -> float:
        return self.v_at(self.n1_opt)

    def v_at(self, n1: int) -> float:
        for t1, value in self.curve:
            if t1 == n1:
                return value
        raise errors.OutOfRange(f"n1={n1} is not on the grid of this plan.")

    def validate(self) -> None:
        if self.method not in METHODS:
            raise errors.InvalidParams(f"Unknown method {self.method!r}.")
        if not half_up(self.n) <= self.n1_opt <= self.n - 1:
            raise errors.OutOfRange(
                f"n1_opt={self.n1_opt} outside [{half_up(self.n)}, {self.n - 1}]."
            )
        best = min(value for _, value in self.curve)
        if self.v_at(self.n1_opt) > best:
            raise errors.InvalidParams(
                f"n1_opt={self.n1_opt} does not attain the grid minimum."
            )


@dataclass(frozen=True, eq=False, repr=False)
class FoldPlan(Record):
    """FoldPlan(n, k_opt, curve)
    Optimal fold count; ``curve`` holds ``(k, variance, relative
    efficiency)`` for every divisor ``k >= 2`` of ``n``.
    """

    n: int
    k_opt: int
    curve: t.Tuple[t.Tuple[int, float, float], ...]

    _derived = ("variance",)

    @property
    def variance(self) -> float:
        return self.var_at(self.k_opt)

    def _row(self, k: int) -> t.Tuple[int, float, float]:
        for row in self.curve:
            if row[0] == k:
                return row
        raise errors.NotDivisible(f"k={k} is not a divisor of n={self.n}.")

    def var_at(self, k: int) -> float:
        return self._row(k)[1]

    def relative_efficiency(self, k: int) -> float:
        return self._row(k)[2]

    def validate(self) -> None:
        if not 2 <= self.k_opt <= self.n or self.n % self.k_opt:
            raise errors.NotDivisible(
                f"k_opt={self.k_opt} is not a divisor of n={self.n} in [2, n]."
            )


# ========================== REGRESSION ===============================


@dataclass(frozen=True, eq=False, repr=False)
class RegressionStats(Record):
    """Summary of a fitted linear model: leverages ``h_ii``, their sum of
    squares ``theta``, ``V_hat = n (X'X)^-1`` and the residual moments."""

    n: int
    p: int
    theta: float
    leverages: np.ndarray
    V_hat: np.ndarray
    sigma2_hat: float
    mu4_hat: float
    beta_hat: np.ndarray

    def validate(self) -> None:
        eps = 1e-9
        if not -eps <= self.theta <= self.p + eps:
            raise errors.InvalidParams(
                f"theta={self.theta} outside [0, p={self.p}]."
            )
        if np.any(self.leverages < -eps) or np.any(self.leverages > 1 + eps):
            raise errors.InvalidParams("Leverages must lie in [0, 1].")
        if self.V_hat.shape != (self.p, self.p):
            raise errors.ShapeMismatch(
                f"V_hat has shape {self.V_hat.shape}, expected ({self.p}, {self.p})."
            )


@dataclass(frozen=True, eq=False, repr=False)
class RegressionCvMoments(Record):
    """Mean, variance and covariance of test-set averages of squared
    errors. ``order_note`` states which terms are kept; the ``*_leading``
    fields repeat the quantities with the higher order terms dropped."""

    mean: float
    variance: float
    covariance: float
    order_note: str
    variance_leading: float
    covariance_leading: float


@dataclass(frozen=True, eq=False, repr=False)
class RegressionPlan(Record):
    """RegressionPlan(n, n1_opt, k_opt, curve, kfold_curve)
    Optimal training size and fold count of a least squares fit, with the
    variance curves they are read from."""

    n: int
    n1_opt: int
    k_opt: int
    curve: Curve
    kfold_curve: Curve


# =========================== LOGISTIC ================================


@dataclass(frozen=True, eq=False, repr=False)
class LogisticDesign(Record):
    """Quantities of a logistic fit that drive the classification error
    moments: success probabilities ``p_i``, standardized scores
    ``zeta_i`` and pairwise score correlations ``rho_pair``."""

    n: int
    p: int
    beta_hat: np.ndarray
    sigma2_hat: float
    V_hat: np.ndarray
    p_i: np.ndarray
    zeta_i: np.ndarray
    rho_pair: np.ndarray

    def validate(self) -> None:
        if self.p_i.shape != (self.n,) or self.zeta_i.shape != (self.n,):
            raise errors.ShapeMismatch("p_i and zeta_i must have length n.")
        if self.rho_pair.shape != (self.n, self.n):
            raise errors.ShapeMismatch("rho_pair must be n x n.")
        if np.any(self.p_i <= 0) or np.any(self.p_i >= 1):
            raise errors.InvalidParams("p_i must lie strictly inside (0, 1).")
        if not np.array_equal(self.rho_pair, self.rho_pair.T):
            raise errors.InvalidParams("rho_pair must be symmetric.")
        if np.any(np.abs(self.rho_pair) > 1) or np.any(
            np.diag(self.rho_pair) != 1
        ):
            raise errors.InvalidParams(
                "rho_pair must have unit diagonal and entries in [-1, 1]."
            )


@dataclass(frozen=True, eq=False, repr=False)
class CurveEntry(Record):
    """CurveEntry(n1, e_i, v, mean)
    One point of a classification error variance sweep."""

    n1: int
    e_i: np.ndarray
    v: float
    mean: float


@dataclass(frozen=True, eq=False, repr=False)
class VarianceCurve(Record):
    """VarianceCurve(entries, argmin_n1)
    Variance of the test-set error for every swept training size."""

    entries: t.Tuple[CurveEntry, ...]
    argmin_n1: int

    @property
    def n1(self) -> np.ndarray:
        return np.array([e.n1 for e in self.entries])

    @property
    def v(self) -> np.ndarray:
        return np.array([e.v for e in self.entries])

    def v_at(self, n1: int) -> float:
        for entry in self.entries:
            if entry.n1 == n1:
                return entry.v
        raise errors.OutOfRange(f"n1={n1} was not swept.")

    def pairs(self) -> Curve:
        return tuple((int(e.n1), float(e.v)) for e in self.entries)

    def validate(self) -> None:
        if not self.entries:
            raise errors.InvalidParams("A variance curve needs entries.")
        steps = np.diff(self.n1)
        if np.any(steps != 1):
            raise errors.InvalidParams("Curve entries must be consecutive.")
        if self.v_at(self.argmin_n1) > self.v.min():
            raise errors.InvalidParams(
                f"argmin_n1={self.argmin_n1} does not attain the minimum."
            )


# ========================== SIMULATION ===============================


@dataclass(frozen=True, eq=False, repr=False)
class DistSpec(Record):
    """DistSpec(family, params, shift=0.0)
    A data distribution. ``params`` by family: normal ``(mu, sigma)``,
    uniform ``(a, b)``, student_t ``(df,)``, exponential ``(rate,)``,
    lognormal ``(mu, sigma)``, pareto ``(a,)`` with unit scale. ``shift`` is
    added to every draw.

    >>> from cvplan.model import DistSpec
    >>> DistSpec("student_t", (6.0,), shift=5.0).label
    't6(5)'
    >>> DistSpec("pareto", (15.0,)).label
    'Pareto(15)'
    """

    family: str
    params: t.Tuple[float, ...]
    shift: float = 0.0

    _derived = ("label",)

    @property
    def label(self) -> str:
        p = [_num(x) for x in self.params]
        if self.family == "normal":
            text = f"N({p[0]},{_num(self.params[1] ** 2)})"
        elif self.family == "uniform":
            text = f"U({p[0]},{p[1]})"
        elif self.family == "student_t":
            text = f"t{p[0]}"
        elif self.family == "exponential":
            text = f"exp({p[0]})"
        elif self.family == "lognormal":
            text = "LogNormal" if self.params == (0.0, 1.0) else f"LogNormal({p[0]},{p[1]})"
        else:
            text = f"Pareto({p[0]})"
        if self.shift:
            text += f"({_num(self.shift)})"
        return text

    def validate(self) -> None:
        arity = {
            "normal": 2, "uniform": 2, "student_t": 1,
            "exponential": 1, "lognormal": 2, "pareto": 1,
        }
        if self.family not in arity:
            raise errors.InvalidParams(f"Unknown family {self.family!r}.")
        if len(self.params) != arity[self.family]:
            raise errors.InvalidParams(
                f"{self.family} takes {arity[self.family]} parameter(s), "
                f"got {self.params}."
            )
        if not _finite(*self.params, self.shift):
            raise errors.InvalidParams(f"Non-finite parameters {self.params}.")
        fam, prm = self.family, self.params
        if fam in ("normal", "lognormal") and prm[1] <= 0:
            raise errors.InvalidParams(f"sigma must be > 0, got {prm[1]}.")
        if fam == "uniform" and prm[1] <= prm[0]:
            raise errors.InvalidParams(f"Need a < b, got {prm}.")
        if fam in ("student_t", "exponential", "pareto") and prm[0] <= 0:
            raise errors.InvalidParams(f"{fam} parameter must be > 0, got {prm[0]}.")


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True, eq=False, repr=False)
class SimReport(Record):
    """Result of one simulated configuration. ``config`` echoes the inputs,
    ``mse`` is measured against ``theoretical`` where it is known."""

    config: t.Mapping[str, t.Any]
    estimates: t.Mapping[str, float]
    reps: int
    standard_errors: t.Mapping[str, float] = field(default_factory=dict)
    theoretical: t.Mapping[str, float] = field(default_factory=dict)
    mse: t.Mapping[str, float] = field(default_factory=dict)
    flags: t.Tuple[str, ...] = ()

    def row(self) -> t.Dict[str, t.Any]:
        """Flat mapping used for one csv row."""
        out: t.Dict[str, t.Any] = {}
        for key, value in self.config.items():
            if not isinstance(value, (list, tuple, dict)):
                out[key] = abc.plain(value)
        out.update({k: abc.plain(v) for k, v in self.estimates.items()})
        out.update({f"{k}_se": abc.plain(v) for k, v in self.standard_errors.items()})
        out.update({f"{k}_theory": abc.plain(v) for k, v in self.theoretical.items()})
        out.update({f"{k}_mse": abc.plain(v) for k, v in self.mse.items()})
        out["reps"] = self.reps
        if self.flags:
            out["flags"] = ";".join(self.flags)
        return out

    def validate(self) -> None:
        if not (_is_int(self.reps) and self.reps >= 0):
            raise errors.InvalidConfig(f"reps must be a count, got {self.reps}.")


@dataclass(frozen=True, eq=False, repr=False)
class RunConfig(Record):
    """Fully resolved command line invocation, echoed into every output."""

    command: str
    input: t.Optional[str]
    output: t.Optional[str]
    format: str
    seed: t.Optional[int]
    options: t.Mapping[str, t.Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.format not in FORMATS:
            raise errors.InvalidConfig(
                f"Unknown format {self.format!r}, expected one of {FORMATS}."
            )


__all__ = [
    "abc",
    "Record",
    "MOMENT_TAGS",
    "half_up",
    "SplitGeometry",
    "IndexMomentId",
    "MomentParams",
    "CvVarianceModel",
    "ResamplingPlan",
    "SplitPlan",
    "FoldPlan",
    "RegressionStats",
    "RegressionCvMoments",
    "RegressionPlan",
    "LogisticDesign",
    "CurveEntry",
    "VarianceCurve",
    "DistSpec",
    "SimReport",
    "RunConfig",
]
