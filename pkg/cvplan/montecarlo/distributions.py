"""Data distributions of the simulation studies.

A :class:`~cvplan.model.DistSpec` is turned into draws with :func:`draw`
(numpy generator) or into a frozen :mod:`scipy.stats` law with
:func:`frozen` for population moments. Labels such as ``N(0,1)``, ``t6(5)``
or ``Pareto(15)`` parse back into specs with :func:`parse_dist`.

>>> from cvplan.montecarlo.distributions import parse_dist
>>> parse_dist("t12(5)")
DistSpec(family='student_t', params=(12.0,), shift=5.0)
>>> parse_dist("N(1,1)").label
'N(1,1)'
"""

from __future__ import annotations
import logging
import math
import re
import typing as t
import warnings

import numpy as np
from scipy import stats

from .. import errors
from ..model import DistSpec

logger = logging.getLogger(__name__)


# =========================== CONSTRUCTORS ============================


def normal(mu: float = 0.0, sigma: float = 1.0, shift: float = 0.0) -> DistSpec:
    return DistSpec("normal", (float(mu), float(sigma)), float(shift))


def uniform(a: float = 0.0, b: float = 1.0, shift: float = 0.0) -> DistSpec:
    return DistSpec("uniform", (float(a), float(b)), float(shift))


def student_t(df: float, shift: float = 0.0) -> DistSpec:
    return DistSpec("student_t", (float(df),), float(shift))


def exponential(rate: float = 1.0, shift: float = 0.0) -> DistSpec:
    return DistSpec("exponential", (float(rate),), float(shift))


def lognormal(mu: float = 0.0, sigma: float = 1.0, shift: float = 0.0) -> DistSpec:
    return DistSpec("lognormal", (float(mu), float(sigma)), float(shift))


def pareto(a: float, shift: float = 0.0) -> DistSpec:
    """Pareto with density ``a / x^(a+1)`` on ``x >= 1``."""
    return DistSpec("pareto", (float(a),), float(shift))


# ============================== USAGE ================================


def frozen(spec: DistSpec) -> t.Any:
    """frozen(spec) -> scipy.stats frozen distribution"""
    p, s = spec.params, spec.shift
    if spec.family == "normal":
        return stats.norm(loc=p[0] + s, scale=p[1])
    if spec.family == "uniform":
        return stats.uniform(loc=p[0] + s, scale=p[1] - p[0])
    if spec.family == "student_t":
        return stats.t(p[0], loc=s)
    if spec.family == "exponential":
        return stats.expon(loc=s, scale=1.0 / p[0])
    if spec.family == "lognormal":
        return stats.lognorm(p[1], loc=s, scale=math.exp(p[0]))
    return stats.pareto(p[0], loc=s)


def draw(spec: DistSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """draw(spec, n, rng) -> ndarray
    ``n`` independent draws. Pareto uses numpy's Lomax draw plus one.
    """
    if n < 1:
        raise errors.InvalidParams(f"Need n >= 1, got {n}.")
    p = spec.params
    if spec.family == "normal":
        x = rng.normal(p[0], p[1], n)
    elif spec.family == "uniform":
        x = rng.uniform(p[0], p[1], n)
    elif spec.family == "student_t":
        x = rng.standard_t(p[0], n)
    elif spec.family == "exponential":
        x = rng.exponential(1.0 / p[0], n)
    elif spec.family == "lognormal":
        x = rng.lognormal(p[0], p[1], n)
    else:
        x = rng.pareto(p[0], n) + 1.0
    return x + spec.shift


def sample(spec: DistSpec, n: int, seed: t.Optional[int] = None) -> np.ndarray:
    """sample(spec, n, seed=None) -> ndarray
    Deterministic draws for a seed; ``None`` uses
    :func:`cvplan.config.default_seed`.
    """
    from .engine import make_rng

    return draw(spec, n, make_rng(seed))


def finite_moments(spec: DistSpec) -> float:
    """finite_moments(spec) -> float
    Number of finite moments, ``inf`` for light tails.

    >>> from cvplan.montecarlo.distributions import finite_moments, pareto
    >>> finite_moments(pareto(6.0)), finite_moments(pareto(6.5))
    (5, 6)
    """
    if spec.family in ("student_t", "pareto"):
        return math.ceil(spec.params[0]) - 1
    return math.inf


def check_moments(spec: DistSpec, needed: int) -> bool:
    """Warns with :class:`~cvplan.errors.MomentWarning` and returns ``False``
    when ``spec`` has fewer than ``needed`` finite moments."""
    have = finite_moments(spec)
    if have >= needed:
        return True
    warnings.warn(
        f"{spec.label} has {have} finite moments, {needed} are needed.",
        errors.MomentWarning,
        stacklevel=2,
    )
    return False


# ============================== PARSING ==============================

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATTERNS: t.List[t.Tuple[str, t.Pattern[str]]] = [
    ("normal", re.compile(rf"^N\(({_NUM}),({_NUM})\)$")),
    ("uniform", re.compile(rf"^U\(({_NUM}),({_NUM})\)$")),
    ("student_t", re.compile(rf"^t({_NUM})(?:\(({_NUM})\))?$")),
    ("exponential", re.compile(rf"^exp\(({_NUM})\)$")),
    ("lognormal", re.compile(rf"^LogNormal(?:\(({_NUM}),({_NUM})\))?$")),
    ("pareto", re.compile(rf"^Pareto\(({_NUM})\)$")),
]


def parse_dist(text: str) -> DistSpec:
    """parse_dist(text) -> DistSpec
    Reads the labels produced by :attr:`DistSpec.label`: ``N(mu,sigma2)``,
    ``U(a,b)``, ``t<df>`` with an optional ``(shift)``, ``exp(rate)``,
    ``LogNormal`` and ``Pareto(a)``.

    Raises
    ------
    InvalidParams
        If the text matches no label.
    """
    compact = text.replace(" ", "")
    for family, pattern in _PATTERNS:
        m = pattern.match(compact)
        if not m:
            continue
        g = [float(x) if x is not None else None for x in m.groups()]
        if family == "normal":
            if g[1] <= 0:
                break
            return normal(g[0], math.sqrt(g[1]))
        if family == "uniform":
            return uniform(g[0], g[1])
        if family == "student_t":
            return student_t(g[0], g[1] or 0.0)
        if family == "exponential":
            return exponential(g[0])
        if family == "lognormal":
            if g[0] is None:
                return lognormal()
            return lognormal(g[0], g[1])
        return pareto(g[0])
    raise errors.InvalidParams(
        f"Cannot read distribution {text!r}; use N(0,1), U(-1,1), t12, "
        "t6(5), exp(1), LogNormal or Pareto(15)."
    )


__all__ = [
    "normal",
    "uniform",
    "student_t",
    "exponential",
    "lognormal",
    "pareto",
    "frozen",
    "draw",
    "sample",
    "finite_moments",
    "check_moments",
    "parse_dist",
]
