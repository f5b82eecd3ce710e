"""Package defaults. Seeds and worker counts come from the environment, the
numeric tunables are module globals with setters.

Environment variables
---------------------
CVPLAN_SEED
    Seed used when a caller passes none (default ``20240101``).
CVPLAN_WORKERS
    Default number of worker threads for Monte Carlo reps and the logistic
    sweep (default ``1``).
"""

import os
import typing as t

from . import errors

FALLBACK_SEED = 20240101
SEED_LIMIT = 2**64

# tunables
ENUMERATION_BUDGET = 10**7
BVN_TOLERANCE = 1e-7
IRLS_TOLERANCE = 1e-8
IRLS_MAX_ITER = 50
CONDITION_LIMIT = 1e12
SEPARATION_NORM = 1e4


def _env_int(name: str, default: int) -> int:
    raw: t.Optional[str] = os.environ.get(name, None)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip(), 0)
    except ValueError as e:
        raise errors.InvalidConfig(
            f"Environment variable {name}={raw!r} is not an integer."
        ) from e


def check_seed(seed: int) -> int:
    """check_seed(seed) -> int
    Validates a 64-bit unsigned seed.

    >>> from cvplan.config import check_seed
    >>> check_seed(42)
    42
    >>> check_seed(-1)
    Traceback (most recent call last):
    ...
    cvplan.errors.InvalidConfig: Seed must lie in [0, 2**64), got -1.
    """
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise errors.InvalidConfig(f"Seed must be an integer, got {seed!r}.")
    if not 0 <= seed < SEED_LIMIT:
        raise errors.InvalidConfig(
            f"Seed must lie in [0, 2**64), got {seed}."
        )
    return seed


def default_seed() -> int:
    return check_seed(_env_int("CVPLAN_SEED", FALLBACK_SEED))


def resolve_seed(seed: t.Optional[int]) -> int:
    return default_seed() if seed is None else check_seed(seed)


def default_workers() -> int:
    workers = _env_int("CVPLAN_WORKERS", 1)
    if workers < 1:
        raise errors.InvalidConfig(
            f"CVPLAN_WORKERS must be positive, got {workers}."
        )
    return workers


def resolve_workers(workers: t.Optional[int]) -> int:
    if workers is None:
        return default_workers()
    if workers < 1:
        raise errors.InvalidConfig(f"workers must be positive, got {workers}.")
    return workers


def set_enumeration_budget(value: int):
    global ENUMERATION_BUDGET
    ENUMERATION_BUDGET = int(value)


def set_bvn_tolerance(value: float):
    global BVN_TOLERANCE
    BVN_TOLERANCE = float(value)


def set_irls(tolerance: float, max_iter: int):
    global IRLS_TOLERANCE, IRLS_MAX_ITER
    IRLS_TOLERANCE = float(tolerance)
    IRLS_MAX_ITER = int(max_iter)


def set_condition_limit(value: float):
    global CONDITION_LIMIT
    CONDITION_LIMIT = float(value)


def set_separation_norm(value: float):
    global SEPARATION_NORM
    SEPARATION_NORM = float(value)
