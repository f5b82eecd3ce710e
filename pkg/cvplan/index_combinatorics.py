"""Exact moments of random training-index sets.

Two training sets ``S_j`` and ``S_j'`` of size ``n1`` are drawn uniformly and
independently from ``{0, ..., n-1}``; ``Y`` is the size of their overlap and
``Y*`` the size of the overlap of their complements. Fixed distinct indices
are called ``i``, ``i'`` and ``i''`` (0, 1 and 2 below).

Each moment has a closed form (:func:`lemma_moment`) and a brute-force
counterpart that averages the defining expression over every ordered pair of
subsets (:func:`enumerate_moment`). Both return :class:`fractions.Fraction`,
so agreement is an equality test.
"""

from __future__ import annotations
import itertools
import logging
import math
import typing as t
from fractions import Fraction

from . import config, errors
from .model import IndexMomentId, MOMENT_TAGS, SplitGeometry

logger = logging.getLogger(__name__)

MomentLike = t.Union[str, IndexMomentId]
Indicator = t.Callable[[int, int, int], int]

I, I1, I2 = 0, 1, 2  # the fixed indices i, i', i''


def _tag(moment: MomentLike) -> str:
    if isinstance(moment, IndexMomentId):
        return moment.tag
    return IndexMomentId(moment).tag


def _distinct(tag: str) -> int:
    """Number of distinct fixed indices a moment's closed form needs."""
    if tag in ("c", "i2", "j"):
        return 3
    if tag in ("b1", "b2", "e", "g", "h", "k"):
        return 2
    return 1


# ========================= CLOSED FORMS ==============================


def _closed_forms(n: int, n1: int, n2: int) -> t.Dict[str, t.Callable[[], Fraction]]:
    F = Fraction
    return {
        "a": lambda: F(n2, n),
        "b1": lambda: F(n2 * (n2 - 1), n * (n - 1)),
        "b2": lambda: F(n1 * n2, n * (n - 1)),
        "c": lambda: F(n1 * n2 * (n1 - 1), n * (n - 1) * (n - 2)),
        "d_mean": lambda: F(n2, n),
        "d_var": lambda: F(n1 * n2, n * n),
        "e": lambda: F(n2 * (n2 - 1), n * (n - 1)),
        "f": lambda: F(n2 * n2, n * n),
        "g": lambda: F(n1 * n2 * n2, n * n * (n - 1)),
        "h": lambda: F(n1**2 * n2**2, n**2 * (n - 1) ** 2),
        "i1": lambda: F(n1**2 * n2**2, n**2 * (n - 1)),
        "i2": lambda: F(
            n1**2 * n2**2 * (n1 * (n1 - 1) + n2 - 1),
            n**2 * (n - 1) * (n - 2),
        ),
        "j": lambda: F(
            n1**2 * n2**2 * ((n - 2) ** 2 + (n - 3) * (n1 - 1) ** 2),
            n**2 * (n - 1) ** 2 * (n - 2),
        ),
        "k": lambda: F(n1**2 * (n1 - 1) * n2**2, n**2 * (n - 1) ** 2),
    }


def lemma_moment(moment: MomentLike, geom: SplitGeometry) -> Fraction:
    """lemma_moment(moment, geom) -> Fraction
    Closed-form moment of random index sets.

    >>> from cvplan.model import SplitGeometry
    >>> from cvplan.index_combinatorics import lemma_moment
    >>> lemma_moment("a", SplitGeometry(10, 6))
    Fraction(2, 5)
    >>> lemma_moment("i1", SplitGeometry(6, 3))
    Fraction(9, 20)

    Parameters
    ----------
    moment : str | IndexMomentId
        One of ``a, b1, b2, c, d_mean, d_var, e, f, g, h, i1, i2, j, k``.
    geom : SplitGeometry
        Sample and training sizes.

    Returns
    -------
    Fraction

    Raises
    ------
    InvalidGeometry
        If the moment involves three distinct indices and ``n < 3``.
    """
    tag = _tag(moment)
    if geom.n < _distinct(tag):
        raise errors.InvalidGeometry(
            f"Moment {tag!r} needs n >= {_distinct(tag)}, got n={geom.n}."
        )
    return _closed_forms(geom.n, geom.n1, geom.n2)[tag]()


# ========================= ENUMERATION ===============================


def unrank_combination(rank: int, n: int, k: int) -> t.Tuple[int, ...]:
    """unrank_combination(rank, n, k) -> tuple
    The ``rank``-th ``k``-subset of ``range(n)`` in lexicographic order.

    >>> from cvplan.index_combinatorics import unrank_combination
    >>> [unrank_combination(r, 4, 2) for r in range(6)]
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    """
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise errors.OutOfRange(f"rank {rank} outside [0, {total}).")
    out: t.List[int] = []
    x = 0
    while k:
        # subsets starting with x
        block = math.comb(n - x - 1, k - 1)
        if rank < block:
            out.append(x)
            k -= 1
        else:
            rank -= block
        x += 1
    return tuple(out)


def subset_masks(n: int, k: int) -> t.List[int]:
    """All ``k``-subsets of ``range(n)`` as bit masks, in rank order."""
    masks: t.List[int] = []
    for rank in range(math.comb(n, k)):
        mask = 0
        for x in unrank_combination(rank, n, k):
            mask |= 1 << x
        masks.append(mask)
    return masks


def _has(mask: int, x: int) -> bool:
    return bool(mask >> x & 1)


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _indicators(swap: bool) -> t.Dict[str, Indicator]:
    """Defining expression of every moment as a function of
    ``(S_j, S_j', full)``. ``swap`` exchanges the roles of ``j`` and ``j'``.
    """

    def both(fn: Indicator) -> Indicator:
        if swap:
            return lambda s, s2, full: fn(s2, s, full)
        return fn

    def out(mask: int, x: int) -> bool:
        return not _has(mask, x)

    table: t.Dict[str, Indicator] = {
        "a": lambda s, s2, f: int(out(s, I)),
        "b1": lambda s, s2, f: int(out(s, I) and out(s, I1)),
        "b2": lambda s, s2, f: int(out(s, I) and _has(s, I1)),
        "c": lambda s, s2, f: int(out(s, I) and _has(s, I1) and _has(s, I2)),
        "d_mean": lambda s, s2, f: int(out(s, I)),
        "d_var": lambda s, s2, f: int(out(s, I)),
        "e": lambda s, s2, f: int(out(s, I) and out(s, I1)),
        "f": lambda s, s2, f: int(out(s, I) and out(s2, I)),
        "g": lambda s, s2, f: int(out(s, I) and out(s2, I1) and _has(s, I1)),
        "h": lambda s, s2, f: int(
            out(s, I) and out(s2, I1) and _has(s, I1) and _has(s2, I)
        ),
        "i1": lambda s, s2, f: _popcount(s & s2) * (out(s, I) and out(s2, I)),
        "i2": lambda s, s2, f: _popcount(s & s2) ** 2
        * (out(s, I) and out(s2, I)),
        "j": lambda s, s2, f: _popcount(s & s2) ** 2
        * (out(s, I) and out(s2, I1)),
        "k": lambda s, s2, f: _popcount(s & s2)
        * (out(s, I) and out(s2, I1) and _has(s2, I)),
    }
    return {k: both(fn) for k, fn in table.items()}


def _check_budget(geom: SplitGeometry) -> int:
    pairs = math.comb(geom.n, geom.n1) ** 2
    if pairs > config.ENUMERATION_BUDGET:
        raise errors.BudgetExceeded(
            f"C({geom.n}, {geom.n1})^2 = {pairs} pairs exceeds the "
            f"enumeration budget of {config.ENUMERATION_BUDGET}."
        )
    return pairs


def enumerate_moment(
    moment: MomentLike, geom: SplitGeometry, swap: bool = False
) -> Fraction:
    """enumerate_moment(moment, geom, swap=False) -> Fraction
    Averages the defining expression of a moment over every ordered pair
    ``(S_j, S_j')`` of training sets with uniform weight.

    >>> from cvplan.model import SplitGeometry
    >>> from cvplan.index_combinatorics import enumerate_moment
    >>> enumerate_moment("a", SplitGeometry(4, 2))
    Fraction(1, 2)
    >>> enumerate_moment("f", SplitGeometry(5, 3))
    Fraction(4, 25)

    Parameters
    ----------
    moment : str | IndexMomentId
        Moment tag, see :func:`lemma_moment`.
    geom : SplitGeometry
        Sample and training sizes.
    swap : bool, default=False
        Evaluate the expression with ``S_j`` and ``S_j'`` exchanged.

    Raises
    ------
    BudgetExceeded
        If ``C(n, n1)^2`` exceeds :data:`cvplan.config.ENUMERATION_BUDGET`.
    InvalidGeometry
        If the moment needs more distinct indices than ``n`` has.
    """
    tag = _tag(moment)
    if geom.n < _distinct(tag):
        raise errors.InvalidGeometry(
            f"Moment {tag!r} needs n >= {_distinct(tag)}, got n={geom.n}."
        )
    pairs = _check_budget(geom)
    full = (1 << geom.n) - 1
    fn = _indicators(swap)[tag]
    masks = subset_masks(geom.n, geom.n1)
    total = 0
    total_sq = 0
    for s, s2 in itertools.product(masks, masks):
        value = fn(s, s2, full)
        total += value
        total_sq += value * value
    mean = Fraction(total, pairs)
    if tag == "d_var":
        return Fraction(total_sq, pairs) - mean * mean
    return mean


def expected_overlap(geom: SplitGeometry) -> t.Tuple[Fraction, Fraction]:
    """expected_overlap(geom) -> (E Y, E Y*)
    Expected overlap of two independent training sets and of their test
    sets.

    >>> from cvplan.model import SplitGeometry
    >>> from cvplan.index_combinatorics import expected_overlap
    >>> expected_overlap(SplitGeometry(10, 6))
    (Fraction(18, 5), Fraction(8, 5))
    """
    return Fraction(geom.n1**2, geom.n), Fraction(geom.n2**2, geom.n)


def enumerate_overlap(geom: SplitGeometry) -> t.Tuple[Fraction, Fraction]:
    """Brute-force counterpart of :func:`expected_overlap`."""
    pairs = _check_budget(geom)
    full = (1 << geom.n) - 1
    masks = subset_masks(geom.n, geom.n1)
    y = 0
    y_star = 0
    for s, s2 in itertools.product(masks, masks):
        y += _popcount(s & s2)
        y_star += _popcount(full & ~s & ~s2)
    return Fraction(y, pairs), Fraction(y_star, pairs)


# ============================ K-FOLD =================================


def _check_folds(n: int, k: int):
    if not 2 <= k <= n:
        raise errors.OutOfRange(f"Need 2 <= k <= n, got n={n}, k={k}.")
    if n % k:
        raise errors.NotDivisible(f"k={k} does not divide n={n}.")


def kfold_overlap(n: int, k: int) -> t.Tuple[int, int]:
    """kfold_overlap(n, k) -> (Y, Y*)
    Overlaps of the training sets and of the test sets of two different
    folds. Both are constants in k-fold CV.

    >>> from cvplan.index_combinatorics import kfold_overlap
    >>> kfold_overlap(12, 3)
    (4, 0)
    >>> kfold_overlap(100, 10)
    (80, 0)
    """
    _check_folds(n, k)
    return (k - 2) * n // k, 0


def enumerate_kfold_overlap(n: int, k: int) -> t.Tuple[int, int]:
    """Walks every ordered pair of distinct folds of the contiguous
    partition and returns the common ``(Y, Y*)``.

    Raises
    ------
    NumericalError
        If two fold pairs disagree, which would mean the folds are not a
        partition.
    """
    _check_folds(n, k)
    size = n // k
    full = (1 << n) - 1
    tests = [((1 << size) - 1) << (f * size) for f in range(k)]
    seen: t.Set[t.Tuple[int, int]] = set()
    for a, b in itertools.permutations(range(k), 2):
        train_a, train_b = full & ~tests[a], full & ~tests[b]
        seen.add((_popcount(train_a & train_b), _popcount(tests[a] & tests[b])))
    if len(seen) != 1:
        raise errors.NumericalError(f"Fold overlaps are not constant: {seen}.")
    return seen.pop()


# ============================ ORACLE =================================


def oracle_table(
    geom: SplitGeometry, tags: t.Optional[t.Iterable[str]] = None
) -> t.List[t.Dict[str, t.Any]]:
    """oracle_table(geom, tags=None) -> list[dict]
    Closed form next to enumeration for each tag. Rows carry ``status``
    ``PASS``, ``FAIL`` or ``SKIP`` (too few indices for the moment).
    """
    rows: t.List[t.Dict[str, t.Any]] = []
    for tag in tags or MOMENT_TAGS:
        tag = _tag(tag)
        if geom.n < _distinct(tag):
            rows.append(
                {"tag": tag, "closed_form": None, "enumerated": None, "status": "SKIP"}
            )
            continue
        closed = lemma_moment(tag, geom)
        counted = enumerate_moment(tag, geom)
        status = "PASS" if closed == counted else "FAIL"
        if status == "FAIL":
            logger.warning(
                "Moment %s mismatch at n=%d, n1=%d: %s != %s",
                tag, geom.n, geom.n1, closed, counted,
            )
        rows.append(
            {
                "tag": tag,
                "closed_form": str(closed),
                "enumerated": str(counted),
                "status": status,
            }
        )
    return rows


__all__ = [
    "lemma_moment",
    "enumerate_moment",
    "expected_overlap",
    "enumerate_overlap",
    "kfold_overlap",
    "enumerate_kfold_overlap",
    "unrank_combination",
    "subset_masks",
    "oracle_table",
]
