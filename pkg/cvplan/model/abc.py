"""Base class shared by every record in :mod:`cvplan.model`.

Records are frozen dataclasses. They validate themselves on construction,
can be turned into plain dicts for printing, can be edited into validated
copies and compare equal to dicts carrying the same fields.
"""

import sys
import copy
import dataclasses
import typing as t
from fractions import Fraction

import numpy as np

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self


Plain = t.Union[None, bool, int, float, str, Fraction, t.List[t.Any], t.Dict[str, t.Any]]


def plain(value: t.Any) -> Plain:
    """plain(value) -> Plain
    Converts numpy values, records and containers into builtin types.

    >>> import numpy as np
    >>> from cvplan.model.abc import plain
    >>> plain(np.array([1.5, 2.0]))
    [1.5, 2.0]
    >>> plain((np.int64(3), {"k": np.float64(0.5)}))
    [3, {'k': 0.5}]

    """
    if isinstance(value, Record):
        return value.as_dict()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, t.Mapping):
        return {str(k): plain(v) for k, v in value.items()}  # type: ignore
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]  # type: ignore
    return value


def _same(a: t.Any, b: t.Any) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        try:
            return bool(np.array_equal(np.asarray(a), np.asarray(b)))
        except (TypeError, ValueError):
            return False
    return bool(a == b)


class Record:
    """Record(**fields)
    An abstract immutable record. Concrete records are declared as
    ``@dataclass(frozen=True, eq=False, repr=False)`` subclasses and may
    override :meth:`validate`.

    ``_aliases`` maps short names to field names; they are accepted by
    :meth:`edit` and by dict comparisons. ``_derived`` names read-only
    properties that :meth:`as_dict` exports next to the fields.
    """

    _aliases: t.ClassVar[t.Dict[str, str]] = {}
    _derived: t.ClassVar[t.Tuple[str, ...]] = ()

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Raises a :class:`~cvplan.errors.ValidationError` subclass if the
        record breaks one of its invariants."""

    # ================ ACCESS
    @classmethod
    def field_names(cls) -> t.Tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))  # type: ignore

    def as_dict(self) -> t.Dict[str, Plain]:
        """as_dict() -> dict
        Outputs the record (fields followed by derived values) as builtin
        types, ready for json.
        """
        names = self.field_names() + self._derived
        return {k: plain(getattr(self, k)) for k in names}

    def copy(self) -> Self:
        return copy.deepcopy(self)

    def edit(self, _strict: bool = True, **kwargs: t.Any) -> Self:
        """edit(_strict = True, **kwargs) -> Self
        Returns a validated copy with some fields replaced. Aliases are
        accepted.

        Parameters
        ----------
        kwargs : Any
            Fields to replace.
        _strict : bool, default=True
            If ``True`` an unknown key raises, otherwise it is skipped.

        Raises
        ------
        TypeError
            On unknown keys in strict mode or on a field given twice through
            an alias.
        """
        names = set(self.field_names())
        changes: t.Dict[str, t.Any] = {}
        for key, value in kwargs.items():
            name = self._aliases.get(key, key)
            if name not in names:
                if _strict:
                    raise TypeError(
                        f"{self.__class__.__name__}.edit() got an unexpected "
                        f"argument `{key}`."
                    )
                continue
            if name in changes:
                raise TypeError(
                    f"{self.__class__.__name__}.edit() got `{name}` twice."
                )
            changes[name] = value
        return dataclasses.replace(self, **changes)  # type: ignore

    def compare(self, other: object, existing_only: bool = True) -> bool:
        """Compares with another record or a dict. With ``existing_only``
        only the keys present in ``other`` are checked (pattern match),
        otherwise every field must match.

        >>> from cvplan.model import SplitGeometry
        >>> geom = SplitGeometry(n=10, n1=6)
        >>> geom.compare({"n1": 6})
        True
        >>> geom.compare({"n1": 6}, existing_only=False)
        False
        >>> geom == {"n": 10, "n1": 6}
        True
        """
        if isinstance(other, Record):
            if other.__class__ is not self.__class__:
                return False
            other = {k: getattr(other, k) for k in other.field_names()}
        if not isinstance(other, t.Mapping):
            return False
        other = t.cast(t.Mapping[str, t.Any], other)
        names = set(self.field_names())
        seen: t.Set[str] = set()
        for key, value in other.items():
            name = self._aliases.get(key, key)
            if name not in names and name not in self._derived:
                return False
            seen.add(name)
            if not _same(getattr(self, name), value):
                return False
        if existing_only:
            return True
        return names <= seen

    # ================ DUNDER METHODS
    def __eq__(self, other: object) -> bool:
        return self.compare(other, False)

    __hash__ = None  # type: ignore

    def __repr__(self) -> str:
        args: t.List[str] = []
        for k in self.field_names():
            v = getattr(self, k)
            if isinstance(v, np.ndarray):
                args.append(f"{k}=<array {'x'.join(map(str, v.shape))}>")
            elif isinstance(v, tuple) and len(v) > 6:  # type: ignore
                args.append(f"{k}=<{len(v)} items>")  # type: ignore
            else:
                args.append(f"{k}={v!r}")
        return f"{self.__class__.__name__}({', '.join(args)})"
