"""This module writes planner results out as json, aligned text or csv. A
result is a mapping of scalars (optionally holding lists of row mappings
under some keys) or a plain list of rows; records are flattened with
:meth:`~cvplan.model.abc.Record.as_dict` first. It exposes 3 main functions
mirroring the builtin ``print``.

Non finite floats are written as ``null`` (NaN) or ``"inf"``/``"-inf"`` in
json, and as empty cells or ``inf`` in csv.
"""

from __future__ import annotations
import typing as t
import sys
import io
import csv
import json
import math
from fractions import Fraction

import pandas as pd

from . import errors
from .model import FORMATS, abc

Result = t.Union[t.Mapping[str, t.Any], t.Sequence[t.Mapping[str, t.Any]]]
Header = t.Optional[t.Mapping[str, t.Any]]
AnyPrinter = t.Callable[["State", t.Any, Header], None]


#  high level
def format(
    result: t.Any, handle: t.TextIO, fmt: str = "json", header: Header = None
):
    """format(result, handle, fmt="json", header=None)
    Write a result to a given IO writer.

    .. doctest::

        >>> import builtins
        >>> from cvplan.printer import format as cv_format
        >>> from io import StringIO
        >>> stream = StringIO()
        >>> cv_format({"n1_opt": 50, "rho": 0.5}, stream, "text")
        >>> builtins.print(stream.getvalue(), end="")
        n1_opt  50
        rho     0.5

    Parameters
    ----------
    result : mapping | list of mappings | Record
        What to write.
    handle : TextIO
        String IO handle to write into.
    fmt : str, default="json"
        One of ``json``, ``text`` or ``csv``.
    header : mapping, optional
        Resolved run configuration, echoed before the result.

    Raises
    ------
    InvalidConfig
        On an unknown format.
    """
    printer = FORMAT_PRINTERS.get(fmt, None)
    if printer is None:
        raise errors.InvalidConfig(
            f"Unknown format {fmt!r}, expected one of {FORMATS}."
        )
    state = State(handle)
    if header is not None:
        header = normalize(header)
    printer(state, normalize(result), header)


def print(result: t.Any, fmt: str = "json", header: Header = None):
    """print(result, fmt="json", header=None)
    Print a result to stdout.

    .. doctest::

        >>> from cvplan.printer import print as cv_print
        >>> cv_print({"J": 21, "achieved_re": 0.9}, "json")
        {
          "J": 21,
          "achieved_re": 0.9
        }
    """
    format(result, sys.stdout, fmt, header)


def string(result: t.Any, fmt: str = "json", header: Header = None) -> str:
    """string(result, fmt="json", header=None) -> str
    Return a result rendered in a string.

    .. doctest::

        >>> import builtins
        >>> from cvplan.printer import string as cv_string
        >>> rows = [{"n1": 1, "v": 0.5}, {"n1": 2, "v": float("nan")}]
        >>> builtins.print(cv_string(rows, "csv"), end="")
        n1,v
        1,0.5
        2,
    """
    handle = io.StringIO()
    format(result, handle, fmt, header)
    return handle.getvalue()


# helper
class State:
    def __init__(self, io: t.TextIO):
        self.io: t.TextIO = io
        self.float_digits = 6

    def write(self, arg: t.Any):
        self.io.write(arg)

    def write_line(self, arg: t.Any = ""):
        self.io.write(f"{arg}\n")

    def number(self, value: t.Any) -> str:
        if value is None:
            return "nan"
        if isinstance(value, float):
            return f"{value:.{self.float_digits}g}"
        return str(value)


def normalize(value: t.Any) -> t.Any:
    """Builtin types only: records become dicts, fractions floats, NaN
    ``None``."""
    value = abc.plain(value)
    if isinstance(value, dict):
        return {k: normalize(v) for k, v in value.items()}
    if isinstance(value, list):
        return [normalize(v) for v in value]
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _json_safe(value: t.Any) -> t.Any:
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _is_rows(value: t.Any) -> bool:
    return (
        isinstance(value, list)
        and len(value) > 0
        and all(isinstance(v, dict) for v in value)
    )


def _split(result: t.Any) -> t.Tuple[t.Dict[str, t.Any], t.Dict[str, t.Any]]:
    # scalars first, then tables
    if _is_rows(result):
        return {}, {"rows": result}
    if not isinstance(result, dict):
        return {"value": result}, {}
    scalars = {k: v for k, v in result.items() if not _is_rows(v)}
    tables = {k: v for k, v in result.items() if _is_rows(v)}
    return scalars, tables


# printers
def print_json(state: State, result: t.Any, header: Header):
    payload = result
    if header is not None:
        payload = {"config": header, "result": result}
    state.write(json.dumps(_json_safe(payload), indent=2, allow_nan=False))
    state.write_line()


def _aligned(state: State, pairs: t.Sequence[t.Tuple[str, t.Any]]):
    width = max((len(k) for k, _ in pairs), default=0)
    for key, value in pairs:
        if isinstance(value, (list, dict)):
            value = json.dumps(_json_safe(value))
        else:
            value = state.number(value)
        state.write_line(f"{key.ljust(width)}  {value}")


def _table(state: State, rows: t.Sequence[t.Mapping[str, t.Any]]):
    columns = _columns(rows)
    cells = [[state.number(row.get(c, "")) for c in columns] for row in rows]
    widths = [
        max([len(c)] + [len(r[i]) for r in cells])
        for i, c in enumerate(columns)
    ]
    state.write_line("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
    for r in cells:
        state.write_line("  ".join(x.rjust(w) for x, w in zip(r, widths)))


def print_text(state: State, result: t.Any, header: Header):
    if header is not None:
        _aligned(state, [(f"# {k}", v) for k, v in header.items()])
        state.write_line()
    scalars, tables = _split(result)
    if scalars:
        _aligned(state, list(scalars.items()))
    for name, rows in tables.items():
        if scalars or len(tables) > 1:
            state.write_line()
            state.write_line(f"[{name}]")
        _table(state, rows)


def _columns(rows: t.Sequence[t.Mapping[str, t.Any]]) -> t.List[str]:
    columns: t.List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def _csv_cell(value: t.Any) -> t.Any:
    if isinstance(value, (list, dict)):
        return json.dumps(_json_safe(value))
    return value


def print_csv(state: State, result: t.Any, header: Header):
    if header is not None:
        for key, value in header.items():
            state.write_line(f"# {key}={_csv_cell(value)}")
    scalars, tables = _split(result)
    if tables:
        rows = next(iter(tables.values()))
    else:
        rows = [scalars]
    frame = pd.DataFrame(
        [{k: _csv_cell(v) for k, v in row.items()} for row in rows],
        columns=_columns(rows),
    )
    frame.to_csv(
        state.io, index=False, lineterminator="\n", quoting=csv.QUOTE_MINIMAL
    )


FORMAT_PRINTERS: t.Dict[str, AnyPrinter] = {
    "json": print_json,
    "text": print_text,
    "csv": print_csv,
}


__all__ = ["print", "format", "string", "normalize"]
