"""Turns tabular input into the arrays the planners consume. CSV files need
a header row and numeric columns; reading goes through :mod:`pandas`.
"""

from __future__ import annotations
import os
import typing as t

import numpy as np
import pandas as pd

from . import errors
from .model import MomentParams

Source = t.Union[str, os.PathLike, t.TextIO, pd.DataFrame]


def read_table(source: Source) -> pd.DataFrame:
    """read_table(source) -> pandas.DataFrame
    Reads a csv path or handle; frames pass through unchanged.

    >>> import io
    >>> from cvplan.converter import read_table
    >>> read_table(io.StringIO("x,y\\n1,2\\n3,4\\n")).shape
    (2, 2)

    Raises
    ------
    InvalidParams
        If the table is empty or has non numeric columns.
    """
    if isinstance(source, pd.DataFrame):
        frame = source
    else:
        try:
            frame = pd.read_csv(source)
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise errors.InvalidParams(f"Cannot read csv: {e}") from None
    if frame.empty:
        raise errors.InvalidParams("The table has no rows.")
    bad = [c for c in frame.columns if not pd.api.types.is_numeric_dtype(frame[c])]
    if bad:
        raise errors.InvalidParams(
            f"Columns must be numeric, got text in {', '.join(map(str, bad))}."
        )
    if frame.isna().any().any():
        raise errors.InvalidParams("The table has missing values.")
    return frame


def _column(frame: pd.DataFrame, name: str) -> np.ndarray:
    if name not in frame.columns:
        raise errors.InvalidParams(
            f"No column {name!r}, have {', '.join(map(str, frame.columns))}."
        )
    return frame[name].to_numpy(dtype=float)


def sample_column(frame: pd.DataFrame, name: t.Optional[str] = None) -> np.ndarray:
    """sample_column(frame, name=None) -> ndarray
    One column as a sample; ``name`` may be left out for one-column tables.
    """
    if name is None:
        if frame.shape[1] != 1:
            raise errors.InvalidParams(
                "Name the sample column, the table has "
                f"{frame.shape[1]} columns."
            )
        name = frame.columns[0]
    return _column(frame, name)


def design_matrix(
    frame: pd.DataFrame,
    response: str,
    covariates: t.Optional[t.Sequence[str]] = None,
    intercept: bool = True,
) -> t.Tuple[np.ndarray, np.ndarray]:
    """design_matrix(frame, response, covariates=None, intercept=True)
    -> (X, y)

    Every column other than ``response`` is a covariate unless
    ``covariates`` names them. A leading column of ones is added with
    ``intercept``.

    >>> import pandas as pd
    >>> from cvplan.converter import design_matrix
    >>> X, y = design_matrix(pd.DataFrame({"a": [1., 2.], "y": [0., 1.]}), "y")
    >>> X.tolist(), y.tolist()
    ([[1.0, 1.0], [1.0, 2.0]], [0.0, 1.0])
    """
    y = _column(frame, response)
    names = (
        list(covariates)
        if covariates is not None
        else [c for c in frame.columns if c != response]
    )
    cols = [_column(frame, c) for c in names]
    if intercept:
        cols.insert(0, np.ones(len(frame)))
    if not cols:
        raise errors.InvalidParams("The design has no columns.")
    return np.column_stack(cols), y


def parse_params(text: str) -> MomentParams:
    """parse_params(text) -> MomentParams
    ``"alpha,beta,gamma,delta"`` with an optional fifth entry ``n``.

    >>> from cvplan.converter import parse_params
    >>> parse_params("0,2,4,0,100").n
    100
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) not in (4, 5):
        raise errors.InvalidParams(
            f"Expected alpha,beta,gamma,delta[,n], got {text!r}."
        )
    try:
        values = [float(p) for p in parts[:4]]
        n = int(parts[4]) if len(parts) == 5 else None
    except ValueError:
        raise errors.InvalidParams(f"Non numeric parameters in {text!r}.") from None
    return MomentParams(*values, n=n)


__all__ = ["read_table", "sample_column", "design_matrix", "parse_params"]
