"""Daily return panels: the input data model and its text format.

A panel is a wide table. The first column holds ISO-8601 dates, one row per
trading day, and every other column holds one firm's daily returns. Empty
cells mean "not observed" (the firm did not trade or report that day); they
are tracked in a boolean mask, never imputed.

Files are read in one pass and validated as they are parsed, so errors can
name the offending row and column.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import PanelFormatError

__all__ = ["ReturnPanel", "load_returns", "save_returns"]


@dataclass(frozen=True)
class ReturnPanel:
    """Immutable daily return panel.

    Attributes
    ----------
    dates : tuple of ``datetime.date``, strictly increasing.
    firms : tuple of str, unique, in file column order.
    returns : float array of shape ``(len(dates), len(firms))``. Entries
        where ``mask`` is False hold NaN and must not be read as data.
    mask : bool array, same shape; True where a return was observed.
    """

    dates: tuple[dt.date, ...]
    firms: tuple[str, ...]
    returns: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        t, n = len(self.dates), len(self.firms)
        if self.returns.shape != (t, n) or self.mask.shape != (t, n):
            raise PanelFormatError(
                f"shape mismatch: {t} dates x {n} firms vs returns "
                f"{self.returns.shape} and mask {self.mask.shape}"
            )
        if len(set(self.firms)) != n:
            raise PanelFormatError("duplicate firm identifiers")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise PanelFormatError("dates must be strictly increasing")
        observed = self.returns[self.mask]
        if observed.size and not np.all(np.isfinite(observed)):
            raise PanelFormatError("observed returns must be finite")
        self.returns.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_firms(self) -> int:
        return len(self.firms)

    def firm_index(self, firm: str) -> int:
        try:
            return self.firms.index(firm)
        except ValueError:
            raise KeyError(f"unknown firm {firm!r}") from None


def _parse_cell(text: str, row: int, firm: str) -> float:
    value_text = text.strip()
    if not value_text:
        return float("nan")
    try:
        value = float(value_text)
    except ValueError:
        raise PanelFormatError(
            f"row {row}, column {firm!r}: not a number: {text!r}"
        ) from None
    if not np.isfinite(value):
        raise PanelFormatError(
            f"row {row}, column {firm!r}: non-finite value {text!r}"
        )
    return value


def load_returns(source: str | Path | IO[str], *, delimiter: str = ",") -> ReturnPanel:
    """Parse a delimited return table into a :class:`ReturnPanel`.

    ``source`` may be a path or an open text stream. The first row is a
    required header ("date" plus one firm identifier per column); data rows
    carry an ISO date followed by returns, with empty cells meaning missing.
    Rows are sorted by date. Parse errors name the 1-based file row and the
    column involved.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_returns(handle, delimiter=delimiter)

    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelFormatError("empty table: no header row") from None
    if len(header) < 2:
        raise PanelFormatError("header must list a date column and at least one firm")
    firms = tuple(name.strip() for name in header[1:])
    if any(not name for name in firms):
        raise PanelFormatError("blank firm identifier in header")
    if len(set(firms)) != len(firms):
        dupes = sorted({f for f in firms if firms.count(f) > 1})
        raise PanelFormatError(f"duplicate firm columns: {', '.join(dupes)}")

    rows: list[tuple[dt.date, list[float]]] = []
    seen: dict[dt.date, int] = {}
    for row_no, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(firms) + 1:
            raise PanelFormatError(
                f"row {row_no}: expected {len(firms) + 1} cells, got {len(record)}"
            )
        date_text = record[0].strip()
        try:
            date = dt.date.fromisoformat(date_text)
        except ValueError:
            raise PanelFormatError(
                f"row {row_no}: malformed date {date_text!r}"
            ) from None
        if date in seen:
            raise PanelFormatError(
                f"row {row_no}: duplicate date {date.isoformat()} "
                f"(first seen at row {seen[date]})"
            )
        seen[date] = row_no
        values = [
            _parse_cell(cell, row_no, firms[col])
            for col, cell in enumerate(record[1:])
        ]
        rows.append((date, values))

    if not rows:
        raise PanelFormatError("empty table: no data rows")
    rows.sort(key=lambda item: item[0])
    dates = tuple(date for date, _ in rows)
    returns = np.array([values for _, values in rows], dtype=float)
    mask = ~np.isnan(returns)
    return ReturnPanel(dates=dates, firms=firms, returns=returns, mask=mask)


def save_returns(panel: ReturnPanel, target: str | Path | IO[str], *, delimiter: str = ",") -> None:
    """Write a panel back to the delimited text format.

    Values are written with ``repr`` so a load/save cycle is bit-exact;
    masked entries become empty cells.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as handle:
            save_returns(panel, handle, delimiter=delimiter)
        return

    writer = csv.writer(target, delimiter=delimiter, lineterminator="\n")
    writer.writerow(("date",) + panel.firms)
    for t, date in enumerate(panel.dates):
        cells = [date.isoformat()]
        for j in range(panel.n_firms):
            cells.append(repr(float(panel.returns[t, j])) if panel.mask[t, j] else "")
        writer.writerow(cells)


def panel_from_rows(
    dates: Iterable[dt.date],
    firms: Iterable[str],
    returns: np.ndarray,
    mask: np.ndarray | None = None,
) -> ReturnPanel:
    """Convenience constructor from in-memory arrays (used by tests and the
    synthetic generator). NaN entries are treated as missing when no mask is
    given."""
    returns = np.asarray(returns, dtype=float).copy()
    if mask is None:
        mask = ~np.isnan(returns)
    else:
        mask = np.asarray(mask, dtype=bool).copy()
        returns[~mask] = np.nan
    return ReturnPanel(tuple(dates), tuple(firms), returns, mask)


def roundtrip_text(panel: ReturnPanel, *, delimiter: str = ",") -> str:
    """Serialize to a string (handy for tests)."""
    buffer = io.StringIO()
    save_returns(panel, buffer, delimiter=delimiter)
    return buffer.getvalue()
