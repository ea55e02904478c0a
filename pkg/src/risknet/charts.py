"""Deterministic SVG charts for study outputs.

Everything is rendered by string assembly with fixed-precision
coordinates, so identical inputs give identical bytes. No plotting
dependency.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .errors import RiskNetError
from .network import RiskNetwork
from .pipeline import (
    SubPeriod,
    WeightBand,
    timeseries_rows,
    weight_distribution_stats,
)
from .spectral import RobustnessReport

__all__ = ["line_chart", "band_chart", "emit_charts"]

WIDTH = 900
HEIGHT = 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64.0, 16.0, 40.0, 48.0

_AXIS = "#444444"
_GRID = "#dddddd"
_LINE = "#1f5fa6"
_BAND = "#9ec5e8"
_MARK = "#b03030"


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _coord(value: float) -> str:
    return f"{value:.2f}"


def _scale(lo: float, hi: float, out_lo: float, out_hi: float):
    span = hi - lo
    if span == 0.0:
        lo, hi, span = lo - 1.0, hi + 1.0, 2.0
    rate = (out_hi - out_lo) / span
    return lambda v: out_lo + (v - lo) * rate, lo, hi


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_coord(WIDTH / 2)}" y="22" text-anchor="middle" '
        f'font-size="15" fill="{_AXIS}">{title}</text>',
    ]


def _y_axis(parts: list[str], to_y, lo: float, hi: float) -> None:
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    for i in range(5):
        value = lo + (hi - lo) * i / 4
        y = _coord(to_y(value))
        parts.append(
            f'<line x1="{_coord(x0)}" y1="{y}" x2="{_coord(x1)}" y2="{y}" '
            f'stroke="{_GRID}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_coord(x0 - 6)}" y="{y}" text-anchor="end" '
            f'dominant-baseline="middle" font-size="11" fill="{_AXIS}">{_fmt(value)}</text>'
        )


def line_chart(
    points: Sequence[tuple[float, float]],
    *,
    title: str,
    x_ticks: Sequence[tuple[float, str]] = (),
    boundaries: Sequence[tuple[float, str]] = (),
) -> str:
    """Single-series line chart with one marker per point.

    ``boundaries`` draws labelled dashed vertical lines (sub-period
    starts). Axis ranges always cover the data's min and max.
    """
    if not points:
        raise RiskNetError("cannot chart an empty series")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    to_x, _, _ = _scale(min(xs), max(xs), MARGIN_L, WIDTH - MARGIN_R)
    to_y, y_lo, y_hi = _scale(min(ys), max(ys), HEIGHT - MARGIN_B, MARGIN_T)

    parts = _header(title)
    _y_axis(parts, to_y, y_lo, y_hi)
    for x_value, text in x_ticks:
        x = _coord(to_x(x_value))
        parts.append(
            f'<line x1="{x}" y1="{_coord(HEIGHT - MARGIN_B)}" x2="{x}" '
            f'y2="{_coord(HEIGHT - MARGIN_B + 4)}" stroke="{_AXIS}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x}" y="{_coord(HEIGHT - MARGIN_B + 18)}" text-anchor="middle" '
            f'font-size="11" fill="{_AXIS}">{text}</text>'
        )
    for x_value, text in boundaries:
        x = _coord(to_x(x_value))
        parts.append(
            f'<line x1="{x}" y1="{_coord(MARGIN_T)}" x2="{x}" '
            f'y2="{_coord(HEIGHT - MARGIN_B)}" stroke="{_MARK}" '
            f'stroke-width="1" stroke-dasharray="4 3"/>'
        )
        parts.append(
            f'<text x="{_coord(to_x(x_value) + 4)}" y="{_coord(MARGIN_T + 12)}" '
            f'font-size="10" fill="{_MARK}">{text}</text>'
        )
    path = " ".join(
        f"{'M' if i == 0 else 'L'} {_coord(to_x(x))} {_coord(to_y(y))}"
        for i, (x, y) in enumerate(points)
    )
    parts.append(
        f'<path d="{path}" fill="none" stroke="{_LINE}" stroke-width="1.5"/>'
    )
    for x, y in points:
        parts.append(
            f'<circle cx="{_coord(to_x(x))}" cy="{_coord(to_y(y))}" r="2.5" '
            f'fill="{_LINE}"/>'
        )
    parts.append(
        f'<line x1="{_coord(MARGIN_L)}" y1="{_coord(HEIGHT - MARGIN_B)}" '
        f'x2="{_coord(WIDTH - MARGIN_R)}" y2="{_coord(HEIGHT - MARGIN_B)}" '
        f'stroke="{_AXIS}" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def band_chart(bands: Sequence[WeightBand], *, title: str) -> str:
    """Per-group box summary: 5%-95% band as a bar, mean as a marker."""
    if not bands:
        raise RiskNetError("cannot chart an empty band list")
    lo = min(b.q05 for b in bands)
    hi = max(b.q95 for b in bands)
    to_y, y_lo, y_hi = _scale(lo, hi, HEIGHT - MARGIN_B, MARGIN_T)
    slot = (WIDTH - MARGIN_L - MARGIN_R) / len(bands)
    bar = min(34.0, slot * 0.5)

    parts = _header(title)
    _y_axis(parts, to_y, y_lo, y_hi)
    for i, band in enumerate(bands):
        centre = MARGIN_L + slot * (i + 0.5)
        top = to_y(band.q95)
        parts.append(
            f'<rect x="{_coord(centre - bar / 2)}" y="{_coord(top)}" '
            f'width="{_coord(bar)}" height="{_coord(to_y(band.q05) - top)}" '
            f'fill="{_BAND}"/>'
        )
        parts.append(
            f'<line x1="{_coord(centre - bar / 2)}" y1="{_coord(to_y(band.mean))}" '
            f'x2="{_coord(centre + bar / 2)}" y2="{_coord(to_y(band.mean))}" '
            f'stroke="{_MARK}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_coord(centre)}" y="{_coord(HEIGHT - MARGIN_B + 18)}" '
            f'text-anchor="middle" font-size="11" fill="{_AXIS}">{band.group}</text>'
        )
    parts.append(
        f'<line x1="{_coord(MARGIN_L)}" y1="{_coord(HEIGHT - MARGIN_B)}" '
        f'x2="{_coord(WIDTH - MARGIN_R)}" y2="{_coord(HEIGHT - MARGIN_B)}" '
        f'stroke="{_AXIS}" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _window_ticks(rows: Sequence[tuple]) -> list[tuple[float, str]]:
    step = max(1, len(rows) // 8)
    return [(row[0], row[1]) for row in rows[::step]]


def _boundaries(
    rows: Sequence[tuple], sub_periods: Sequence[SubPeriod]
) -> list[tuple[float, str]]:
    marks = []
    for period in sub_periods:
        starts = [row[0] for row in rows if row[5] == period.label]
        if starts:
            marks.append((min(starts), period.label))
    return marks


def emit_charts(
    reports: Sequence[RobustnessReport],
    networks: Sequence[RiskNetwork],
    sub_periods: Sequence[SubPeriod],
    out_dir: str | Path,
) -> list[Path]:
    """Write the study's charts; returns the files written."""
    rows = timeseries_rows(reports, sub_periods)
    marks = _boundaries(rows, sub_periods)
    ticks = _window_ticks(rows)
    charts = {
        "normalized_kirchhoff.svg": line_chart(
            [(row[0], row[3]) for row in rows],
            title="Normalized Kirchhoff index by window",
            x_ticks=ticks,
            boundaries=marks,
        ),
        "density.svg": line_chart(
            [(row[0], row[2]) for row in rows],
            title="Network density by window",
            x_ticks=ticks,
            boundaries=marks,
        ),
        "median_clustering.svg": line_chart(
            [(row[0], row[4]) for row in rows],
            title="Median weighted clustering by window",
            x_ticks=ticks,
            boundaries=marks,
        ),
    }
    bands = weight_distribution_stats(networks)
    if bands:
        charts["weights_by_year.svg"] = band_chart(
            bands, title="Edge weights by year: mean and 5-95% band"
        )
    directory = Path(out_dir) / "charts"
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, svg in charts.items():
        path = directory / name
        try:
            path.write_text(svg, encoding="utf-8")
        except OSError as exc:
            raise RiskNetError(f"failed writing chart {path}: {exc}") from None
        written.append(path)
    return written
