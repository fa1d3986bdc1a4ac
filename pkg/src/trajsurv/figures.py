"""Static SVG rendering of survival step curves.

Hand-rolled SVG 1.1 so output is a pure function of the input: identical
curves yield byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from .estimator import SurvivalCurve, greenwood_ci

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

_MARGIN_LEFT = 64.0
_MARGIN_RIGHT = 18.0
_MARGIN_TOP = 40.0
_MARGIN_BOTTOM = 48.0


@dataclass(frozen=True)
class CurveSeries:
    """One labelled step curve, optionally with a confidence band."""

    label: str
    times: Sequence[float]
    survival: Sequence[float]
    lower: Sequence[float] | None = None
    upper: Sequence[float] | None = None


def curve_series(label: str, curve: SurvivalCurve, ci_level: float | None = 0.95) -> CurveSeries:
    lower = upper = None
    if ci_level is not None:
        lo, hi = greenwood_ci(curve, ci_level)
        lower, upper = lo.tolist(), hi.tolist()
    return CurveSeries(label=label, times=curve.times.tolist(), survival=curve.survival.tolist(),
                       lower=lower, upper=upper)


def _nice_step(span: float, target: int = 6) -> float:
    if span <= 0:
        return 1.0
    raw = span / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mult * magnitude >= raw:
            return mult * magnitude
    return 10.0 * magnitude


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def render_svg(
    curves: Sequence[CurveSeries],
    title: str = "",
    width: int = 720,
    height: int = 480,
    show_ci: bool = True,
    x_label: str = "years since first enrolment",
    y_label: str = "survival probability",
) -> str:
    """Right-continuous step paths with optional bands, axes, and a legend."""
    if not curves:
        raise ValueError("need at least one curve to render")
    max_time = max((max(c.times) if len(c.times) else 0.0) for c in curves)
    step = _nice_step(max(max_time, 1.0))
    x_max = step * math.ceil(max(max_time, 1.0) / step)

    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def x_px(t: float) -> float:
        return _MARGIN_LEFT + plot_w * (t / x_max)

    def y_px(s: float) -> float:
        return _MARGIN_TOP + plot_h * (1.0 - s)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    parts.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    if title:
        parts.append(
            f'<text x="{_fmt(width / 2)}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape(title)}</text>'
        )

    # axes, ticks, grid
    axis = 'stroke="#333333" stroke-width="1"'
    parts.append(f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(y_px(0.0))}" x2="{_fmt(x_px(x_max))}" y2="{_fmt(y_px(0.0))}" {axis}/>')
    parts.append(f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(y_px(0.0))}" x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(y_px(1.0))}" {axis}/>')
    tick = 0.0
    while tick <= x_max + 1e-9:
        px = x_px(tick)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y_px(0.0))}" x2="{_fmt(px)}" y2="{_fmt(y_px(0.0) + 5)}" {axis}/>')
        parts.append(
            f'<text x="{_fmt(px)}" y="{_fmt(y_px(0.0) + 19)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:g}</text>'
        )
        tick += step
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        py = y_px(frac)
        parts.append(f'<line x1="{_fmt(_MARGIN_LEFT - 5)}" y1="{_fmt(py)}" x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(py)}" {axis}/>')
        parts.append(
            f'<line x1="{_fmt(_MARGIN_LEFT)}" y1="{_fmt(py)}" x2="{_fmt(x_px(x_max))}" y2="{_fmt(py)}" '
            f'stroke="#dddddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_LEFT - 9)}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{frac:.2f}</text>'
        )
    parts.append(
        f'<text x="{_fmt(_MARGIN_LEFT + plot_w / 2)}" y="{_fmt(height - 10)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{_fmt(_MARGIN_TOP + plot_h / 2)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {_fmt(_MARGIN_TOP + plot_h / 2)})">{escape(y_label)}</text>'
    )

    for ci, series in enumerate(curves):
        colour = PALETTE[ci % len(PALETTE)]
        if show_ci and series.lower is not None and series.upper is not None and len(series.times):
            pts: list[str] = []
            for i, t in enumerate(series.times):
                x0 = x_px(t)
                x1 = x_px(series.times[i + 1]) if i + 1 < len(series.times) else x_px(x_max)
                y_up = y_px(series.upper[i])
                pts.append(f"{_fmt(x0)},{_fmt(y_up)}")
                pts.append(f"{_fmt(x1)},{_fmt(y_up)}")
            for i in range(len(series.times) - 1, -1, -1):
                x0 = x_px(series.times[i])
                x1 = x_px(series.times[i + 1]) if i + 1 < len(series.times) else x_px(x_max)
                y_lo = y_px(series.lower[i])
                pts.append(f"{_fmt(x1)},{_fmt(y_lo)}")
                pts.append(f"{_fmt(x0)},{_fmt(y_lo)}")
            parts.append(f'<polygon points="{" ".join(pts)}" fill="{colour}" fill-opacity="0.12" stroke="none"/>')

        d = [f"M {_fmt(x_px(0.0))} {_fmt(y_px(1.0))}"]
        prev_s = 1.0
        for t, s in zip(series.times, series.survival):
            d.append(f"H {_fmt(x_px(t))}")
            if s != prev_s:
                d.append(f"V {_fmt(y_px(s))}")
            prev_s = s
        d.append(f"H {_fmt(x_px(x_max))}")
        parts.append(f'<path d="{" ".join(d)}" fill="none" stroke="{colour}" stroke-width="1.8"/>')

    legend_x = _MARGIN_LEFT + plot_w - 150.0
    legend_y = _MARGIN_TOP + 8.0
    for ci, series in enumerate(curves):
        colour = PALETTE[ci % len(PALETTE)]
        ly = legend_y + 18.0 * ci
        parts.append(f'<line x1="{_fmt(legend_x)}" y1="{_fmt(ly)}" x2="{_fmt(legend_x + 24)}" y2="{_fmt(ly)}" '
                     f'stroke="{colour}" stroke-width="2.5"/>')
        parts.append(
            f'<text x="{_fmt(legend_x + 30)}" y="{_fmt(ly + 4)}" font-family="sans-serif" '
            f'font-size="11">{escape(series.label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
