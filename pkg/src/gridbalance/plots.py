"""Minimal standalone SVG line and bar charts (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

__all__ = ["nice_ticks", "render_line_chart", "render_bar_chart", "render_svg"]

WIDTH, HEIGHT = 720, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 50
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions covering ``[lo, hi]``."""
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    k = 0
    while True:
        t = start + k * step
        ticks.append(round(t, 12))
        if t >= hi - 1e-12 * abs(step):
            break
        k += 1
    return ticks


def _label(v: float) -> str:
    return f"{v:.6g}"


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        self.pw = WIDTH - MARGIN_L - MARGIN_R
        self.ph = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, v: float) -> float:
        span = (self.xhi - self.xlo) or 1.0
        return MARGIN_L + (v - self.xlo) / span * self.pw

    def y(self, v: float) -> float:
        span = (self.yhi - self.ylo) or 1.0
        return MARGIN_T + self.ph - (v - self.ylo) / span * self.ph


def _open(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
    ]


def _axes(fr: _Frame, xticks, yticks, x_label: str, y_label: str) -> list[str]:
    out = ['<g class="axes" font-family="sans-serif" font-size="11" stroke="black">']
    x0, y0 = MARGIN_L, MARGIN_T + fr.ph
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + fr.pw}" y2="{y0}"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}"/>')
    for t in xticks:
        px = fr.x(t)
        out.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}"/>')
        out.append(f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle" stroke="none">'
                   f'{escape(_label(t))}</text>')
    for t in yticks:
        py = fr.y(t)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" stroke="none">'
                   f'{escape(_label(t))}</text>')
    out.append(f'<text x="{x0 + fr.pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" '
               f'stroke="none">{escape(x_label)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + fr.ph / 2:.1f}" text-anchor="middle" stroke="none" '
               f'transform="rotate(-90 16 {MARGIN_T + fr.ph / 2:.1f})">{escape(y_label)}</text>')
    out.append("</g>")
    return out


def render_line_chart(
    series: Mapping[str, Sequence[tuple[float, float]]],
    title: str = "",
    x_label: str = "slot",
    y_label: str = "",
    reference: tuple[str, float] | None = None,
) -> str:
    """One polyline per named series of ``(x, y)`` points.

    ``reference`` draws a labelled horizontal line, e.g. ``("capacity", 700)``.
    """
    if not series or any(len(pts) == 0 for pts in series.values()):
        raise ValueError("line chart needs at least one non-empty series")
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    if reference is not None:
        ys.append(reference[1])
    xticks = nice_ticks(min(xs), max(xs))
    yticks = nice_ticks(min(ys), max(ys))
    fr = _Frame(xticks[0], xticks[-1], yticks[0], yticks[-1])

    out = _open(title) + _axes(fr, xticks, yticks, x_label, y_label)
    if reference is not None:
        name, value = reference
        py = fr.y(value)
        out.append(
            f'<line class="reference" data-value={quoteattr(_label(value))} x1="{MARGIN_L}" '
            f'y1="{py:.2f}" x2="{MARGIN_L + fr.pw}" y2="{py:.2f}" stroke="black" '
            f'stroke-dasharray="6,4"/>'
        )
        out.append(f'<text x="{MARGIN_L + fr.pw - 4}" y="{py - 5:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">'
                   f'{escape(f"{name} = {_label(value)}")}</text>')

    legend = ['<g class="legend" font-family="sans-serif" font-size="11">']
    for k, (name, pts) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{fr.x(x):.2f},{fr.y(y):.2f}" for x, y in pts)
        out.append(f'<polyline data-series={quoteattr(name)} fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{coords}"/>')
        ly = MARGIN_T + 10 + 16 * k
        lx = WIDTH - MARGIN_R + 15
        legend.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                      f'stroke-width="2"/>')
        legend.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    legend.append("</g>")
    return "\n".join(out + legend + ["</svg>"]) + "\n"


def render_bar_chart(
    labels: Sequence[str], values: Sequence[float], title: str = "", x_label: str = "",
    y_label: str = "",
) -> str:
    """Vertical bars from a zero baseline, one per label."""
    if len(values) == 0 or len(labels) != len(values):
        raise ValueError("bar chart needs matching, non-empty labels and values")
    yticks = nice_ticks(min(0.0, *values), max(0.0, *values))
    n = len(values)
    fr = _Frame(-0.5, n - 0.5, yticks[0], yticks[-1])
    out = _open(title) + _axes(fr, [], yticks, x_label, y_label)
    slot_w = fr.pw / n
    base = fr.y(0.0)
    for i, (lab, v) in enumerate(zip(labels, values)):
        top = fr.y(v)
        x = fr.x(i) - 0.35 * slot_w
        out.append(
            f'<rect class="bar" data-label={quoteattr(str(lab))} x="{x:.2f}" '
            f'y="{min(top, base):.2f}" width="{0.7 * slot_w:.2f}" height="{abs(base - top):.2f}" '
            f'fill="{PALETTE[0]}"/>'
        )
        out.append(f'<text x="{fr.x(i):.2f}" y="{MARGIN_T + fr.ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{escape(str(lab))}</text>')
    out.append(f'<line x1="{MARGIN_L}" y1="{base:.2f}" x2="{MARGIN_L + fr.pw}" y2="{base:.2f}" '
               f'stroke="black"/>')
    return "\n".join(out + ["</svg>"]) + "\n"


_TITLES = {
    "demands": ("Demand per building", "demand"),
    "prices": ("Price per unit demand", "price"),
    "totals": ("Total demand", "total demand"),
    "cutdown": ("Demand cut down per building", "cut down"),
}


def render_svg(kind: str, columns: Mapping[str, Sequence]) -> str:
    """Chart one output table given as ``{column name: values}``.

    ``demands`` and ``prices`` plot every non-slot column against ``slot``;
    ``totals`` plots ``total_true`` with a reference line at ``capacity``;
    ``cutdown`` draws one bar per building from the ``cut`` column.
    """
    if kind not in _TITLES:
        raise ValueError(f"unknown chart kind {kind!r}")
    title, y_label = _TITLES[kind]
    if kind == "cutdown":
        labels = [f"b{int(b)}" for b in columns["building"]]
        return render_bar_chart(labels, [float(v) for v in columns["cut"]], title,
                                "building", y_label)
    slots = [float(s) for s in columns.get("slot", [])]
    if not slots:
        raise ValueError(f"{kind} chart needs at least one slot")
    if kind == "totals":
        series = {"total_true": list(zip(slots, map(float, columns["total_true"])))}
        return render_line_chart(series, title, "slot", y_label,
                                 reference=("capacity", float(columns["capacity"][0])))
    series = {
        name: list(zip(slots, map(float, vals)))
        for name, vals in columns.items()
        if name != "slot"
    }
    return render_line_chart(series, title, "slot", y_label)
