"""Dependency-free SVG rendering for spectra and spreading maps.

Fixed 800x600 viewport. Scatter plots carry one colored point class per
state label; heat maps draw a row-major rectangle grid (downsampled by block
maxima to keep files small) with an inset polyline of sigma versus time.
These are acceptance artifacts, not publication graphics.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=70, right=20, top=40, bottom=50)

CLASS_COLORS = {
    "localized": "#d62728",
    "extended": "#1f77b4",
    "": "#555555",
}


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo == hi:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, count)]


def _fmt(value: float) -> str:
    return f"{value:.3g}"


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16" '
            f'font-family="sans-serif">{title}</text>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif">{xlabel}</text>',
            f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif" transform="rotate(-90 16 {HEIGHT / 2})">{ylabel}</text>',
        ]
        self.x0 = MARGIN["left"]
        self.y0 = MARGIN["top"]
        self.x1 = WIDTH - MARGIN["right"]
        self.y1 = HEIGHT - MARGIN["bottom"]

    def set_limits(self, xlo, xhi, ylo, yhi):
        if xlo == xhi:
            xlo, xhi = xlo - 1.0, xhi + 1.0
        if ylo == yhi:
            ylo, yhi = ylo - 1.0, yhi + 1.0
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def px(self, x: float) -> float:
        return self.x0 + (x - self.xlo) / (self.xhi - self.xlo) * (self.x1 - self.x0)

    def py(self, y: float) -> float:
        return self.y1 - (y - self.ylo) / (self.yhi - self.ylo) * (self.y1 - self.y0)

    def axes(self):
        self.parts.append(
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.x1 - self.x0}" '
            f'height="{self.y1 - self.y0}" fill="none" stroke="black"/>'
        )
        for tick in _ticks(self.xlo, self.xhi):
            x = self.px(tick)
            self.parts.append(f'<line x1="{x:.1f}" y1="{self.y1}" x2="{x:.1f}" y2="{self.y1 + 5}" stroke="black"/>')
            self.parts.append(
                f'<text x="{x:.1f}" y="{self.y1 + 18}" text-anchor="middle" font-size="11" '
                f'font-family="sans-serif">{_fmt(tick)}</text>'
            )
        for tick in _ticks(self.ylo, self.yhi):
            y = self.py(tick)
            self.parts.append(f'<line x1="{self.x0 - 5}" y1="{y:.1f}" x2="{self.x0}" y2="{y:.1f}" stroke="black"/>')
            self.parts.append(
                f'<text x="{self.x0 - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11" '
                f'font-family="sans-serif">{_fmt(tick)}</text>'
            )

    def finish(self) -> str:
        self.parts.append("</svg>")
        return "\n".join(self.parts) + "\n"


def scatter_svg(x, y, labels, title: str, xlabel: str, ylabel: str) -> str:
    """Energy-plane scatter with one color per state label."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    canvas = _Canvas(title, xlabel, ylabel)
    pad_x = 0.05 * (x.max() - x.min() or 1.0)
    pad_y = 0.05 * (y.max() - y.min() or 1.0)
    canvas.set_limits(x.min() - pad_x, x.max() + pad_x, y.min() - pad_y, y.max() + pad_y)
    canvas.axes()
    for xi, yi, label in zip(x, y, labels):
        color = CLASS_COLORS.get(label, CLASS_COLORS[""])
        canvas.parts.append(
            f'<circle cx="{canvas.px(xi):.2f}" cy="{canvas.py(yi):.2f}" r="3" '
            f'fill="{color}" fill-opacity="0.75"/>'
        )
    # legend
    for k, (label, color) in enumerate(sorted(CLASS_COLORS.items())):
        if label and label in labels:
            ly = canvas.y0 + 16 + 18 * k
            canvas.parts.append(f'<circle cx="{canvas.x1 - 110}" cy="{ly}" r="4" fill="{color}"/>')
            canvas.parts.append(
                f'<text x="{canvas.x1 - 100}" y="{ly + 4}" font-size="12" '
                f'font-family="sans-serif">{label}</text>'
            )
    return canvas.finish()


def _block_max(values: np.ndarray, max_rows: int, max_cols: int) -> np.ndarray:
    rows, cols = values.shape
    rstep = max(1, math.ceil(rows / max_rows))
    cstep = max(1, math.ceil(cols / max_cols))
    rpad = (-rows) % rstep
    cpad = (-cols) % cstep
    padded = np.pad(values, ((0, rpad), (0, cpad)), constant_values=0.0)
    shaped = padded.reshape(padded.shape[0] // rstep, rstep, padded.shape[1] // cstep, cstep)
    return shaped.max(axis=(1, 3))


def _heat_color(v: float) -> str:
    v = min(max(v, 0.0), 1.0)
    r = round(255 + (8 - 255) * v)
    g = round(255 + (81 - 255) * v)
    b = round(255 + (156 - 255) * v)
    return f"rgb({r},{g},{b})"


def heatmap_svg(
    amplitudes: np.ndarray,
    times: np.ndarray,
    sigma: np.ndarray,
    title: str,
    xlabel: str = "site n",
    ylabel: str = "time",
    log_time: bool = False,
) -> str:
    """Row-major heat map of |psi~| over (site, time) with a sigma(t) inset."""
    values = np.asarray(amplitudes, dtype=float)
    vmax = values.max() or 1.0
    grid = _block_max(values / vmax, 220, 360)
    canvas = _Canvas(title, xlabel, ylabel)
    canvas.set_limits(0, values.shape[1], float(times[0]), float(times[-1]))
    canvas.axes()
    nr, nc = grid.shape
    cell_w = (canvas.x1 - canvas.x0) / nc
    cell_h = (canvas.y1 - canvas.y0) / nr
    for i in range(nr):
        y = canvas.y1 - (i + 1) * cell_h
        row = grid[i]
        for j in range(nc):
            if row[j] <= 0.004:  # skip near-white cells, keeps files small
                continue
            canvas.parts.append(
                f'<rect x="{canvas.x0 + j * cell_w:.2f}" y="{y:.2f}" width="{cell_w + 0.5:.2f}" '
                f'height="{cell_h + 0.5:.2f}" fill="{_heat_color(row[j])}"/>'
            )

    # sigma inset, top right
    ix0, iy0, iw, ih = canvas.x1 - 240, canvas.y0 + 12, 220, 140
    canvas.parts.append(
        f'<rect x="{ix0}" y="{iy0}" width="{iw}" height="{ih}" fill="white" '
        f'fill-opacity="0.85" stroke="black"/>'
    )
    finite = np.isfinite(sigma)
    if finite.sum() >= 2:
        t = np.asarray(times, dtype=float)[finite]
        s = np.asarray(sigma, dtype=float)[finite]
        if log_time:
            positive = t > 0
            t, s = t[positive], s[positive]
            t = np.log10(t)
        tlo, thi = t.min(), t.max() or 1.0
        shi = s.max() or 1.0
        pts = " ".join(
            f"{ix0 + 8 + (ti - tlo) / (thi - tlo or 1.0) * (iw - 16):.1f},"
            f"{iy0 + ih - 8 - si / shi * (ih - 30):.1f}"
            for ti, si in zip(t, s)
        )
        canvas.parts.append(f'<polyline points="{pts}" fill="none" stroke="#d62728" stroke-width="1.5"/>')
        label = "sigma vs log10(t)" if log_time else "sigma vs t"
        canvas.parts.append(
            f'<text x="{ix0 + 8}" y="{iy0 + 14}" font-size="11" font-family="sans-serif">'
            f"{label}, max {s.max():.3g}</text>"
        )
    return canvas.finish()
