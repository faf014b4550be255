"""Spacing histograms and a small dependency-free SVG writer."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from ptrmt import analytic
from ptrmt.core import EnsembleSpec, Unbounded
from ptrmt.verify import SpacingCDF


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    analytic: np.ndarray  # bin averages of the analytic density

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def rows(self):
        for lo, hi, d, a in zip(self.edges[:-1], self.edges[1:], self.density, self.analytic):
            yield lo, hi, d, a


def spacing_histogram(spacings, bins: int, spec: EnsembleSpec) -> Histogram:
    s = np.asarray(spacings, dtype=float)
    if s.size == 0:
        raise ValueError("no spacings to histogram")
    top = float(s.max()) if isinstance(spec, Unbounded) else 2.0
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(s, bins=edges)
    widths = np.diff(edges)
    density = counts / (s.size * widths)
    cdf = SpacingCDF(lambda x: analytic.spacing_pdf(x, spec), spec)
    expected = np.diff(cdf(edges)) / widths
    return Histogram(edges, counts, density, expected)


def write_histogram_csv(hist: Histogram, fh) -> None:
    fh.write("bin_lo,bin_hi,density,analytic\n")
    for lo, hi, d, a in hist.rows():
        fh.write(f"{lo:.17g},{hi:.17g},{d:.17g},{a:.17g}\n")


def _f(x: float) -> str:
    return f"{x:.3f}"


def histogram_svg(hist: Histogram, spec: EnsembleSpec, title: str = "", width: int = 640, height: int = 400) -> str:
    """Histogram bars with the analytic density drawn over them at 512 points."""
    left, right, top, bottom = 60, 20, 30, 45
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = float(hist.edges[0]), float(hist.edges[-1])
    sigma = np.linspace(x0, x1, 512)
    curve = np.asarray(analytic.spacing_pdf(sigma, spec), dtype=float)
    finite = curve[np.isfinite(curve)]
    ymax = 1.08 * max(float(hist.density.max()), float(finite.max()) if finite.size else 0.0, 1e-300)

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - min(v, ymax) / ymax * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="18" font-family="sans-serif" font-size="13" '
                   f'text-anchor="middle">{escape(title)}</text>')
    out.append('<g fill="#9ecae1" stroke="#3182bd" stroke-width="0.5">')
    for lo, hi, d, _ in hist.rows():
        y = sy(d)
        out.append(f'<rect x="{_f(sx(lo))}" y="{_f(y)}" width="{_f(sx(hi) - sx(lo))}" '
                   f'height="{_f(top + ph - y)}"/>')
    out.append("</g>")
    pts = " ".join(f"{_f(sx(s))},{_f(sy(c))}" for s, c in zip(sigma, curve) if np.isfinite(c))
    out.append(f'<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{pts}"/>')
    # axes and ticks
    out.append(f'<g stroke="black" stroke-width="1"><line x1="{left}" y1="{top + ph}" x2="{left + pw}" '
               f'y2="{top + ph}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>')
    out.append('<g font-family="sans-serif" font-size="11">')
    for v in np.linspace(x0, x1, 6):
        out.append(f'<text x="{_f(sx(v))}" y="{top + ph + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(0.0, ymax, 5):
        out.append(f'<text x="{left - 6}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">spacing</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2:.1f})">density</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
