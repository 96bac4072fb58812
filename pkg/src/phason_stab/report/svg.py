"""Deterministic SVG rendering of pseudospectrum contours, spectra and clouds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .contours import ContourSet

__all__ = ["PALETTE", "AxesConfig", "AxesTransform", "make_transform", "render_svg"]

# viridis sampled at 10 evenly spaced stops; level k uses PALETTE[k % 10]
PALETTE = (
    "#440154", "#482878", "#3e4989", "#31688e", "#26828e",
    "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725",
)


@dataclass(frozen=True)
class AxesConfig:
    re_range: tuple[float, float] | None = None
    im_range: tuple[float, float] | None = None
    width: int = 720
    height: int = 540
    title: str = ""


@dataclass(frozen=True)
class AxesTransform:
    """Maps complex plane coordinates (rad/s) to SVG pixels."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    left: float
    top: float
    plot_w: float
    plot_h: float

    def __call__(self, z: complex) -> tuple[float, float]:
        x = self.left + (z.real - self.re_min) / (self.re_max - self.re_min) * self.plot_w
        y = self.top + (self.im_max - z.imag) / (self.im_max - self.im_min) * self.plot_h
        return x, y


def _f(x: float) -> str:
    return f"{x:.2f}"


def _num(x: float) -> str:
    return f"{x:.4g}"


def _auto_range(values: list[float]) -> tuple[float, float]:
    if not values:
        return -1.0, 1.0
    lo, hi = min(values), max(values)
    pad = 0.1 * (hi - lo) if hi > lo else max(1.0, abs(hi) * 0.1)
    return lo - pad, hi + pad


def make_transform(axes: AxesConfig, points: list[complex]) -> AxesTransform:
    re_rng = axes.re_range or _auto_range([p.real for p in points])
    im_rng = axes.im_range or _auto_range([p.imag for p in points])
    left, top, right, bottom = 80.0, 40.0, 110.0, 60.0
    return AxesTransform(float(re_rng[0]), float(re_rng[1]), float(im_rng[0]), float(im_rng[1]),
                         left, top, axes.width - left - right, axes.height - top - bottom)


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + k * (hi - lo) / (count - 1) for k in range(count)]


def render_svg(contours: ContourSet | None = None, eigenvalues=None, cloud=None,
               axes: AxesConfig | None = None) -> str:
    """SVG 1.1 document; identical inputs give identical bytes.

    Contours are coloured by level rank, eigenvalues are drawn as crosses,
    cloud points as small dots, and the imaginary axis is dashed.
    """
    axes = axes or AxesConfig()
    lam = [complex(z) for z in np.ravel(eigenvalues)] if eigenvalues is not None else []
    pts = [complex(z) for z in np.ravel(cloud)] if cloud is not None else []
    curves = list(contours) if contours is not None else []
    everything = lam + pts + [complex(z) for _, lines in curves for line in lines for z in line]
    T = make_transform(axes, everything)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{axes.width}" '
        f'height="{axes.height}" viewBox="0 0 {axes.width} {axes.height}">',
        f'<rect x="0" y="0" width="{axes.width}" height="{axes.height}" fill="white"/>',
        f'<clipPath id="plot"><rect x="{_f(T.left)}" y="{_f(T.top)}" '
        f'width="{_f(T.plot_w)}" height="{_f(T.plot_h)}"/></clipPath>',
        f'<rect x="{_f(T.left)}" y="{_f(T.top)}" width="{_f(T.plot_w)}" height="{_f(T.plot_h)}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if axes.title:
        out.append(f'<text x="{_f(T.left + T.plot_w / 2)}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{escape(axes.title)}</text>')

    # tick labels
    bottom = T.top + T.plot_h
    for x in _ticks(T.re_min, T.re_max):
        px, _ = T(complex(x, T.im_min))
        out.append(f'<line x1="{_f(px)}" y1="{_f(bottom)}" x2="{_f(px)}" y2="{_f(bottom + 5)}" stroke="black"/>')
        out.append(f'<text x="{_f(px)}" y="{_f(bottom + 18)}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_num(x)}</text>')
    for y in _ticks(T.im_min, T.im_max):
        _, py = T(complex(T.re_min, y))
        out.append(f'<line x1="{_f(T.left - 5)}" y1="{_f(py)}" x2="{_f(T.left)}" y2="{_f(py)}" stroke="black"/>')
        out.append(f'<text x="{_f(T.left - 8)}" y="{_f(py + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_num(y)}</text>')
    out.append(f'<text x="{_f(T.left + T.plot_w / 2)}" y="{_f(bottom + 40)}" text-anchor="middle" '
               'font-family="sans-serif" font-size="12">Re z [rad/s]</text>')
    out.append(f'<text x="18" y="{_f(T.top + T.plot_h / 2)}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" transform="rotate(-90 18 {_f(T.top + T.plot_h / 2)})">'
               'Im z [rad/s]</text>')

    out.append('<g clip-path="url(#plot)">')
    if T.re_min <= 0.0 <= T.re_max:
        x0, _ = T(0j)
        out.append(f'<line id="imag-axis" x1="{_f(x0)}" y1="{_f(T.top)}" x2="{_f(x0)}" '
                   f'y2="{_f(bottom)}" stroke="gray" stroke-dasharray="6,4" stroke-width="1"/>')
    for rank, (eps, lines) in enumerate(curves):
        color = PALETTE[rank % len(PALETTE)]
        for line in lines:
            d = " ".join(f"{_f(x)},{_f(y)}" for x, y in (T(z) for z in line))
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.2" '
                       f'data-log10-eps="{math.log10(eps):.4f}"/>')
    for z in pts:
        x, y = T(z)
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="1.2" fill="#d62728" fill-opacity="0.6"/>')
    for z in lam:
        x, y = T(z)
        out.append(f'<path class="eig" d="M{_f(x - 4)},{_f(y - 4)} L{_f(x + 4)},{_f(y + 4)} '
                   f'M{_f(x - 4)},{_f(y + 4)} L{_f(x + 4)},{_f(y - 4)}" stroke="black" stroke-width="1.5"/>')
    out.append("</g>")

    # colour bar: one swatch per level, labelled with log10(eps)
    if curves:
        bx = T.left + T.plot_w + 20
        h = T.plot_h / len(curves)
        for rank, (eps, _) in enumerate(curves):
            y = T.top + rank * h
            out.append(f'<rect x="{_f(bx)}" y="{_f(y)}" width="16" height="{_f(h)}" '
                       f'fill="{PALETTE[rank % len(PALETTE)]}"/>')
            out.append(f'<text x="{_f(bx + 22)}" y="{_f(y + h / 2 + 4)}" font-family="sans-serif" '
                       f'font-size="11">{math.log10(eps):.2f}</text>')
        out.append(f'<text x="{_f(bx)}" y="{_f(T.top - 8)}" font-family="sans-serif" '
                   'font-size="11">log10 eps</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
