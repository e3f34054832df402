"""SVG rendering of curves, surgery results, flows, and decompositions.

Plots are diagnostics, not a contract: 2D instances render directly,
higher dimensions render an axis-aligned projection chosen by index pair.
Taxicab edges render through their L-path corners.
"""

from __future__ import annotations

import numpy as np

from .curves import PiecewiseGeodesicCurve


def _polyline_points(curve: PiecewiseGeodesicCurve, proj):
    prims, _, _ = curve.prims()
    dim = curve.space.dim
    if len(prims) == 0:
        p = np.asarray(curve.start)[list(proj)]
        return np.asarray([p])
    pts = [prims[0, :dim][list(proj)]]
    for row in prims:
        pts.append(row[dim:][list(proj)])
    return np.asarray(pts)


def _color(k: int) -> str:
    hue = (k * 137.508) % 360.0
    return f"hsl({hue:.0f},70%,45%)"


class SvgCanvas:
    def __init__(self, width: int = 640, margin: float = 20.0):
        self.width = width
        self.margin = margin
        self.items: list[tuple[np.ndarray, dict]] = []
        self.dots: list[tuple[np.ndarray, dict]] = []

    def add_polyline(self, pts: np.ndarray, color: str, width: float = 1.5,
                     opacity: float = 1.0):
        self.items.append((np.asarray(pts, dtype=float),
                           {"color": color, "width": width, "opacity": opacity}))

    def add_dots(self, pts: np.ndarray, color: str = "#333", r: float = 2.0):
        self.dots.append((np.asarray(pts, dtype=float), {"color": color, "r": r}))

    def write(self, path: str):
        all_pts = [p for p, _ in self.items] + [p for p, _ in self.dots]
        cloud = np.concatenate(all_pts) if all_pts else np.zeros((1, 2))
        lo, hi = cloud.min(axis=0), cloud.max(axis=0)
        span = np.maximum(hi - lo, 1e-12)
        scale = (self.width - 2 * self.margin) / span.max()
        height = int(span[1] * scale + 2 * self.margin)

        def tx(p):
            x = self.margin + (p[0] - lo[0]) * scale
            y = height - self.margin - (p[1] - lo[1]) * scale
            return x, y

        rows = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{height}" viewBox="0 0 {self.width} {height}">',
                '<rect width="100%" height="100%" fill="white"/>']
        for pts, style in self.items:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(tx, pts))
            rows.append(
                f'<polyline points="{coords}" fill="none" '
                f'stroke="{style["color"]}" stroke-width="{style["width"]}" '
                f'stroke-opacity="{style["opacity"]}" '
                'stroke-linejoin="round" stroke-linecap="round"/>')
        for pts, style in self.dots:
            for p in pts:
                x, y = tx(p)
                rows.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{style["r"]}" '
                            f'fill="{style["color"]}"/>')
        rows.append("</svg>")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows))


def render_curves(curves, path: str, proj=(0, 1), width: int = 640,
                  base_color: str | None = None):
    canvas = SvgCanvas(width)
    for k, curve in enumerate(curves):
        canvas.add_polyline(_polyline_points(curve, proj),
                            base_color or _color(k))
    canvas.write(path)


def render_surgery(input_curve, pieces, path: str, proj=(0, 1), width: int = 640):
    canvas = SvgCanvas(width)
    canvas.add_polyline(_polyline_points(input_curve, proj), "#bbbbbb", 3.0, 0.8)
    for k, piece in enumerate(pieces):
        canvas.add_polyline(_polyline_points(piece, proj), _color(k), 1.3)
    canvas.write(path)


def render_flow(flow, path: str, proj=(0, 1), width: int = 640):
    canvas = SvgCanvas(width)
    nodes = np.asarray(flow.nodes)[:, list(proj)]
    fmax = max((abs(f) for _, _, f in flow.edges), default=1.0) or 1.0
    for i, j, f in flow.edges:
        if f == 0.0:
            continue
        seg = nodes[[i, j]] if f > 0 else nodes[[j, i]]
        canvas.add_polyline(seg, "#2266aa", 0.5 + 2.5 * abs(f) / fmax, 0.85)
    canvas.add_dots(nodes)
    canvas.write(path)


def render_atoms(deco, path: str, proj=(0, 1), width: int = 640):
    canvas = SvgCanvas(width)
    lmax = max((lam for lam, _ in deco.atoms), default=1.0) or 1.0
    for k, (lam, curve) in enumerate(deco.atoms):
        if curve.length == 0.0:
            continue
        canvas.add_polyline(_polyline_points(curve, proj), _color(k),
                            0.6 + 2.0 * lam / lmax)
    canvas.write(path)
