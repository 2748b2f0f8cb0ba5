"""Deterministic rendering of heatmaps, gaze plots, and time-coded scatters.

Heatmaps are rasters: one isotropic Gaussian kernel of unit mass per
fixation accumulated onto a density field, normalized by the field maximum,
then mapped through a linear RGB gradient (alpha scales with density, so
zero-density pixels are fully transparent).  Gaze plots and scatter plots
are vector layers (SVG).  No renderer consults a clock or an RNG, so equal
inputs give byte-identical output.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field as dataclass_field
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image

from gazekit.errors import BadWindow, OutOfBounds

if TYPE_CHECKING:  # pragma: no cover
    from gazekit.cluster import ClusterModel
    from gazekit.fixation import Fixation
    from gazekit.ingest import ScreenSpec

RGB = tuple[int, int, int]

# Assignment palette for cluster overlays (distinct, colorblind-aware picks).
PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def hex_color(rgb: RGB) -> str:
    return "#%02x%02x%02x" % rgb


def parse_hex_color(text: str) -> RGB:
    """Parse 'RRGGBB' (leading '#' optional); raises ValueError otherwise."""
    text = text.removeprefix("#")
    if len(text) != 6:
        raise ValueError(f"expected 6 hex digits, got {text!r}")
    return tuple(int(text[i : i + 2], 16) for i in (0, 2, 4))


@dataclass(frozen=True)
class Gradient:
    """Two-point color ramp, interpolated linearly in RGB."""

    low_color: RGB = (0, 255, 0)
    high_color: RGB = (255, 0, 0)

    def at(self, t: float) -> RGB:
        t = min(max(t, 0.0), 1.0)
        return tuple(
            round(lo + t * (hi - lo)) for lo, hi in zip(self.low_color, self.high_color)
        )


@dataclass(frozen=True)
class HeatmapConfig:
    kernel_sigma_px: float = 25.0
    gradient: Gradient = Gradient()
    opacity: float = 0.6

    def __post_init__(self):
        if self.kernel_sigma_px <= 0:
            raise ValueError("kernel_sigma_px must be positive")
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError("opacity must lie in [0, 1]")


# --- layer containers -------------------------------------------------------

@dataclass
class RasterLayer:
    kind: str
    width: int
    height: int
    field: np.ndarray  # (H, W) float64 raw density
    rgba: np.ndarray  # (H, W, 4) uint8
    media_type: str = "image/png"

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.rgba, mode="RGBA").save(buf, format="PNG")
        return buf.getvalue()

    def to_bytes(self) -> bytes:
        return self.to_png()


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float
    fill: str
    stroke: str = "none"
    stroke_width: float = 0.0
    opacity: float = 1.0
    role: str = "marker"

    def to_svg(self) -> str:
        return (
            f'<circle cx="{self.cx:.3f}" cy="{self.cy:.3f}" r="{self.r:.3f}" '
            f'fill="{self.fill}" fill-opacity="{self.opacity:.3f}" '
            f'stroke="{self.stroke}" stroke-width="{self.stroke_width:.3f}"/>'
        )


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float
    stroke: str = "#555555"
    width: float = 1.5
    role: str = "link"

    def to_svg(self) -> str:
        return (
            f'<line x1="{self.x1:.3f}" y1="{self.y1:.3f}" x2="{self.x2:.3f}" '
            f'y2="{self.y2:.3f}" stroke="{self.stroke}" stroke-width="{self.width:.3f}"/>'
        )


@dataclass(frozen=True)
class Text:
    x: float
    y: float
    content: str
    fill: str = "#000000"
    size: float = 10.0
    role: str = "number"

    def to_svg(self) -> str:
        return (
            f'<text x="{self.x:.3f}" y="{self.y:.3f}" font-size="{self.size:.1f}" '
            f'text-anchor="middle" dominant-baseline="central" '
            f'fill="{self.fill}">{self.content}</text>'
        )


@dataclass(frozen=True)
class CrossMarker:
    cx: float
    cy: float
    size: float = 7.0
    stroke: str = "#000000"
    role: str = "center"

    def to_svg(self) -> str:
        s = self.size
        return (
            f'<path d="M {self.cx - s:.3f} {self.cy - s:.3f} L {self.cx + s:.3f} '
            f'{self.cy + s:.3f} M {self.cx - s:.3f} {self.cy + s:.3f} L '
            f'{self.cx + s:.3f} {self.cy - s:.3f}" stroke="{self.stroke}" '
            f'stroke-width="2.000" fill="none"/>'
        )


@dataclass(frozen=True)
class ImageRef:
    """Stimulus underlay referenced by path (not embedded)."""

    href: str
    width: int
    height: int
    role: str = "stimulus"

    def to_svg(self) -> str:
        return (
            f'<image href="{self.href}" x="0" y="0" width="{self.width}" '
            f'height="{self.height}" preserveAspectRatio="none"/>'
        )


@dataclass(frozen=True)
class EllipseOutline:
    cx: float
    cy: float
    rx: float
    ry: float
    angle_deg: float
    stroke: str = "#000000"
    role: str = "ellipse"

    def to_svg(self) -> str:
        return (
            f'<ellipse cx="{self.cx:.3f}" cy="{self.cy:.3f}" rx="{self.rx:.3f}" '
            f'ry="{self.ry:.3f}" transform="rotate({self.angle_deg:.3f} '
            f'{self.cx:.3f} {self.cy:.3f})" fill="none" stroke="{self.stroke}" '
            f'stroke-width="1.500"/>'
        )


@dataclass
class VectorLayer:
    kind: str
    width: int
    height: int
    elements: list = dataclass_field(default_factory=list)
    media_type: str = "image/svg+xml"

    def markers(self) -> list[Circle]:
        return [e for e in self.elements if getattr(e, "role", "") == "marker"]

    def to_svg(self) -> bytes:
        body = "\n".join(e.to_svg() for e in self.elements)
        doc = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f"{body}\n</svg>\n"
        )
        return doc.encode("utf-8")

    def to_bytes(self) -> bytes:
        return self.to_svg()


def _check_in_bounds(fixations: list[Fixation], screen: ScreenSpec) -> None:
    for f in fixations:
        if not (0 <= f.cx <= screen.width and 0 <= f.cy <= screen.height):
            raise OutOfBounds(
                f"fixation centroid ({f.cx}, {f.cy}) outside "
                f"{screen.width}x{screen.height} screen"
            )


def render_heatmap(
    fixations: list[Fixation], screen: ScreenSpec, cfg: HeatmapConfig | None = None
) -> RasterLayer:
    """Fixation-count heatmap: one Gaussian kernel per fixation centroid.

    The density field is normalized by its maximum, so the hottest pixel
    maps exactly to the gradient's high color and duplicated fixations at
    one point change nothing.  Kernels are evaluated at integer pixel
    coordinates and truncated at 6 sigma (relative error < 2e-8).
    An empty fixation list gives a fully transparent layer.
    """
    cfg = cfg or HeatmapConfig()
    _check_in_bounds(fixations, screen)
    w, h = screen.width, screen.height
    field = np.zeros((h, w))
    sigma = cfg.kernel_sigma_px
    radius = int(math.ceil(6.0 * sigma))
    norm_const = 1.0 / (2.0 * math.pi * sigma * sigma)
    for f in fixations:
        x0 = max(0, math.ceil(f.cx - radius))
        x1 = min(w - 1, math.floor(f.cx + radius))
        y0 = max(0, math.ceil(f.cy - radius))
        y1 = min(h - 1, math.floor(f.cy + radius))
        xs = np.arange(x0, x1 + 1, dtype=float)
        ys = np.arange(y0, y1 + 1, dtype=float)
        gx = np.exp(-((xs - f.cx) ** 2) / (2.0 * sigma * sigma))
        gy = np.exp(-((ys - f.cy) ** 2) / (2.0 * sigma * sigma))
        field[y0 : y1 + 1, x0 : x1 + 1] += norm_const * np.outer(gy, gx)

    rgba = np.zeros((h, w, 4), dtype=np.uint8)
    peak = field.max()
    if peak > 0.0:
        norm = field / peak
        low = np.array(cfg.gradient.low_color, dtype=float)
        high = np.array(cfg.gradient.high_color, dtype=float)
        rgb = low[None, None, :] + norm[:, :, None] * (high - low)[None, None, :]
        rgba[:, :, :3] = np.rint(rgb).astype(np.uint8)
        rgba[:, :, 3] = np.rint(255.0 * cfg.opacity * norm).astype(np.uint8)
    return RasterLayer(kind="heatmap", width=w, height=h, field=field, rgba=rgba)


def render_gazeplot(
    fixations: list[Fixation],
    screen: ScreenSpec,
    r_min: float = 6.0,
    r_scale: float = 0.02,
) -> VectorLayer:
    """Numbered duration-scaled circles joined by segments in temporal order.

    Circle radius is r_min + r_scale * duration_ms.
    """
    _check_in_bounds(fixations, screen)
    ordered = sorted(fixations, key=lambda f: f.onset)
    layer = VectorLayer(kind="gazeplot", width=screen.width, height=screen.height)
    for a, b in zip(ordered, ordered[1:]):
        layer.elements.append(Segment(a.cx, a.cy, b.cx, b.cy))
    for i, f in enumerate(ordered):
        layer.elements.append(
            Circle(
                f.cx, f.cy, r_min + r_scale * f.duration,
                fill="#4c78a8", stroke="#ffffff", stroke_width=1.0, opacity=0.75,
            )
        )
        layer.elements.append(Text(f.cx, f.cy, str(i + 1), fill="#ffffff"))
    return layer


def render_scatter(
    fixations: list[Fixation],
    screen: ScreenSpec,
    time_window: tuple[float, float] | None = None,
    gradient: Gradient | None = None,
    marker_r: float = 4.0,
) -> VectorLayer:
    """One marker per fixation, colored by onset along the gradient.

    Colors interpolate over the onset span of the *full* fixation list, so
    brushing a window keeps each marker's color stable; the window then
    selects markers with onset in [t0, t1] (inclusive).  Raises BadWindow
    when t0 > t1.
    """
    gradient = gradient or Gradient()
    _check_in_bounds(fixations, screen)
    if time_window is not None and time_window[0] > time_window[1]:
        raise BadWindow(f"window start {time_window[0]} exceeds end {time_window[1]}")

    layer = VectorLayer(kind="scatter", width=screen.width, height=screen.height)
    if not fixations:
        return layer
    onsets = [f.onset for f in fixations]
    t_min, t_max = min(onsets), max(onsets)
    span = t_max - t_min
    for f in sorted(fixations, key=lambda f: f.onset):
        if time_window is not None and not (time_window[0] <= f.onset <= time_window[1]):
            continue
        t = (f.onset - t_min) / span if span > 0 else 0.0
        layer.elements.append(
            Circle(f.cx, f.cy, marker_r, fill=hex_color(gradient.at(t)), opacity=0.9)
        )
    return layer


def overlay_clusters(layer: VectorLayer, model: ClusterModel) -> VectorLayer:
    """Recolor a layer's markers by hard assignment and draw cluster centers.

    The layer's markers must correspond, in order, to the model's point
    rows.  Soft models additionally get a 2-sigma covariance ellipse per
    component.
    """
    labels = model.hard_labels()
    markers = layer.markers()
    if len(markers) != len(labels):
        raise ValueError(
            f"layer has {len(markers)} markers but model covers {len(labels)} points"
        )
    out = VectorLayer(kind=layer.kind, width=layer.width, height=layer.height)
    marker_idx = 0
    for e in layer.elements:
        if getattr(e, "role", "") == "marker":
            color = PALETTE[labels[marker_idx] % len(PALETTE)]
            out.elements.append(
                Circle(e.cx, e.cy, e.r, fill=color, stroke=e.stroke,
                       stroke_width=e.stroke_width, opacity=e.opacity)
            )
            marker_idx += 1
        else:
            out.elements.append(e)

    if model.covariances is not None:
        for j in range(model.k):
            evals, evecs = np.linalg.eigh(model.covariances[j])
            angle = math.degrees(math.atan2(evecs[1, 1], evecs[0, 1]))
            out.elements.append(
                EllipseOutline(
                    cx=float(model.means[j, 0]), cy=float(model.means[j, 1]),
                    rx=2.0 * math.sqrt(max(evals[1], 0.0)),
                    ry=2.0 * math.sqrt(max(evals[0], 0.0)),
                    angle_deg=angle, stroke=PALETTE[j % len(PALETTE)],
                )
            )
    for j in range(model.k):
        out.elements.append(
            CrossMarker(float(model.means[j, 0]), float(model.means[j, 1]),
                        stroke=PALETTE[j % len(PALETTE)])
        )
    return out
