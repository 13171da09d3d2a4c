"""Self-contained SVG/CSV emission (no plotting dependency).

Heatmaps are grayscale, one rect per cell, linear between the recorded min and
max (annotated in the file); region maps are indexed-color, one fill per
label, plus a CSV pixel dump.  All output is byte-deterministic: fixed float
formatting (17 significant digits), no timestamps, '\\n' newlines.
"""

from __future__ import annotations

import numpy as np

from .core import StepGraphon
from .regions import RegionMap

_FMT = "%.17g"

_GREY_FILL = "#7f7f7f"


def _fmt(x) -> str:
    return _FMT % (float(x),)


def _as_values(obj) -> np.ndarray:
    if isinstance(obj, StepGraphon):
        return obj.values
    values = getattr(obj, "values", obj)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("need a square matrix, a StepGraphon or an approximation")
    return arr


def heatmap_svg(obj) -> str:
    """Grayscale heatmap of a step function (dark = large value).

    Row i of the matrix is drawn at vertical position i (matrix orientation),
    so the diagonal runs top-left to bottom-right.  A constant input is
    rendered mid-tone and flagged "uniform" in the description and legend.
    """
    v = _as_values(obj)
    n = v.shape[0]
    lo, hi = float(v.min()), float(v.max())
    uniform = not hi > lo
    if uniform:
        t = np.full_like(v, 0.5)
    else:
        t = (v - lo) / (hi - lo)
    grey = 255 - np.rint(255.0 * t).astype(int)

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 %d %d" '
               'width="512" height="%d" shape-rendering="crispEdges">'
               % (n, n + max(1, n // 8), 512 * (n + max(1, n // 8)) // n))
    out.append('<desc>heatmap n=%d min=%s max=%s uniform=%s</desc>'
               % (n, _fmt(lo), _fmt(hi), "true" if uniform else "false"))
    for i in range(n):
        row = grey[i]
        for j in range(n):
            g = int(row[j])
            out.append('<rect x="%d" y="%d" width="1" height="1" fill="#%02x%02x%02x"/>'
                       % (j, i, g, g, g))
    legend_y = _fmt(n + max(1, n // 8) * 0.7)
    size = _fmt(max(1, n // 8) * 0.55)
    tag = " (uniform)" if uniform else ""
    out.append('<text x="0" y="%s" font-size="%s" font-family="monospace">'
               'min=%s max=%s%s</text>' % (legend_y, size, _fmt(lo), _fmt(hi), tag))
    out.append('</svg>')
    return "\n".join(out) + "\n"


def render_heatmap(obj, path) -> None:
    """Write the grayscale heatmap of a graphon/approximation to ``path``."""
    data = heatmap_svg(obj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)


def _mirrored_labels(rm: RegionMap) -> np.ndarray:
    lab = rm.label_array()
    return np.where(lab == -1, lab.T, lab)


def _label_fill(label: int, total: int) -> str:
    if label <= -2:
        return _GREY_FILL
    # bands alternate black/white with the diagonal band black
    if (total - 1 - label) % 2 == 0:
        return "#000000"
    return "#ffffff"


def region_svg(rm: RegionMap) -> str:
    """Indexed-color map of the band/grey partition, mirrored to the full square.

    Bands alternate black and white (diagonal band black); grey squares are
    literally grey.  Pixel (a, b) is drawn with the first coordinate pointing
    down, matching the heatmap orientation.
    """
    lab = _mirrored_labels(rm)
    r = rm.raster
    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 %d %d" '
               'width="512" height="512" shape-rendering="crispEdges">' % (r, r))
    out.append('<desc>regions raster=%d m=%d levels=%d alpha=%s</desc>'
               % (r, rm.m, rm.level_max, _fmt(rm.alpha)))
    total = rm.total_levels
    for a in range(r):
        row = lab[a]
        for b in range(r):
            out.append('<rect x="%d" y="%d" width="1" height="1" fill="%s"/>'
                       % (b, a, _label_fill(int(row[b]), total)))
    out.append('</svg>')
    return "\n".join(out) + "\n"


def region_csv(rm: RegionMap) -> str:
    """CSV pixel dump of the label map (mirrored full square).

    One comment header line, then raster rows of comma-separated integer
    labels: band level k >= 0, grey squares encoded as -(2 + level).
    """
    lab = _mirrored_labels(rm)
    lines = ["# regions raster=%d m=%d levels=%d alpha=%s"
             % (rm.raster, rm.m, rm.level_max, _fmt(rm.alpha))]
    for a in range(rm.raster):
        lines.append(",".join("%d" % x for x in lab[a]))
    return "\n".join(lines) + "\n"


def render_regions(rm: RegionMap, svg_path=None, csv_path=None) -> None:
    """Write the region map as SVG and/or CSV."""
    if svg_path is None and csv_path is None:
        raise ValueError("need at least one output path")
    if svg_path is not None:
        with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(region_svg(rm))
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(region_csv(rm))
