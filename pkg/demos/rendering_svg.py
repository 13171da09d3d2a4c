"""
Rendering kernels and region maps as SVG
========================================

Heatmaps shade each grid cell on a linear grayscale between the matrix
minimum and maximum; region maps paint the rasterized level zones.
Output is plain SVG text, byte-stable across runs.
"""

import pathlib

from robinson_lab import compute_regions, quadratic_sum, robinson_approx, smooth_exp
from robinson_lab.render import heatmap_svg, region_svg, render_heatmap, render_regions

out = pathlib.Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

# A smooth kernel and its Robinson approximation, side by side.
w = smooth_exp(64, rate=4.0)
ra = robinson_approx(w, alpha=0.125)
render_heatmap(w, out / "smooth.svg")
render_heatmap(ra, out / "smooth_approx.svg")
print("wrote", out / "smooth.svg", "and", out / "smooth_approx.svg")

# The legend row below the matrix states the value range; constant
# input is flagged instead of dividing by a zero range.
svg = heatmap_svg(w)
desc = next(line for line in svg.splitlines() if "<desc>" in line)
print("desc:", desc.strip())

# Region maps render black/white/grey zones at raster resolution.
rm = compute_regions(quadratic_sum(16), m=4, alpha=0.1, raster=128)
render_regions(rm, svg_path=out / "regions.svg", csv_path=out / "regions.csv")
print("wrote", out / "regions.svg", "and", out / "regions.csv")

# Determinism: the same input yields the same bytes.
assert heatmap_svg(w) == heatmap_svg(w)
assert region_svg(rm) == region_svg(rm)
print("renders are byte-stable")
