"""
Level-set region maps of the approximation
==========================================

Thresholding the sliding-window averages at levels k/m carves the
square into nested regions whose boundaries are monotone staircase
curves.  The map is rasterized, audited as a partition, and the grey
(boundary) regions are guaranteed to contain no large axis square.
"""

from robinson_lab import (
    boundary_curve,
    cell_crosses,
    compute_regions,
    largest_grey_square,
    quadratic_sum,
    verify_partition,
)
from robinson_lab.render import region_csv

w = quadratic_sum(16)
rm = compute_regions(w, m=4, alpha=0.1, raster=128)
print("levels:", rm.total_levels, "(m=%d, level_max=%d)" % (rm.m, rm.level_max))
print("partition audit passes:", verify_partition(rm))

# Grey regions sit between consecutive black/white levels; none of them
# contains a square of side larger than alpha plus two raster cells.
cap = rm.alpha + 2.0 / rm.raster
for k in range(1, rm.total_levels):
    side = largest_grey_square(rm, k)
    assert side <= cap + 1e-12
print("largest grey square side:", max(
    largest_grey_square(rm, k) for k in range(1, rm.total_levels)), "cap:", cap)

# Each level zone has a staircase boundary curve sampled per pixel
# column; heights never decrease.
curve = boundary_curve(rm, "high", rm.total_levels // 2)
cols = [0, rm.raster // 2, 3 * rm.raster // 4]
print("boundary heights at columns", cols, ":", [float(curve.zs[c]) for c in cols])

# Count the coarse cells the staircase passes through (top-left corner
# strictly above the curve, bottom-right strictly below).
step = 1.0 / 16
crossing = sum(
    cell_crosses(curve, (i * step, (i + 1) * step, j * step, (j + 1) * step))
    for i in range(16) for j in range(16)
)
print("crossing cells on a 16x16 grid:", crossing)

# The raster exports to CSV for external tooling.
csv_text = region_csv(rm)
print("csv header:", csv_text.splitlines()[0])
print("csv rows:", len(csv_text.splitlines()) - 1)
