"""Robinson approximation of a step graphon via window suprema.

The key quantity is the upper-left window supremum at a point (x, y): the
largest average of w over S x T where S sits in [0, x], T sits in [y, 1] and
both have measure alpha (empty family -> 0).  Sampling it on a grid, taking
the monotone envelope and reflecting yields a Robinson step function whose
cut-norm distance to w is controlled by the deviation score.

For step graphons the supremum is attained at an extreme point of the
availability polytope (the objective is linear in each cell's membership),
which is what the exact mode enumerates; the heuristic mode alternates
fractional-knapsack best responses from a fixed family of starts and is a
deterministic lower bound.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from .core import StepGraphon, is_robinson

GUARD = 1e-15                  # feasibility slack on measures
EXTREME_POINT_BUDGET = 200_000  # exact-mode enumeration size limit


# ---------------------------------------------------------------------------
# exact window integrals

class BoxIntegrator:
    """Exact integrals of a step graphon over arbitrary rectangles.

    Precomputes the bilinear prefix integral F(x, y) = int over [0,x]x[0,y];
    rectangle integrals follow by inclusion-exclusion.  All evaluations are
    vectorised over numpy arrays of coordinates.
    """

    def __init__(self, w: StepGraphon):
        v = w.values
        n = w.n
        self.n = n
        self.v = v
        corner = np.zeros((n + 1, n + 1))
        corner[1:, 1:] = v.cumsum(axis=0).cumsum(axis=1) / (n * n)
        self._corner = corner
        rowstrip = np.zeros((n, n + 1))
        rowstrip[:, 1:] = v.cumsum(axis=1) / n     # d/dx of F within row cell
        self._rowstrip = rowstrip
        colstrip = np.zeros((n + 1, n))
        colstrip[1:, :] = v.cumsum(axis=0) / n
        self._colstrip = colstrip

    def cdf(self, x, y):
        """F(x, y), exact for the step function; x, y arrays in [0, 1]."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = self.n
        i = np.clip(np.floor(x * n).astype(np.intp), 0, n - 1)
        j = np.clip(np.floor(y * n).astype(np.intp), 0, n - 1)
        fx = x - i / n
        fy = y - j / n
        return (self._corner[i, j] + fx * self._rowstrip[i, j]
                + fy * self._colstrip[i, j] + fx * fy * self.v[i, j])

    def box(self, x1, x2, y1, y2):
        """Integral of w over [x1,x2] x [y1,y2] (coordinates may be arrays)."""
        return (self.cdf(x2, y2) - self.cdf(x1, y2)
                - self.cdf(x2, y1) + self.cdf(x1, y1))


def diagonal_band_integral(w: StepGraphon, halfwidth: float) -> float:
    """Integral of w over the band |x - y| <= halfwidth, exact."""
    n = w.n
    h = float(halfwidth)
    if h <= 0:
        return 0.0

    def area_below(c):
        # per-cell area of {y - x <= c} inside each cell, exact closed form:
        # integrate clamp(x + c - y0, 0, 1/n) over the cell's x-range
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        x0 = i / n
        y0 = j / n
        cw = 1.0 / n

        def seg_int(lo, hi):
            # integral of (x + c - y0) dx on [lo, hi], elementwise, empty -> 0
            lo_ = np.minimum(np.maximum(lo, x0), x0 + cw)
            hi_ = np.minimum(np.maximum(hi, x0), x0 + cw)
            return (0.5 * (hi_ ** 2 - lo_ ** 2) + (c - y0) * (hi_ - lo_))

        zero_at = y0 - c          # below this x the integrand is <= 0
        full_at = y0 + cw - c     # above this x the integrand caps at 1/n
        mid = seg_int(zero_at, full_at)
        top = np.clip(x0 + cw - np.maximum(full_at, x0), 0.0, cw) * cw
        return mid + top

    per_cell = area_below(h) - area_below(-h)
    return float((w.values * per_cell).sum())


# ---------------------------------------------------------------------------
# fractional knapsack responses

def _knap_fill_batch(scores, caps, alpha, minimize=False):
    """Best response of one window side: fill mass alpha through caps,
    preferring large scores (or small ones when minimising).  Batched over
    rows; returns the fill matrix (same shape)."""
    g = np.asarray(scores, dtype=np.float64)
    sign = 1.0 if minimize else -1.0
    order = np.argsort(sign * g, axis=1, kind="stable")
    cs = np.take_along_axis(caps, order, axis=1)
    cum = np.cumsum(cs, axis=1)
    fill = np.clip(alpha - (cum - cs), 0.0, cs)
    out = np.empty_like(fill)
    np.put_along_axis(out, order, fill, axis=1)
    return out


def _availability(points, n, side):
    """Availability caps per cell for S in [0, x] (side='left') or
    T in [y, 1] (side='right'); ``points`` is the array of x or y values."""
    p = np.asarray(points, dtype=np.float64)[:, None]
    edges_lo = np.arange(n)[None, :] / n
    edges_hi = (np.arange(n)[None, :] + 1) / n
    if side == "left":
        return np.clip(np.minimum(edges_hi, p) - edges_lo, 0.0, 1.0 / n)
    return np.clip(edges_hi - np.maximum(edges_lo, p), 0.0, 1.0 / n)


def _ul_heuristic_many(v, alpha, a_caps, b_caps, iters=40):
    """Vectorised alternating maximisation of the window average across many
    query points.  ``a_caps``/``b_caps`` are (P, n) availability matrices.
    Returns the best value per point (already divided by alpha^2)."""
    p_cnt, n = a_caps.shape
    colmean = v.mean(axis=0)[None, :].repeat(p_cnt, axis=0)

    # five deterministic starts for the T side
    starts = []
    asc = np.broadcast_to(np.arange(n, dtype=np.float64)[None, :], (p_cnt, n))
    starts.append(_knap_fill_batch(asc, b_caps, alpha, minimize=True))    # hug y
    starts.append(_knap_fill_batch(asc, b_caps, alpha, minimize=False))   # hug 1
    with np.errstate(invalid="ignore", divide="ignore"):
        tot = b_caps.sum(axis=1, keepdims=True)
        uni = np.where(tot > 0, b_caps * (alpha / tot), 0.0)
    starts.append(uni)                                                    # spread
    starts.append(_knap_fill_batch(colmean, b_caps, alpha))               # heavy cols
    mid = np.abs(asc - (n - 1) / 2.0)
    starts.append(_knap_fill_batch(mid, b_caps, alpha, minimize=True))    # middle

    best = np.full(p_cnt, -np.inf)
    for t in starts:
        t = t.copy()
        prev = np.full(p_cnt, -np.inf)
        for _ in range(iters):
            s = _knap_fill_batch(t @ v, a_caps, alpha)
            t = _knap_fill_batch(s @ v, b_caps, alpha)
            val = np.einsum("ij,ij->i", s @ v, t)
            if np.all(val <= prev + 1e-14):
                break
            prev = np.maximum(prev, val)
        best = np.maximum(best, prev)
    return best / (alpha * alpha)


def _extreme_side_vectors(caps, alpha, budget=EXTREME_POINT_BUDGET):
    """All extreme points of {0 <= s <= caps, sum s = alpha} as rows.

    Extremes take full caps on a subset F plus at most one fractional cell.
    |F| is bounded by how many of the smallest caps fit under alpha, so the
    enumeration walks combinations up to that size instead of all subsets.
    Raises when the extreme-point count would exceed ``budget`` (use the
    heuristic mode then).
    """
    active = np.flatnonzero(caps > GUARD)
    m = len(active)
    a = caps[active]
    kmax = int(np.searchsorted(np.cumsum(np.sort(a)), alpha + GUARD, side="right"))
    rows = []
    count = 0
    for k in range(min(kmax, m) + 1):
        for comb in itertools.combinations(range(m), k):
            idx = list(comb)
            full = float(a[idx].sum()) if k else 0.0
            rem = alpha - full
            if rem < -GUARD:
                continue
            if rem <= GUARD:
                vec = np.zeros(m)
                vec[idx] = a[idx]
                rows.append(vec[None, :])
                count += 1
            else:
                free = np.setdiff1d(np.arange(m), idx, assume_unique=True)
                good = free[a[free] >= rem - GUARD]
                if good.size:
                    block = np.zeros((good.size, m))
                    block[:, idx] = a[idx][None, :]
                    block[np.arange(good.size), good] = np.minimum(rem, a[good])
                    rows.append(block)
                    count += int(good.size)
            if count > budget:
                raise ValueError("exact mode: extreme-point budget %d exceeded; "
                                 "use the heuristic" % budget)
    if not rows:
        return np.zeros((0, len(caps)))
    packed = np.concatenate(rows, axis=0)
    out = np.zeros((packed.shape[0], len(caps)))
    out[:, active] = packed
    return out


def ul_sup(w: StepGraphon, x: float, y: float, alpha: float, mode: str = "exact") -> float:
    """Upper-left window supremum at (x, y).

    sup of the average of w over S x T with S in [0,x], T in [y,1],
    |S| = |T| = alpha; 0 when either side lacks room (sup over an empty
    family), even for signed w.

    exact mode enumerates extreme points of the smaller side and answers the
    other side by fractional knapsack (valid because the optimum of a
    bilinear form over a product of polytopes sits at a pair of extreme
    points); heuristic mode alternates knapsack responses from five
    deterministic starts and never exceeds the exact value.
    """
    if not (0 <= x <= y <= 1):
        raise ValueError("need 0 <= x <= y <= 1")
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    n = w.n
    v = w.values
    a = _availability([x], n, "left")[0]
    b = _availability([y], n, "right")[0]
    if a.sum() < alpha - GUARD or b.sum() < alpha - GUARD:
        return 0.0
    if mode == "heuristic":
        return float(_ul_heuristic_many(v, alpha, a[None, :], b[None, :])[0])
    if mode != "exact":
        raise ValueError("mode must be exact or heuristic")
    # enumerate the sparser side; the graphon is symmetric so swapping sides
    # just transposes the objective
    na, nb = int(np.count_nonzero(a > GUARD)), int(np.count_nonzero(b > GUARD))
    if na <= nb:
        s_mat = _extreme_side_vectors(a, alpha)
        scores = s_mat @ v
        resp = _knap_fill_batch(scores, np.broadcast_to(b, scores.shape), alpha)
    else:
        s_mat = _extreme_side_vectors(b, alpha)
        scores = s_mat @ v
        resp = _knap_fill_batch(scores, np.broadcast_to(a, scores.shape), alpha)
    vals = np.einsum("ij,ij->i", scores, resp)
    return float(vals.max() / (alpha * alpha)) if len(vals) else 0.0


def lr_inf(w: StepGraphon, x: float, y: float, alpha: float, mode: str = "exact") -> float:
    """Lower-right window infimum at (x, y): inf of the average of w over
    S x T with S <= T, both inside [x, y], |S| = |T| = alpha.  Returns +inf
    when y - x < 2*alpha (no room).

    The split cell shared by S and T couples the two sides (their portions
    of that cell may not overlap); candidates enumerate every split cell and
    every boundary split.  Values never undershoot the heuristic mode.
    """
    if not (0 <= x <= y <= 1):
        raise ValueError("need 0 <= x <= y <= 1")
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    if y - x < 2 * alpha - GUARD:
        return np.inf
    n = w.n
    v = w.values
    cells = np.arange(n)
    exact = mode == "exact"
    if mode not in ("exact", "heuristic"):
        raise ValueError("mode must be exact or heuristic")

    def availability_between(lo, hi):
        return np.clip(np.minimum((cells + 1) / n, hi) - np.maximum(cells / n, lo),
                       0.0, 1.0 / n)

    best = np.inf
    lo_cell = int(np.floor(x * n))
    hi_cell = min(int(np.floor(y * n)), n - 1)
    # candidate split positions: every cell boundary in [x, y] and, for each
    # cell, a coupled split inside it
    for c in range(lo_cell, hi_cell + 1):
        for split_kind in ("boundary", "interior"):
            if split_kind == "boundary":
                sp = max(x, c / n)
                a = availability_between(x, sp)
                b = availability_between(sp, y)
                couple = None
            else:
                a = availability_between(x, min((c + 1) / n, y))
                b = availability_between(max(c / n, x), y)
                couple = c
            if a.sum() < alpha - GUARD or b.sum() < alpha - GUARD:
                continue
            if exact:
                s_mat = _extreme_side_vectors(a, alpha)
                if not len(s_mat):
                    continue
                caps = np.broadcast_to(b, (s_mat.shape[0], n)).copy()
                if couple is not None:
                    room = availability_between(x, y)[couple]
                    caps[:, couple] = np.clip(room - s_mat[:, couple], 0.0, caps[:, couple])
                bad = caps.sum(axis=1) < alpha - GUARD
                scores = s_mat @ v
                resp = _knap_fill_batch(scores, caps, alpha, minimize=True)
                vals = np.einsum("ij,ij->i", scores, resp)
                if np.any(~bad):
                    best = min(best, float(vals[~bad].min()))
            else:
                idx = np.arange(n, dtype=np.float64)[None, :]
                for order, minimize in ((idx, True), (idx, False)):
                    s = _knap_fill_batch(order, a[None, :], alpha, minimize=minimize)
                    caps = b[None, :].copy()
                    if couple is not None:
                        room = availability_between(x, y)[couple]
                        caps[0, couple] = np.clip(room - s[0, couple], 0.0, caps[0, couple])
                    if caps.sum() < alpha - GUARD:
                        continue
                    t = _knap_fill_batch(s @ v, caps, alpha, minimize=True)
                    for _ in range(40):
                        s2 = _knap_fill_batch(t @ v, a[None, :], alpha, minimize=True)
                        if couple is not None:
                            room = availability_between(x, y)[couple]
                            over = s2[0, couple] + t[0, couple] - room
                            if over > 0:
                                s2[0, couple] -= min(over, s2[0, couple])
                        new_caps = b[None, :].copy()
                        if couple is not None:
                            room = availability_between(x, y)[couple]
                            new_caps[0, couple] = np.clip(room - s2[0, couple], 0.0,
                                                          new_caps[0, couple])
                        t2 = _knap_fill_batch(s2 @ v, new_caps, alpha, minimize=True)
                        if np.allclose(t2, t) and np.allclose(s2, s):
                            break
                        s, t = s2, t2
                    if abs(s.sum() - alpha) <= 1e-9 and abs(t.sum() - alpha) <= 1e-9:
                        best = min(best, float(np.einsum("ij,ij->i", s @ v, t)[0]))
    return best / (alpha * alpha) if np.isfinite(best) else np.inf


# ---------------------------------------------------------------------------
# grid sampling, envelope, closed form

def monotone_envelope(values):
    """Smallest majorant on the upper triangle that is nondecreasing in the
    row index and nonincreasing in the column index; the result is mirrored
    onto the lower triangle.  Idempotent."""
    g = np.asarray(values, dtype=np.float64)
    m = g.shape[0]
    if g.ndim != 2 or g.shape[1] != m:
        raise ValueError("square matrix expected")
    e = np.array(g)
    for i in range(m):
        for j in range(m - 1, i - 1, -1):
            val = e[i, j]
            if i > 0:
                val = max(val, e[i - 1, j])
            if j < m - 1:
                val = max(val, e[i, j + 1])
            e[i, j] = val
    iu = np.triu_indices(m, 1)
    e[(iu[1], iu[0])] = e[iu]
    return e


@dataclasses.dataclass(frozen=True)
class RobinsonApprox:
    """A Robinson step-function approximation on a g x g grid."""
    values: np.ndarray
    alpha: float
    grid_n: int
    mode: str                  # "exact", "heuristic", "closed-form" or "identity"
    robinson_validated: bool

    def as_graphon(self) -> StepGraphon:
        return StepGraphon(self.values)


def _corner_points(grid_n, alpha):
    """Conservative evaluation corners for every upper-triangle cell: cell
    (i, j) is scored at x = i/g, y = (j+1)/g, the corner where the window
    family is smallest, so the sampled step function never exceeds the
    underlying window supremum on that cell."""
    g = grid_n
    i, j = np.triu_indices(g)
    xs = i / g
    ys = (j + 1) / g
    feasible = (xs >= alpha - GUARD) & (1.0 - ys >= alpha - GUARD)
    return i, j, xs, ys, feasible


def robinson_approx(w: StepGraphon, alpha: float, grid_n: int | None = None,
                    mode: str = "auto") -> RobinsonApprox:
    """Robinson approximation: sample the window supremum on a grid, take the
    monotone envelope, reflect.

    alpha = 0 is allowed only when w is already Robinson (returns w as-is).
    mode "auto" picks exact enumeration for small problems and the
    alternating heuristic otherwise.
    """
    if alpha == 0:
        chk = is_robinson(w, 1e-12)
        if not chk.robinson:
            raise ValueError("alpha=0 demands a Robinson input (witness %s)" % (chk.witness,))
        return RobinsonApprox(values=np.array(w.values), alpha=0.0, grid_n=w.n,
                              mode="identity", robinson_validated=True)
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in [0, 1)")
    g = int(grid_n) if grid_n is not None else w.n
    if g < 1:
        raise ValueError("grid_n must be positive")
    if mode == "auto":
        mode = "exact" if (w.n <= 12 and g <= 32) else "heuristic"
    if mode not in ("exact", "heuristic"):
        raise ValueError("mode must be auto, exact or heuristic")

    i, j, xs, ys, feasible = _corner_points(g, alpha)
    vals = np.zeros(len(i))
    if mode == "exact":
        for k in np.flatnonzero(feasible):
            vals[k] = ul_sup(w, float(xs[k]), float(ys[k]), alpha, mode="exact")
    else:
        a_caps = _availability(xs[feasible], w.n, "left")
        b_caps = _availability(ys[feasible], w.n, "right")
        ok = (a_caps.sum(axis=1) >= alpha - GUARD) & (b_caps.sum(axis=1) >= alpha - GUARD)
        got = np.zeros(int(feasible.sum()))
        if np.any(ok):
            got[ok] = _ul_heuristic_many(w.values, alpha, a_caps[ok], b_caps[ok])
        vals[feasible] = got

    grid = np.zeros((g, g))
    grid[i, j] = vals
    grid = monotone_envelope(grid)
    validated = bool(is_robinson(StepGraphon(grid), 1e-12).robinson)
    grid.flags.writeable = False
    return RobinsonApprox(values=grid, alpha=float(alpha), grid_n=g,
                          mode=mode, robinson_validated=validated)


def closed_form_robinson_ae(w: StepGraphon, alpha: float,
                            grid_n: int | None = None) -> RobinsonApprox:
    """Corner-window average surrogate: at each grid corner the average of w
    over [x-alpha, x] x [y, y+alpha], zero where infeasible.

    Only Robinson inputs are accepted: there the diagonal-hugging window is
    optimal (rows and columns are monotone toward the diagonal), so the raw
    sliding average reproduces :func:`robinson_approx` without any envelope
    pass, giving an independently-coded cross-check.
    """
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    chk = is_robinson(w, 1e-9)
    if not chk.robinson:
        raise ValueError("closed form needs a Robinson input (witness %s)" % (chk.witness,))
    g = int(grid_n) if grid_n is not None else w.n
    box = BoxIntegrator(w)
    i, j, xs, ys, feasible = _corner_points(g, alpha)
    vals = np.zeros(len(i))
    f = feasible
    vals[f] = box.box(xs[f] - alpha, xs[f], ys[f], ys[f] + alpha) / (alpha * alpha)
    grid = np.zeros((g, g))
    grid[i, j] = vals
    iu = np.triu_indices(g, 1)
    grid[(iu[1], iu[0])] = grid[iu]
    validated = bool(is_robinson(StepGraphon(grid), 1e-12).robinson)
    grid.flags.writeable = False
    return RobinsonApprox(values=grid, alpha=float(alpha), grid_n=g,
                          mode="closed-form", robinson_validated=validated)
