"""Measure-theoretic helpers: splitting an interval set into equal parts with
a small-integral remainder, and shrinking a dense product set.

The split takes a union of intervals P and a step function u and cuts P into
N = ceil(|P|/beta) ordered pieces: N-1 consecutive pieces of measure beta and
one remainder of measure delta = |P| - beta(N-1) whose u-integral is at most
|int_P u| / N in absolute value.  Such a remainder window always exists: the
integrals of the measure-delta windows of the cyclic arrangement of P average
to delta/|P| times the total, and delta/|P| <= 1/N.
"""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np

from .core import CellSet, StepGraphon

_EPS = 1e-12


@dataclasses.dataclass(frozen=True)
class IntervalSet:
    """A finite union of disjoint intervals inside [0, 1], kept sorted."""
    intervals: tuple

    def __post_init__(self):
        cleaned = []
        for lo, hi in sorted((float(a), float(b)) for a, b in self.intervals):
            if hi < lo - _EPS:
                raise ValueError("inverted interval (%g, %g)" % (lo, hi))
            if hi - lo <= _EPS:
                continue
            if lo < -_EPS or hi > 1 + _EPS:
                raise ValueError("interval (%g, %g) leaves [0, 1]" % (lo, hi))
            if cleaned and lo <= cleaned[-1][1] + _EPS:
                cleaned[-1] = (cleaned[-1][0], max(cleaned[-1][1], hi))
            else:
                cleaned.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(cleaned))

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    def bounds(self):
        if not self.intervals:
            raise ValueError("empty interval set")
        return self.intervals[0][0], self.intervals[-1][1]

    def max_point(self) -> float:
        return self.bounds()[1]

    def min_point(self) -> float:
        return self.bounds()[0]


def interval_set_integral(u, s: IntervalSet) -> float:
    """Integral of the step function u (q uniform cells on [0, 1]) over s."""
    u = np.asarray(u, dtype=np.float64)
    q = len(u)
    pref = np.concatenate([[0.0], np.cumsum(u) / q])

    def antiderivative(t):
        c = min(int(math.floor(t * q)), q - 1)
        return pref[c] + (t - c / q) * u[c]

    return math.fsum(antiderivative(hi) - antiderivative(lo) for lo, hi in s.intervals)


@dataclasses.dataclass(frozen=True)
class SplitResult:
    parts: tuple               # N IntervalSets; parts[:-1] ordered, measure beta
    remainder: IntervalSet     # == parts[-1], measure delta
    remainder_integral: float
    target_bound: float        # |integral over P| / N

    @property
    def remainder_index(self) -> int:
        return len(self.parts) - 1


class _Compressed:
    """Arc-length parametrisation of an interval set, refined at the cell
    edges of the step function so the density is constant per segment."""

    def __init__(self, u, p: IntervalSet):
        u = np.asarray(u, dtype=np.float64)
        q = len(u)
        seg_real = []      # (real_lo, real_hi, value)
        for lo, hi in p.intervals:
            cuts = [lo]
            first = int(math.floor(lo * q)) + 1
            while first / q < hi - _EPS:
                if first / q > lo + _EPS:
                    cuts.append(first / q)
                first += 1
            cuts.append(hi)
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b - a > _EPS:
                    seg_real.append((a, b, u[min(int(math.floor((a + b) / 2 * q)), q - 1)]))
        self.real_lo = np.array([s[0] for s in seg_real])
        self.real_hi = np.array([s[1] for s in seg_real])
        self.val = np.array([s[2] for s in seg_real])
        lengths = self.real_hi - self.real_lo
        self.comp_edges = np.concatenate([[0.0], np.cumsum(lengths)])
        self.h_pref = np.concatenate([[0.0], np.cumsum(lengths * self.val)])
        self.length = float(self.comp_edges[-1])

    def h(self, s):
        """Integral of the density over compressed [0, s]."""
        s = min(max(float(s), 0.0), self.length)
        i = int(np.searchsorted(self.comp_edges, s, side="right")) - 1
        i = min(max(i, 0), len(self.val) - 1)
        return float(self.h_pref[i] + (s - self.comp_edges[i]) * self.val[i])

    def to_real(self, c0, c1) -> IntervalSet:
        """Map a compressed range back to real intervals."""
        pieces = []
        for i in range(len(self.val)):
            lo = max(c0, self.comp_edges[i])
            hi = min(c1, self.comp_edges[i + 1])
            if hi - lo > _EPS:
                base = self.comp_edges[i]
                pieces.append((self.real_lo[i] + (lo - base), self.real_lo[i] + (hi - lo) + (lo - base)))
        return IntervalSet(tuple(pieces))


def _first_window(comp: _Compressed, delta, bound, wrap):
    """Earliest compressed start s with |window integral| <= bound.

    Non-wrap windows are [s, s+delta] for s in [0, L-delta]; wrap windows are
    [s, L] + [0, s+delta-L] for s in [L-delta, L].  The window integral is
    piecewise linear in s, so each linear piece is solved in closed form.
    """
    ln = comp.length
    edges = comp.comp_edges
    if wrap:
        lo_s, hi_s = ln - delta, ln
        cands = np.concatenate([edges, edges + (ln - delta)])

        def val(s):
            return (comp.h(ln) - comp.h(s)) + comp.h(s - (ln - delta))
    else:
        lo_s, hi_s = 0.0, ln - delta
        cands = np.concatenate([edges, edges - delta])

        def val(s):
            return comp.h(s + delta) - comp.h(s)

    # scan right-to-left so that when many windows qualify the remainder sits
    # at the tail of P (the even-chop convention)
    grid = np.unique(np.clip(np.concatenate([cands, [lo_s, hi_s]]), lo_s, hi_s))
    for s0, s1 in zip(grid[-2::-1], grid[::-1]):
        i0, i1 = val(s0), val(s1)
        if abs(i1) <= bound + 1e-15:
            return float(s1)
        hits = []
        for target in (bound, -bound):
            if (i0 - target) * (i1 - target) < 0:
                hits.append(s0 + (target - i0) * (s1 - s0) / (i1 - i0))
        if hits:
            return float(max(hits))
    if grid.size and abs(val(grid[0])) <= bound + 1e-15:
        return float(grid[0])
    return None


def split_with_small_remainder(u, p: IntervalSet, beta: float) -> SplitResult:
    """Split P into ceil(|P|/beta) ordered parts: all but one of measure beta,
    the leftover of measure delta <= beta with |integral| <= |int_P u|/N.

    ``u`` is a step function given as a vector of cell values (for a step
    graphon pass one row of ``w.values``).
    """
    length = p.measure
    if length <= _EPS:
        raise ValueError("empty interval set")
    if not 0 < beta < length:
        raise ValueError("beta out of range (0, measure(P))")
    n_parts = max(1, int(math.ceil(length / beta - 1e-12)))
    delta = length - beta * (n_parts - 1)
    if delta <= _EPS or delta > beta + _EPS:
        raise ValueError("degenerate remainder measure %g" % delta)

    comp = _Compressed(u, p)
    total = comp.h(comp.length)
    if total == 0.0:
        raise ValueError("integral of u over P vanishes")
    bound = abs(total) / n_parts

    if n_parts == 1:
        return SplitResult(parts=(p,), remainder=p,
                           remainder_integral=interval_set_integral(u, p),
                           target_bound=bound)

    start = _first_window(comp, delta, bound, wrap=False)
    wrapped = False
    if start is None:
        start = _first_window(comp, delta, bound, wrap=True)
        wrapped = start is not None
    if start is None:
        # densified numeric retry, then give up (the averaging argument says
        # this is unreachable, but guard against float corner cases)
        for factor in (4, 16):
            dense = np.linspace(0, comp.length - delta, factor * 512)
            vals = np.array([comp.h(s + delta) - comp.h(s) for s in dense])
            hit = np.flatnonzero(np.abs(vals) <= bound + 1e-12)
            if hit.size:
                start = float(dense[hit[-1]])
                break
    if start is None:
        raise ArithmeticError("no small-integral window found")

    if wrapped:
        remainder = IntervalSet(comp.to_real(start, comp.length).intervals
                                + comp.to_real(0.0, start + delta - comp.length).intervals)
        body = [(start + delta - comp.length, start)]
    else:
        remainder = comp.to_real(start, start + delta)
        body = [(0.0, start), (start + delta, comp.length)]

    # chop the remaining mass into consecutive measure-beta parts, walking the
    # leftover compressed ranges in order
    parts = []
    walk = []   # flattened consecutive compressed ranges
    for lo, hi in body:
        if hi - lo > _EPS:
            walk.append((lo, hi))
    acc = 0.0
    cur = []
    widx = 0
    pos = walk[0][0] if walk else 0.0
    for _ in range(n_parts - 1):
        need = beta
        pieces = []
        while need > _EPS and widx < len(walk):
            lo, hi = walk[widx]
            take = min(need, hi - pos)
            pieces.append((pos, pos + take))
            need -= take
            pos += take
            if hi - pos <= _EPS:
                widx += 1
                pos = walk[widx][0] if widx < len(walk) else pos
        part_pieces = []
        for lo, hi in pieces:
            part_pieces.extend(comp.to_real(lo, hi).intervals)
        parts.append(IntervalSet(tuple(part_pieces)))
    parts.append(remainder)
    return SplitResult(parts=tuple(parts), remainder=remainder,
                       remainder_integral=interval_set_integral(u, remainder),
                       target_bound=bound)


# ---------------------------------------------------------------------------
# density-preserving shrink

def _cond_value(b, i_in, j_in, l1, l2):
    """Expected box sum when the chosen chunks are fixed and the remaining
    slots are filled uniformly at random."""
    k1, k2 = b.shape
    ip = ~i_in
    jp = ~j_in
    a, bb = int(i_in.sum()), int(j_in.sum())
    np_i, np_j = int(ip.sum()), int(jp.sum())
    s_cc = b[np.ix_(i_in, j_in)].sum()
    s_cp = b[np.ix_(i_in, jp)].sum()
    s_pc = b[np.ix_(ip, j_in)].sum()
    s_pp = b[np.ix_(ip, jp)].sum()

    def frac(need, pool):
        return (need / pool) if pool else 0.0

    return (s_cc + frac(l2 - bb, np_j) * s_cp + frac(l1 - a, np_i) * s_pc
            + frac(l1 - a, np_i) * frac(l2 - bb, np_j) * s_pp)


def pigeonhole_shrink(f: StepGraphon, rows: CellSet, cols: CellSet, alpha: float):
    """Shrink the product rows x cols to an alpha-fraction on each side while
    not decreasing the average of f (assuming the starting integral is
    positive).  Deterministic: a conditional-expectation greedy, with an
    exhaustive fallback on small instances.  Returns (rowSubset, colSubset).
    """
    q = f.n
    if rows.resolution != q or cols.resolution != q:
        raise ValueError("cell sets must live at the graphon resolution")
    k1, k2 = len(rows.indices), len(cols.indices)
    if k1 == 0 or k2 == 0:
        raise ValueError("empty cell set")
    if k1 != k2:
        raise ValueError("cell sets must have equal measure")
    l1r, l2r = alpha * k1, alpha * k2
    l1, l2 = int(round(l1r)), int(round(l2r))
    if abs(l1 - l1r) > 1e-9 or abs(l2 - l2r) > 1e-9 or l1 < 1 or l2 < 1:
        raise ValueError("alpha*|set| must be a positive whole number of cells")

    b = f.values[np.ix_(rows.as_array(), cols.as_array())] / (q * q)
    total = b.sum()
    if not total > 0:
        raise ValueError("nonpositive starting integral")
    target_density = total / ((k1 / q) * (k2 / q))

    i_in = np.zeros(k1, dtype=bool)
    j_in = np.zeros(k2, dtype=bool)
    while i_in.sum() < l1 or j_in.sum() < l2:
        best = None
        if i_in.sum() < l1:
            for r in np.flatnonzero(~i_in):
                i_in[r] = True
                val = _cond_value(b, i_in, j_in, l1, l2)
                i_in[r] = False
                if best is None or val > best[0] + 1e-15:
                    best = (val, "row", int(r))
        if j_in.sum() < l2:
            for c in np.flatnonzero(~j_in):
                j_in[c] = True
                val = _cond_value(b, i_in, j_in, l1, l2)
                j_in[c] = False
                if best is None or val > best[0] + 1e-15:
                    best = (val, "col", int(c))
        if best[1] == "row":
            i_in[best[2]] = True
        else:
            j_in[best[2]] = True

    chosen = b[np.ix_(i_in, j_in)].sum()
    density = chosen / ((l1 / q) * (l2 / q))
    if density < target_density - 1e-12 and max(k1, k2) <= 16:
        # exhaustive: for each row subset the best columns are the l2 largest
        # column sums
        best_val, best_pair = -np.inf, None
        for comb in itertools.combinations(range(k1), l1):
            colsum = b[list(comb), :].sum(axis=0)
            order = np.argsort(-colsum, kind="stable")[:l2]
            val = colsum[order].sum()
            if val > best_val + 1e-15:
                best_val, best_pair = val, (comb, tuple(sorted(int(c) for c in order)))
        i_in = np.zeros(k1, dtype=bool)
        j_in = np.zeros(k2, dtype=bool)
        i_in[list(best_pair[0])] = True
        j_in[list(best_pair[1])] = True

    density = b[np.ix_(i_in, j_in)].sum() / ((l1 / q) * (l2 / q))
    if density < target_density - 1e-9:
        raise AssertionError("density guarantee missed: %g < %g"
                             % (density, target_density))
    row_idx = tuple(rows.indices[i] for i in np.flatnonzero(i_in))
    col_idx = tuple(cols.indices[j] for j in np.flatnonzero(j_in))
    return CellSet(q, row_idx), CellSet(q, col_idx)
