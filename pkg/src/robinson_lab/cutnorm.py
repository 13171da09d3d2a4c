"""Cut norm of step graphons: exact subset enumeration and alternating local search.

For a step function the supremum over measurable boxes S x T is attained on
cell-aligned sets: the box integral is linear in each cell's fractional
membership, so some extreme point (an indicator vector) is optimal.  Both
solvers below therefore work directly on cell subsets.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .core import CellSet, StepGraphon

EXACT_HARD_CAP = 24          # absolute limit on 2^n enumeration
DEFAULT_DISPATCH_CAP = 16    # dispatcher switches to local search above this
_CHUNK_BITS = 16


@dataclasses.dataclass(frozen=True)
class CutNormResult:
    value: float
    witness_s: CellSet
    witness_t: CellSet
    mode: str            # "exact" or "localsearch"
    exact: bool

    def box_integral(self, w: StepGraphon) -> float:
        """|integral of w over witness_s x witness_t| recomputed from scratch."""
        return abs(_box_value(w.values, self.witness_s.as_array(),
                              self.witness_t.as_array(), w.n))


def _box_value(v, s_idx, t_idx, n):
    # correctly-rounded box integral: fsum the participating cells
    if len(s_idx) == 0 or len(t_idx) == 0:
        return 0.0
    return math.fsum(v[np.ix_(s_idx, t_idx)].ravel().tolist()) / (n * n)


def _mask_bits(masks, n):
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)


def cut_norm_exact(w: StepGraphon, cap: int = EXACT_HARD_CAP) -> CutNormResult:
    """Exact cut norm by enumerating all 2^n row subsets.

    For each subset S the best T is read off the signs of the column sums,
    once per sign of the objective.  Ties are broken toward the smallest
    subset bitmask (bit i = cell i).  Feasible for n <= 24.
    """
    n = w.n
    if n > min(cap, EXACT_HARD_CAP):
        raise ValueError("n=%d exceeds exact enumeration cap %d" % (n, min(cap, EXACT_HARD_CAP)))
    v = w.values
    total = 1 << n
    chunk = 1 << min(_CHUNK_BITS, n)

    # pass 1: per-chunk maxima of the raw (unnormalised) objective
    chunk_best = []
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        c = _mask_bits(masks, n) @ v
        pos = np.where(c > 0, c, 0.0).sum(axis=1)
        neg = np.where(c < 0, -c, 0.0).sum(axis=1)
        chunk_best.append(float(np.maximum(pos, neg).max()))
    best_raw = max(chunk_best)

    # pass 2: fsum-refine every near-optimal candidate; ties go to the
    # smallest S mask, then the smallest T mask (bit i = cell i)
    best = None   # ((-value, s_mask, t_mask), s_idx, t_idx)
    slack = 1e-9 * max(1.0, abs(best_raw))
    for ci, lo in enumerate(range(0, total, chunk)):
        if chunk_best[ci] < best_raw - slack:
            continue
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        c = _mask_bits(masks, n) @ v
        pos = np.where(c > 0, c, 0.0).sum(axis=1)
        neg = np.where(c < 0, -c, 0.0).sum(axis=1)
        for row in np.flatnonzero(np.maximum(pos, neg) >= best_raw - slack):
            mask = int(masks[row])
            s_idx = np.flatnonzero((mask >> np.arange(n)) & 1)
            for sign, branch in ((1.0, pos[row]), (-1.0, neg[row])):
                if branch < best_raw - slack:
                    continue
                t_idx = np.flatnonzero(sign * c[row] > 0)
                val = abs(_box_value(v, s_idx, t_idx, n))
                t_mask = int(sum(1 << int(j) for j in t_idx))
                key = (-val, mask, t_mask)
                if best is None or key < best[0]:
                    best = (key, s_idx, t_idx)
    (neg_val, _, _), s_idx, t_idx = best
    return CutNormResult(value=-neg_val,
                         witness_s=CellSet(n, tuple(int(i) for i in s_idx)),
                         witness_t=CellSet(n, tuple(int(i) for i in t_idx)),
                         mode="exact", exact=True)


def cut_norm_local_search(w: StepGraphon, restarts: int = 50, seed: int = 0) -> CutNormResult:
    """Alternating-maximisation lower bound on the cut norm.

    Each restart draws a random row subset, then alternates: fix S, set
    T = {j : column sum > 0}; fix T, reset S likewise; repeat to a fixed
    point.  Both signs of the objective are searched.  Deterministic for a
    given seed, and never exceeds the exact value.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    n = w.n
    rng = np.random.Generator(np.random.Philox(seed))
    best = None   # (value_np, branch_order, restart_index, S tuple, T tuple)
    for branch, v in ((0, w.values), (1, -w.values)):
        s = (rng.random((restarts, n)) < 0.5).astype(np.float64)
        prev = np.full(restarts, -np.inf)
        for _ in range(200):
            c = s @ v
            t = (c > 0).astype(np.float64)
            r = t @ v
            s = (r > 0).astype(np.float64)
            val = np.einsum("ij,ij->i", s @ v, t)
            if np.all(val <= prev + 1e-15):
                break
            prev = np.maximum(prev, val)
        c = s @ v
        t = (c > 0).astype(np.float64)
        val = np.einsum("ij,ij->i", c, t)
        order = np.argsort(-val, kind="stable")
        ridx = int(order[0])
        cand = (float(val[ridx]), branch, ridx,
                tuple(int(i) for i in np.flatnonzero(s[ridx])),
                tuple(int(j) for j in np.flatnonzero(t[ridx])))
        if best is None or cand[0] > best[0] + 1e-15:
            best = cand
    _, _, _, s_idx, t_idx = best
    value = abs(_box_value(w.values, np.asarray(s_idx, dtype=np.intp),
                           np.asarray(t_idx, dtype=np.intp), n))
    return CutNormResult(value=value,
                         witness_s=CellSet(n, s_idx), witness_t=CellSet(n, t_idx),
                         mode="localsearch", exact=False)


def cut_norm(w: StepGraphon, cap: int = DEFAULT_DISPATCH_CAP,
             restarts: int = 50, seed: int = 0) -> CutNormResult:
    """Dispatcher: exact enumeration when n <= cap, local search otherwise."""
    if w.n <= cap:
        return cut_norm_exact(w, cap=min(cap, EXACT_HARD_CAP))
    return cut_norm_local_search(w, restarts=restarts, seed=seed)
