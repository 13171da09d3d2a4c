"""How far is a step graphon from Robinson form?

Two scores live here.  The primary one (``deviation_exact`` /
``deviation_heuristic``) averages the positive parts of two one-sided terms:
for ordered cell-index triples A < B < C of equal size, how much mass the
far box A x C carries above the nearer boxes B x C (left term) and A x B
(right term, by symmetry).  It is zero on Robinson graphons, continuous in
cut norm, subadditive and positively homogeneous.

The second (``violation_score``) is an older aggregate of row-wise
monotonicity violations, kept for comparison experiments only; none of the
recovery machinery depends on it.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Optional, Tuple

import numpy as np

from .core import CellSet, StepGraphon, refine

EXACT_DEVIATION_CAP = 15   # refined grid size limit for exact enumeration
_SWEEP_CAP = 24            # heuristic boundary-lattice positions per axis


@dataclasses.dataclass(frozen=True)
class DeviationCertificate:
    value: float
    term_left: float                 # max over triples of box(A,C) - box(B,C), floored at 0
    term_right: float                # max over triples of box(A,C) - box(A,B), floored at 0
    witness_left: Optional[Tuple[CellSet, CellSet, CellSet]]   # None when floored
    witness_right: Optional[Tuple[CellSet, CellSet, CellSet]]
    refinement: int
    mode: str                        # "exact" or "heuristic"

    def recompute(self, w: StepGraphon) -> float:
        """Re-evaluate the certificate value from its witnesses alone.

        A missing witness stands for the empty-triple choice and contributes
        zero; no flooring happens here, so this reproduces ``value`` exactly
        only because negative-term witnesses are never stored.
        """
        q = w.n * self.refinement
        v = refine(w, self.refinement).values
        tl = _triple_value(v, *self.witness_left, q=q, right=False) \
            if self.witness_left else 0.0
        tr = _triple_value(v, *self.witness_right, q=q, right=True) \
            if self.witness_right else 0.0
        return 0.5 * tl + 0.5 * tr


def _triple_value(v, a_set, b_set, c_set, q, right):
    """Exact (correctly rounded) value of one ordered-triple candidate."""
    a = a_set.indices if isinstance(a_set, CellSet) else tuple(a_set)
    b = b_set.indices if isinstance(b_set, CellSet) else tuple(b_set)
    c = c_set.indices if isinstance(c_set, CellSet) else tuple(c_set)
    if right:
        # box(A,C) - box(A,B): differences along the second index
        terms = [v[i, k] for i in a for k in c] + [-v[i, j] for i in a for j in b]
    else:
        terms = [v[i, k] for i in a for k in c] + [-v[j, k] for j in b for k in c]
    return math.fsum(terms) / (q * q)


def _term_max_exact(v, q):
    """Maximise box(A,C) - box(B,C) over all triples A < B < C, |A|=|B|=|C|.

    C is enumerated stratified by (min C, size); for each C the optimal A and
    B are read off the per-row sums f(i) = sum_{j in C} v[i, j]: A takes the
    k largest f-values left of a split, B the k smallest between split and
    min C.  Scanning every split is exhaustive because any admissible (A, B)
    is separated by s = min B.
    """
    best_key = None      # tracked np value
    best_info = None     # (t2, k, s, combo tuple)
    for t2 in range(2, q):
        tail = q - t2 - 1
        for k in range(1, t2 // 2 + 1):
            if k - 1 > tail:
                break
            combos = list(itertools.combinations(range(t2 + 1, q), k - 1))
            carr = np.asarray(combos, dtype=np.intp).reshape(len(combos), k - 1)
            f = np.repeat(v[t2, :t2][None, :], len(combos), axis=0)
            if k > 1:
                onehot = np.zeros((len(combos), tail), dtype=np.float64)
                onehot[np.arange(len(combos))[:, None], carr - (t2 + 1)] = 1.0
                f += onehot @ v[t2 + 1:, :t2]
            for s in range(k, t2 - k + 1):
                top_a = np.sort(np.partition(f[:, :s], s - k, axis=1)[:, s - k:],
                                axis=1).sum(axis=1)
                bot_b = np.sort(np.partition(f[:, s:t2], k - 1, axis=1)[:, :k],
                                axis=1).sum(axis=1)
                vals = top_a - bot_b
                m = int(np.argmax(vals))
                if best_key is None or vals[m] > best_key:
                    best_key = float(vals[m])
                    best_info = (t2, k, s, combos[m])
    if best_info is None:
        return None, None
    t2, k, s, combo = best_info
    c_set = (t2,) + combo
    f = v[list(c_set), :t2].sum(axis=0)
    a_set = tuple(sorted(int(i) for i in np.argsort(-f[:s], kind="stable")[:k]))
    b_set = tuple(sorted(int(i) + s for i in np.argsort(f[s:t2], kind="stable")[:k]))
    return _triple_value(v, a_set, b_set, c_set, q, right=False), (a_set, b_set, c_set)


def _reflect(sets, q):
    return tuple(tuple(sorted(q - 1 - i for i in s)) for s in reversed(sets))


def _assemble(v, q, refinement, mode, left, right_reflected):
    t_left, wit_left = left
    raw_right, wit_right_rev = right_reflected
    if wit_right_rev is not None:
        wit_right = _reflect(wit_right_rev, q)
        # same multiset of entries after reflection, so the value carries over
        t_right = _triple_value(v, *wit_right, q=q, right=True)
    else:
        wit_right, t_right = None, None
    # flooring = choosing the empty triple, so negative witnesses are dropped
    if t_left is None or t_left < 0.0:
        t_left, wit_left = 0.0, None
    if t_right is None or t_right < 0.0:
        t_right, wit_right = 0.0, None
    value = 0.5 * t_left + 0.5 * t_right

    def cells(tpl):
        return tuple(CellSet(q, t) for t in tpl) if tpl else None

    return DeviationCertificate(
        value=value, term_left=t_left, term_right=t_right,
        witness_left=cells(wit_left), witness_right=cells(wit_right),
        refinement=refinement, mode=mode)


def deviation_exact(w: StepGraphon, refinement: int = 1) -> DeviationCertificate:
    """Exact Robinson deviation on the refined cell grid.

    :param w: step graphon
    :param refinement: split every cell this many times per axis before
        enumerating; the grid size n*refinement must stay <= 15
    """
    r = int(refinement)
    if r < 1:
        raise ValueError("refinement must be >= 1")
    q = w.n * r
    if q > EXACT_DEVIATION_CAP:
        raise ValueError("refined grid %d exceeds exact cap %d" % (q, EXACT_DEVIATION_CAP))
    v = refine(w, r).values
    left = _term_max_exact(v, q)
    right = _term_max_exact(v[::-1, ::-1], q)
    return _assemble(v, q, r, "exact", left, right)


def _term_max_heuristic(v, q, restarts, rng):
    """Lower-bound search for the left term: boundary sweep + alternation."""
    if q < 3:
        return None, None

    def lattice(lo, hi):   # up to _SWEEP_CAP integers in [lo, hi]
        if hi < lo:
            return []
        pts = np.unique(np.linspace(lo, hi, min(_SWEEP_CAP, hi - lo + 1)).round().astype(int))
        return [int(p) for p in pts]

    def improve(c_set, k, s, t2):
        # alternate: (A,B) response to C, then C response to (A,B)
        c_set = tuple(c_set)
        best_val, best_trip = -np.inf, None
        for _ in range(30):
            f = v[list(c_set), :t2].sum(axis=0)
            a_set = tuple(sorted(int(i) for i in np.argsort(-f[:s], kind="stable")[:k]))
            b_set = tuple(sorted(int(i) + s for i in np.argsort(f[s:t2], kind="stable")[:k]))
            g = v[list(a_set), t2:].sum(axis=0) - v[list(b_set), t2:].sum(axis=0)
            c_new = tuple(sorted(int(i) + t2 for i in np.argsort(-g, kind="stable")[:k]))
            val = float(g[[i - t2 for i in c_new]].sum())
            if best_trip is not None and val <= best_val + 1e-15:
                break
            best_val, best_trip = val, (a_set, b_set, c_new)
            c_set = c_new
        return best_val, best_trip

    best_val, best_trip = -np.inf, None
    for t2 in lattice(2, q - 1):
        for s in lattice(1, t2 - 1):
            kmax = min(s, t2 - s, q - t2)
            if kmax <= 16:
                ks = list(range(1, kmax + 1))
            else:
                k, ks = 1, []
                while k <= kmax:
                    ks.append(k)
                    k *= 2
                if kmax not in ks:
                    ks.append(kmax)
            for k in ks:
                val, trip = improve(tuple(range(t2, t2 + k)), k, s, t2)
                if trip is not None and val > best_val:
                    best_val, best_trip = val, trip
    for _ in range(max(0, restarts)):
        t2 = int(rng.integers(2, q))
        s = int(rng.integers(1, t2))
        kmax = min(s, t2 - s, q - t2)
        if kmax < 1:
            continue
        k = int(rng.integers(1, kmax + 1))
        c0 = tuple(sorted(rng.choice(np.arange(t2, q), size=k, replace=False).tolist()))
        val, trip = improve(c0, k, s, t2)
        if trip is not None and val > best_val:
            best_val, best_trip = val, trip
    if best_trip is None:
        return None, None
    return _triple_value(v, *best_trip, q=q, right=False), best_trip


def deviation_heuristic(w: StepGraphon, refinement: int = 1,
                        restarts: int = 20, seed: int = 0) -> DeviationCertificate:
    """Lower bound on the exact deviation; same certificate shape.

    Sweeps a lattice of split boundaries (capped at 24 positions per axis on
    large grids, exhaustive below that), doubling block sizes, improving each
    start by alternating best responses; plus seeded random restarts.
    Deterministic for a given seed.  Never exceeds the exact value.
    """
    r = int(refinement)
    if r < 1:
        raise ValueError("refinement must be >= 1")
    q = w.n * r
    v = refine(w, r).values
    rng = np.random.Generator(np.random.Philox(seed))
    left = _term_max_heuristic(v, q, restarts, rng)
    right = _term_max_heuristic(v[::-1, ::-1], q, restarts, rng)
    return _assemble(v, q, r, "heuristic", left, right)


# ---------------------------------------------------------------------------
# legacy aggregate violation score (comparison experiments only)

@dataclasses.dataclass(frozen=True)
class ViolationScore:
    value: float
    witness: CellSet      # the row subset attaining the reported value
    mode: str
    refinement: int


def _pospart_integral(c, d, h):
    """Vectorised integral of max(c + t*d, 0) for t in [0, h]."""
    c = np.asarray(c, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    end = c + d * h
    full = h * c + 0.5 * d * h * h
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(c >= 0, full, np.where(end <= 0, 0.0, end * end / (2.0 * d)))
        down = np.where(c <= 0, 0.0, np.where(end >= 0, full, c * c / (-2.0 * d)))
    return np.where(d > 0, up, np.where(d < 0, down, h * np.maximum(c, 0.0)))


def _gamma_batch(v, q, bits):
    """Violation score for a batch of row subsets (rows of ``bits`` in {0,1})."""
    h = 1.0 / q
    idx = np.arange(q)
    dcol = v[:, None, :] - v[:, :, None]            # dcol[a, j, l] = v[a,l] - v[a,j]
    low = dcol * (idx[:, None, None] < idx[None, :, None])    # rows a < j
    high = (-dcol) * (idx[:, None, None] > idx[None, None, :])  # rows a > l, sign flipped
    c1 = np.einsum("ba,ajl->bjl", bits, low) * h
    c2 = np.einsum("ba,ajl->bjl", bits, high) * h
    diag = np.diagonal(v)
    d1 = bits[:, :, None] * (v - diag[:, None])[None, :, :]   # d1[b,j,l] = bits[b,j]*(v[j,l]-v[j,j])
    d2 = bits[:, None, :] * (v - diag[:, None]).T[None, :, :]  # d2[b,j,l] = bits[b,l]*(v[l,j]-v[l,l])
    contrib = _pospart_integral(c1, d1, h) + _pospart_integral(c2, d2, h)
    mask = (idx[:, None] < idx[None, :]).astype(np.float64)
    return np.einsum("bjl,jl->b", contrib, mask) * h


def violation_score_exact(w: StepGraphon, refinement: int = 1) -> ViolationScore:
    """Maximise the aggregate violation score over all cell subsets (2^q)."""
    r = int(refinement)
    q = w.n * r
    if q > EXACT_DEVIATION_CAP:
        raise ValueError("refined grid %d exceeds exact cap %d" % (q, EXACT_DEVIATION_CAP))
    v = refine(w, r).values
    best_val, best_mask = -np.inf, 0
    batch = 512
    for lo in range(0, 1 << q, batch):
        masks = np.arange(lo, min(lo + batch, 1 << q), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(q)[None, :]) & 1).astype(np.float64)
        vals = _gamma_batch(v, q, bits)
        m = int(np.argmax(vals))
        if vals[m] > best_val:
            best_val, best_mask = float(vals[m]), int(masks[m])
    idx = tuple(int(i) for i in np.flatnonzero((best_mask >> np.arange(q)) & 1))
    return ViolationScore(value=best_val, witness=CellSet(q, idx),
                          mode="exact", refinement=r)


def violation_score_heuristic(w: StepGraphon, refinement: int = 1,
                              restarts: int = 20, seed: int = 0) -> ViolationScore:
    """Single-cell-flip coordinate ascent from seeded random subsets."""
    r = int(refinement)
    q = w.n * r
    v = refine(w, r).values
    rng = np.random.Generator(np.random.Philox(seed))
    flip_rows = np.abs(np.eye(q)[None, :, :])      # used to build flip batches
    best_val, best_bits = -np.inf, np.zeros(q)
    for start in range(max(1, restarts)):
        bits = np.ones(q) if start == 0 else (rng.random(q) < 0.5).astype(np.float64)
        val = float(_gamma_batch(v, q, bits[None, :])[0])
        for _ in range(200):
            cand = np.abs(bits[None, :] - flip_rows[0])
            vals = _gamma_batch(v, q, cand)
            m = int(np.argmax(vals))
            if vals[m] <= val + 1e-15:
                break
            val, bits = float(vals[m]), cand[m]
        if val > best_val:
            best_val, best_bits = val, bits
    idx = tuple(int(i) for i in np.flatnonzero(best_bits > 0.5))
    return ViolationScore(value=best_val, witness=CellSet(q, idx),
                          mode="heuristic", refinement=r)


def violation_score(w: StepGraphon, refinement: int = 1, mode: str = "auto",
                    restarts: int = 20, seed: int = 0) -> ViolationScore:
    if mode not in ("auto", "exact", "heuristic"):
        raise ValueError("mode must be auto, exact or heuristic")
    if mode == "exact" or (mode == "auto" and w.n * refinement <= EXACT_DEVIATION_CAP):
        return violation_score_exact(w, refinement)
    return violation_score_heuristic(w, refinement, restarts=restarts, seed=seed)


def recompute_violation_score(w: StepGraphon, est: ViolationScore) -> float:
    """Value of the stored witness subset, recomputed from scratch."""
    q = w.n * est.refinement
    v = refine(w, est.refinement).values
    bits = np.zeros(q)
    bits[list(est.witness.indices)] = 1.0
    return float(_gamma_batch(v, q, bits[None, :])[0])
