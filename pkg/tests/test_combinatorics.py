"""Interval splitting with a small-integral remainder, and density-preserving
shrinking of product sets.  The split oracle is a post-hoc condition checker;
the shrink oracle is exhaustive subset enumeration."""

import itertools
import math

import numpy as np
import pytest

from robinson_lab import (
    CellSet,
    IntervalSet,
    SplitResult,
    StepGraphon,
    interval_set_integral,
    pigeonhole_shrink,
    split_with_small_remainder,
)

MEASURE_TOL = 1e-12
INTEGRAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# interval sets

def test_interval_set_cleaning_and_measure():
    s = IntervalSet(((0.2, 0.5), (0.0, 0.3), (0.7, 0.7), (0.9, 1.0)))
    assert s.intervals == ((0.0, 0.5), (0.9, 1.0))     # merged, degenerate dropped
    assert s.measure == pytest.approx(0.6, abs=MEASURE_TOL)
    assert s.bounds() == (0.0, 1.0)
    assert s.min_point() == 0.0 and s.max_point() == 1.0
    with pytest.raises(ValueError):
        IntervalSet(((0.5, 0.2),))
    with pytest.raises(ValueError):
        IntervalSet(((-0.1, 0.5),))
    with pytest.raises(ValueError):
        IntervalSet(()).bounds()


def test_interval_set_integral_hand_values():
    u = np.array([1.0, -1.0])
    assert interval_set_integral(u, IntervalSet(((0.0, 0.5),))) == pytest.approx(0.5)
    assert interval_set_integral(u, IntervalSet(((0.25, 0.75),))) == pytest.approx(0.0)
    assert interval_set_integral(u, IntervalSet(((0.1, 0.2),))) == pytest.approx(0.1)
    u4 = np.array([1.0, 2.0, 3.0, 4.0])
    assert interval_set_integral(u4, IntervalSet(((0.0, 1.0),))) == pytest.approx(2.5)
    assert interval_set_integral(
        u4, IntervalSet(((0.0, 0.25), (0.5, 0.75)))) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# split with small remainder: post-hoc checker = the oracle

def check_split(res: SplitResult, u, p: IntervalSet, beta: float):
    n = len(res.parts)
    assert n == math.ceil(p.measure / beta - 1e-12)
    assert res.remainder is res.parts[-1]
    assert res.remainder_index == n - 1

    # (ii) all but the remainder have measure beta and come in order
    for part in res.parts[:-1]:
        assert abs(part.measure - beta) <= MEASURE_TOL
    for a, b in zip(res.parts[:-2], res.parts[1:-1]):
        assert a.max_point() <= b.min_point() + 1e-9
    delta = p.measure - beta * (n - 1)
    assert abs(res.remainder.measure - delta) <= 1e-9

    # (i) the parts tile P: measures add up, pieces stay inside P, no overlap
    assert abs(sum(q.measure for q in res.parts) - p.measure) <= 1e-9
    pieces = sorted(iv for q in res.parts for iv in q.intervals)
    for lo, hi in pieces:
        assert any(plo - 1e-9 <= lo and hi <= phi + 1e-9 for plo, phi in p.intervals)
    for (_, hi), (lo, _) in zip(pieces[:-1], pieces[1:]):
        assert lo >= hi - 1e-9

    # (iii) the remainder integral is small
    total = interval_set_integral(u, p)
    assert abs(res.target_bound - abs(total) / n) <= 1e-12
    assert abs(res.remainder_integral) <= abs(total) / n + INTEGRAL_TOL
    assert abs(interval_set_integral(u, res.remainder) - res.remainder_integral) <= 1e-12


def test_split_uniform_mass_examples():
    u = np.ones(1)
    p = IntervalSet(((0.0, 1.0),))

    res = split_with_small_remainder(u, p, 0.3)
    check_split(res, u, p, 0.3)
    want = [(0.0, 0.3), (0.3, 0.6), (0.6, 0.9), (0.9, 1.0)]
    for part, (lo, hi) in zip(res.parts, want):
        assert len(part.intervals) == 1
        assert part.intervals[0] == pytest.approx((lo, hi), abs=1e-9)
    assert res.remainder_integral == pytest.approx(0.1, abs=1e-9)
    assert res.target_bound == pytest.approx(0.25, abs=1e-12)

    even = split_with_small_remainder(u, p, 0.25)
    check_split(even, u, p, 0.25)
    for part in even.parts:
        assert abs(part.measure - 0.25) <= MEASURE_TOL
        assert interval_set_integral(u, part) == pytest.approx(0.25, abs=1e-9)


def test_split_sign_changing_step():
    u = np.array([1.0] * 5 + [-1.0] * 4 + [1.0])
    p = IntervalSet(((0.0, 1.0),))
    res = split_with_small_remainder(u, p, 0.4)
    check_split(res, u, p, 0.4)


def test_split_on_a_union_of_intervals():
    u = np.array([2.0, -1.0, 0.5, 3.0])
    p = IntervalSet(((0.05, 0.4), (0.55, 0.95)))
    res = split_with_small_remainder(u, p, 0.3)
    check_split(res, u, p, 0.3)


def test_split_random_instances():
    rng = np.random.Generator(np.random.Philox(401))
    done = 0
    while done < 200:
        q = int(rng.integers(1, 33))
        u = rng.uniform(-2, 2, q)
        cuts = np.sort(rng.uniform(0, 1, 2 * int(rng.integers(1, 4))))
        ivs = [(a, b) for a, b in zip(cuts[::2], cuts[1::2]) if b - a > 0.02]
        if not ivs:
            continue
        p = IntervalSet(tuple(ivs))
        if abs(interval_set_integral(u, p)) < 1e-3:
            continue
        beta = float(rng.uniform(0.15, 0.8)) * p.measure
        res = split_with_small_remainder(u, p, beta)
        check_split(res, u, p, beta)
        done += 1


def test_split_determinism():
    u = np.array([1.0, -0.5, 2.0])
    p = IntervalSet(((0.1, 0.9),))
    a = split_with_small_remainder(u, p, 0.22)
    b = split_with_small_remainder(u, p, 0.22)
    assert a.parts == b.parts
    assert a.remainder_integral == b.remainder_integral


def test_split_validation():
    u = np.ones(2)
    p = IntervalSet(((0.0, 0.8),))
    with pytest.raises(ValueError):
        split_with_small_remainder(u, p, 0.0)
    with pytest.raises(ValueError):
        split_with_small_remainder(u, p, 0.8)       # beta must stay below |P|
    with pytest.raises(ValueError):
        split_with_small_remainder(u, p, 1.5)
    with pytest.raises(ValueError):
        split_with_small_remainder(u, IntervalSet(()), 0.1)
    with pytest.raises(ValueError):
        split_with_small_remainder(np.zeros(3), p, 0.3)   # vanishing integral
    balanced = np.array([1.0, -1.0])                      # total is exactly zero
    with pytest.raises(ValueError):
        split_with_small_remainder(balanced, IntervalSet(((0.0, 1.0),)), 0.3)


# ---------------------------------------------------------------------------
# pigeonhole shrink: exhaustive enumeration as the oracle

def oracle_best_density(f: StepGraphon, rows, cols, l1, l2):
    q = f.n
    b = f.values[np.ix_(rows, cols)] / (q * q)
    best = -np.inf
    for ci in itertools.combinations(range(len(rows)), l1):
        for cj in itertools.combinations(range(len(cols)), l2):
            best = max(best, b[np.ix_(ci, cj)].sum())
    return best / ((l1 / q) * (l2 / q))


def density_of(f: StepGraphon, t: CellSet, tp: CellSet):
    box = f.values[np.ix_(t.as_array(), tp.as_array())].sum() / (f.n * f.n)
    return box / (t.measure * tp.measure)


def test_shrink_constant_density():
    f = StepGraphon(np.ones((4, 4)))
    s = CellSet(4, (0, 1, 2, 3))
    t, tp = pigeonhole_shrink(f, s, s, 0.5)
    assert len(t.indices) == len(tp.indices) == 2
    assert density_of(f, t, tp) == pytest.approx(1.0, abs=1e-12)


def test_shrink_concentrates_on_the_hot_block():
    v = np.zeros((4, 4))
    v[:2, :2] = 4.0
    f = StepGraphon(v)
    s = CellSet(4, (0, 1, 2, 3))
    t, tp = pigeonhole_shrink(f, s, s, 0.5)
    assert t.indices == (0, 1) and tp.indices == (0, 1)
    assert density_of(f, t, tp) >= 1.0 - 1e-12            # starting mean density


def test_shrink_drop_one_chunk():
    rng = np.random.Generator(np.random.Philox(402))
    v = rng.uniform(0.2, 2.0, (4, 4))
    f = StepGraphon(0.5 * (v + v.T))
    s = CellSet(4, (0, 1, 2, 3))
    t, tp = pigeonhole_shrink(f, s, s, 0.75)
    assert len(t.indices) == len(tp.indices) == 3
    start = density_of(f, s, s)
    got = density_of(f, t, tp)
    assert got >= start - 1e-9
    assert got <= oracle_best_density(f, s.indices, s.indices, 3, 3) + 1e-9


def test_shrink_random_instances_vs_exhaustive():
    rng = np.random.Generator(np.random.Philox(403))
    for _ in range(100):
        q = 8
        k = int(rng.integers(2, 9))
        l = int(rng.integers(1, k))
        idx_r = tuple(sorted(rng.choice(q, size=k, replace=False).tolist()))
        idx_c = tuple(sorted(rng.choice(q, size=k, replace=False).tolist()))
        m = rng.uniform(0.0, 2.0, (q, q))
        f = StepGraphon(0.5 * (m + m.T))
        rows, cols = CellSet(q, idx_r), CellSet(q, idx_c)
        t, tp = pigeonhole_shrink(f, rows, cols, l / k)
        assert set(t.indices) <= set(idx_r) and set(tp.indices) <= set(idx_c)
        assert len(t.indices) == len(tp.indices) == l
        got = density_of(f, t, tp)
        assert got >= density_of(f, rows, cols) - 1e-9
        assert got <= oracle_best_density(f, idx_r, idx_c, l, l) + 1e-9


def test_shrink_determinism():
    rng = np.random.Generator(np.random.Philox(404))
    m = rng.uniform(0, 1, (6, 6))
    f = StepGraphon(0.5 * (m + m.T))
    s = CellSet(6, (0, 2, 3, 5))
    a = pigeonhole_shrink(f, s, s, 0.5)
    b = pigeonhole_shrink(f, s, s, 0.5)
    assert a == b


def test_shrink_validation():
    f = StepGraphon(np.ones((4, 4)))
    s4 = CellSet(4, (0, 1, 2, 3))
    s2 = CellSet(4, (0, 1))
    with pytest.raises(ValueError):
        pigeonhole_shrink(f, s4, s2, 0.5)                 # unequal measures
    with pytest.raises(ValueError):
        pigeonhole_shrink(f, s4, s4, 0.3)                 # 0.3 * 4 cells isn't whole
    with pytest.raises(ValueError):
        pigeonhole_shrink(f, s4, s4, 0.05)                # rounds to zero cells
    with pytest.raises(ValueError):
        pigeonhole_shrink(f, CellSet(5, (0, 1)), CellSet(5, (0, 1)), 0.5)
    neg = StepGraphon(-np.ones((4, 4)))
    with pytest.raises(ValueError):
        pigeonhole_shrink(neg, s4, s4, 0.5)               # nonpositive integral