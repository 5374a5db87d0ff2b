"""Deterministic sweep structures: mapping, ladders, and hard bounds."""

import math

import numpy as np
import pytest

from entrange.core import ColoredPointSet, QueryRect, SHANNON, renyi_kind
from entrange.errors import WeightsNotSupported
from entrange.oracle import brute_entropy
from entrange.sweep1d import (
    Sweep1DIndex,
    build_renyi,
    build_shannon,
    renyi_bound_holds,
    shannon_bound_holds,
)

from conftest import random_pointset


def rand_interval(rng, lo=0.0, hi=100.0):
    a, b = sorted(rng.uniform(lo, hi, size=2))
    return QueryRect.interval(a, b)


def test_weights_rejected(rng):
    pts = random_pointset(rng, 20, d=1, weighted=True)
    with pytest.raises(WeightsNotSupported):
        build_shannon(pts, 0.2)


def _assert_mapping_unique(pts, idx, a, b):
    in_box = (idx.mx >= a) & (idx.mx <= b) & (idx.my < a)
    counts = np.bincount(idx.mcolor[in_box], minlength=pts.num_colors)
    present = np.zeros(pts.num_colors, dtype=int)
    sel = (pts.coords[:, 0] >= a) & (pts.coords[:, 0] <= b)
    for c in np.unique(pts.colors[sel]):
        present[c] = 1
    assert np.array_equal(counts, present)


def test_mapped_color_uniqueness(rng):
    # in the mapped box, a color appears exactly once iff present in [a, b]
    for trial in range(20):
        pts = random_pointset(rng, 60, d=1, m=7, duplicate_frac=0.2)
        idx = build_shannon(pts, 0.3)
        for _ in range(40):
            rect = rand_interval(rng)
            _assert_mapping_unique(pts, idx, rect.lo[0], rect.hi[0])


def test_mapped_color_uniqueness_exhaustive():
    # every combinatorially distinct interval of one n=200 dataset
    rng = np.random.default_rng(77)
    pts = random_pointset(rng, 200, d=1, m=11, duplicate_frac=0.2)
    idx = build_shannon(pts, 0.4)
    xs = np.unique(pts.coords[:, 0])
    endpoints = np.concatenate(([xs[0] - 1], (xs[:-1] + xs[1:]) / 2, [xs[-1] + 1]))
    anchors = np.concatenate((endpoints, xs))  # open and closed boundaries
    anchors.sort()
    for i, a in enumerate(anchors):
        for b in anchors[i:]:
            _assert_mapping_unique(pts, idx, a, b)


def test_empty_query(rng):
    pts = random_pointset(rng, 50, d=1, m=5)
    for build in (lambda p: build_shannon(p, 0.2), lambda p: build_renyi(p, 0.2, 2.0)):
        idx = build(pts)
        s = idx.query(QueryRect.interval(500.0, 600.0))
        assert s.count == 0.0 and s.value == 0.0


def test_shannon_bound_random_sweep(rng):
    pts = random_pointset(rng, 400, d=1, m=31, duplicate_frac=0.1)
    for eps in (0.1, 0.5):
        idx = build_shannon(pts, eps)
        for _ in range(300):
            rect = rand_interval(rng)
            truth = brute_entropy(pts, rect, SHANNON).value
            got = idx.query(rect).value
            assert shannon_bound_holds(truth, got, eps), (eps, truth, got)


def test_renyi_bound_random_sweep(rng):
    pts = random_pointset(rng, 400, d=1, m=31, duplicate_frac=0.1)
    for eps in (0.1, 0.5):
        for alpha in (1.5, 2.0, 3.0):
            idx = build_renyi(pts, eps, alpha)
            for _ in range(200):
                rect = rand_interval(rng)
                truth = brute_entropy(pts, rect, renyi_kind(alpha)).value
                got = idx.query(rect).value
                assert renyi_bound_holds(truth, got, eps, alpha), (eps, alpha, truth, got)


def test_nine_point_projection_bounds():
    # 1-D projection of the 2:3:4 three-color example; both deterministic
    # bands contain the answer for eps = 0.2
    xs = np.array([1.0, 2.0, 1.0, 2.0, 3.0, 3.0, 4.0, 4.0, 2.5])
    colors = np.array([0, 0, 1, 1, 1, 2, 2, 2, 2])
    pts = ColoredPointSet(xs, colors)
    rect = QueryRect.interval(0.0, 5.0)
    truth_s = 1.5304930567574824
    got = build_shannon(pts, 0.2).query(rect).value
    assert shannon_bound_holds(truth_s, got, 0.2)
    truth_r = 1.4818690077570527
    got = build_renyi(pts, 0.2, 2.0).query(rect).value
    assert renyi_bound_holds(truth_r, got, 0.2, 2.0)


def test_single_repeated_color(rng):
    coords = rng.uniform(0, 100, size=50)
    pts = ColoredPointSet(coords, np.zeros(50, dtype=np.int64))
    idx = build_shannon(pts, 0.3)
    # only single-color nodes qualify; every ladder is count-only
    assert np.all(idx.h_len == 0)
    for _ in range(50):
        rect = rand_interval(rng)
        assert idx.query(rect).value == 0.0


def test_ladders_match_bruteforce_prefixes(rng):
    # every stored jump satisfies its defining inequality pair
    pts = random_pointset(rng, 120, d=1, m=10, duplicate_frac=0.15)
    for make, alpha in ((lambda: build_shannon(pts, 0.25), None),
                        (lambda: build_renyi(pts, 0.25, 2.0), 2.0)):
        idx = make()
        base = idx._base
        coords = pts.coords[:, 0]
        for gid, info in idx._debug.items():
            colors = set(info["colors"])
            x_v = info["x_v"]
            sel = np.isin(pts.colors, list(colors)) & (coords >= x_v)
            xs_all = np.sort(coords[sel])

            def value_at(x, kind_alpha=alpha):
                sub = sel & (coords <= x)
                counts = np.bincount(pts.colors[sub])
                counts = counts[counts > 0]
                n = counts.sum()
                if kind_alpha is None:
                    if n <= 1 or len(counts) <= 1:
                        return float(n > 1) * 0.0
                    return float(n * math.log2(n) - (counts * np.log2(counts)).sum())
                return float((counts.astype(float) ** kind_alpha).sum())

            s_off, s_len = idx.s_off[gid], idx.s_len[gid]
            for k in range(s_len):
                x, e = idx.sx_pool[s_off + k], idx.se_pool[s_off + k]
                cnt = int((xs_all <= x).sum())
                assert base**e >= cnt > (base ** (e - 1) if e > 0 else 0)
            h_off, h_len = idx.h_off[gid], idx.h_len[gid]
            for k in range(h_len):
                x, e = idx.hx_pool[h_off + k], idx.he_pool[h_off + k]
                val = value_at(x)
                assert base**e >= val - 1e-9
                if e > 0:
                    assert base ** (e - 1) < val + 1e-9


def test_per_node_sandwich(rng):
    # each node's estimate lies in [H_v, (1+eps')^2 H_v]
    pts = random_pointset(rng, 150, d=1, m=12, duplicate_frac=0.1)
    idx = build_shannon(pts, 0.3)
    coords = pts.coords[:, 0]
    for _ in range(60):
        rect = rand_interval(rng)
        for info in idx.canonical_debug(rect):
            colors = list(info["colors"])
            sel = np.isin(pts.colors, colors) & (coords >= info["x_v"]) & (coords <= rect.hi[0])
            counts = np.bincount(pts.colors[sel])
            counts = counts[counts > 0]
            n = counts.sum()
            h_true = float((counts / n * np.log2(n / counts)).sum()) if n else 0.0
            est = info["estimate"]
            assert est >= h_true - 1e-9
            assert est <= (1 + idx.eps_prime) ** 2 * h_true + 1e-9


def test_ladder_length_caps(rng):
    pts = random_pointset(rng, 300, d=1, m=25)
    idx = build_shannon(pts, 0.2)
    n = len(pts)
    cap_s = math.ceil(math.log(n + 1) / math.log(idx._base)) + 2
    cap_h = math.ceil(math.log(n * math.log2(n) + 2) / math.log(idx._base)) + 2
    assert int(idx.s_len.max()) <= cap_s
    assert int(idx.h_len.max()) <= cap_h
    ridx = build_renyi(pts, 0.2, 3.0)
    cap_g = math.ceil(math.log(float(n) ** 4.0) / math.log(ridx._base)) + 2
    assert int(ridx.h_len.max()) <= cap_g


def test_coarse_thresholds_dominate_fine(rng):
    # both ladders sandwich the true count; the coarse one within its own factor
    pts = random_pointset(rng, 200, d=1, m=15)
    coarse = build_shannon(pts, 0.5)
    fine = build_shannon(pts, 0.05)
    for _ in range(100):
        rect = rand_interval(rng)
        c = coarse.query(rect)
        f = fine.query(rect)
        if f.count == 0:
            assert c.count == 0
            continue
        # coarse upper estimates exceed finer ones by at most their factor gap
        assert c.count >= f.count / (1 + fine.eps_prime) - 1e-9
        assert f.count >= c.count / (1 + coarse.eps_prime) ** 2 - 1e-9


def test_merge_depth_budget(rng):
    # balanced folding keeps depth within the 2*loglog(n)+O(1) allowance
    # that the eps shrink was sized for
    pts = random_pointset(rng, 500, d=1, m=40)
    idx = build_shannon(pts, 0.2)
    worst = 0
    for _ in range(200):
        rect = rand_interval(rng)
        worst = max(worst, len(idx._canonical_gids(rect.lo[0], rect.hi[0])))
    depth = math.ceil(math.log2(max(2, worst)))
    budget = 2 * math.log2(math.log2(len(pts))) + 4
    assert depth <= budget


def test_query_deterministic(rng):
    pts = random_pointset(rng, 100, d=1, m=9)
    idx = build_shannon(pts, 0.2)
    rect = QueryRect.interval(10.0, 90.0)
    assert idx.query(rect) == idx.query(rect)
