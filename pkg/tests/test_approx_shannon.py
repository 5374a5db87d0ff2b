"""Shannon estimators: oracle exactness, heavy detection, statistical bounds."""

import math

import numpy as np
import pytest

from entrange.approx_shannon import (
    EstimatorConfig,
    EstimatorIndex,
    detect_heavy_color,
    estimate_additive,
    estimate_multiplicative,
    heavy_branch_combine,
)
from entrange.core import ColoredPointSet, QueryRect, SHANNON
from entrange.errors import EmptyRange
from entrange.oracle import brute_entropy

from conftest import random_pointset

FAST = EstimatorConfig(c_add=0.05, c_mult=0.2)


def make_mix(rng, weights_by_color, n=None, jitter=100.0):
    """1-D points whose color masses follow weights_by_color."""
    coords, colors = [], []
    for color, count in enumerate(weights_by_color):
        for _ in range(count):
            coords.append(rng.uniform(0, jitter))
            colors.append(color)
    return ColoredPointSet(np.array(coords), np.array(colors))


FULL = QueryRect.interval(-1.0, 101.0)


def test_eval_is_exact(rng):
    pts = random_pointset(rng, 300, d=2, m=9, weighted=True)
    index = EstimatorIndex(pts)
    rect = QueryRect((10.0, 10.0), (80.0, 90.0))
    oracle = index.oracle(rect)
    if oracle.is_empty:
        pytest.skip("degenerate draw")
    mask = rect.mask(pts)
    total = pts.weights[mask].sum()
    for color in range(9):
        want = pts.weights[mask & (pts.colors == color)].sum() / total
        assert abs(oracle.eval_color(color) - want) < 1e-9


def test_sample_color_law(rng):
    pts = make_mix(rng, [10, 30, 60])
    index = EstimatorIndex(pts)
    oracle = index.oracle(FULL)
    draws = 30_000
    counts = np.zeros(3)
    for _ in range(draws):
        counts[oracle.sample_color(rng)] += 1
    for color, p in enumerate([0.1, 0.3, 0.6]):
        sigma = math.sqrt(p * (1 - p) / draws)
        assert abs(counts[color] / draws - p) < 4 * sigma


def test_additive_single_color_is_zero(rng):
    pts = make_mix(rng, [50])
    index = EstimatorIndex(pts)
    s = estimate_additive(index, FULL, 0.3, FAST, rng)
    assert s.value == 0.0


def test_additive_statistical_bound(rng):
    pts = make_mix(rng, [16] * 8)  # uniform over 8 colors: truth 3 bits
    index = EstimatorIndex(pts)
    delta = 0.3
    hits = 0
    runs = 60
    for seed in range(runs):
        r = np.random.default_rng(1000 + seed)
        h = estimate_additive(index, FULL, delta, FAST, r).value
        hits += abs(h - 3.0) <= delta
    assert hits >= 0.9 * runs


def test_additive_nine_point_mix_tight_delta(rng):
    # the 2:3:4 three-color mix (scaled 20x so sampling actually runs),
    # delta=0.1: >= 95% of 200 seeds inside the band around 1.530493
    pts = make_mix(rng, [40, 60, 80])
    index = EstimatorIndex(pts)
    truth = 1.5304930567574824
    hits = 0
    for seed in range(200):
        stats = {}
        h = estimate_additive(index, FULL, 0.1, EstimatorConfig(c_add=0.01),
                              np.random.default_rng(seed), stats).value
        assert stats["mode"] == "sampled"
        hits += abs(h - truth) <= 0.1
    assert hits >= 190


def test_additive_exact_fallback(rng):
    pts = make_mix(rng, [4, 4])
    index = EstimatorIndex(pts)
    stats = {}
    s = estimate_additive(index, FULL, 0.05, EstimatorConfig(c_add=100.0), rng, stats)
    assert stats["mode"] == "exact-fallback"
    assert abs(s.value - 1.0) < 1e-12


def test_additive_empty_range(rng):
    pts = make_mix(rng, [5, 5])
    index = EstimatorIndex(pts)
    with pytest.raises(EmptyRange):
        estimate_additive(index, QueryRect.interval(500.0, 600.0), 0.2, FAST, rng)


def test_detect_heavy_color_present(rng):
    pts = make_mix(rng, [90, 4, 3, 3])
    index = EstimatorIndex(pts)
    found = 0
    for seed in range(200):
        r = np.random.default_rng(seed)
        heavy = detect_heavy_color(index, FULL, r)
        if heavy is not None and heavy.color == 0:
            found += 1
            assert abs(heavy.weight / heavy.total - 0.9) < 1e-9
    assert found >= 198  # misses at most ~1/(2n) of the time


def test_detect_heavy_never_reports_light(rng):
    pts = make_mix(rng, [10] * 10)
    index = EstimatorIndex(pts)
    for seed in range(50):
        heavy = detect_heavy_color(index, FULL, np.random.default_rng(seed))
        assert heavy is None  # verified ratios never exceed 2/3
    pts = make_mix(rng, [40, 20])
    index = EstimatorIndex(pts)
    for seed in range(50):
        heavy = detect_heavy_color(index, FULL, np.random.default_rng(seed))
        assert heavy is None or heavy.color == 0


def test_heavy_branch_exact_identity(rng):
    # with the exact reduced entropy substituted, the combination is exact
    pts = make_mix(rng, [80, 7, 6, 4, 3])
    index = EstimatorIndex(pts)
    truth = brute_entropy(pts, FULL, SHANNON).value
    reduced = index.oracle(FULL, excluded=0)
    h = heavy_branch_combine(100.0, 80.0, reduced.exact_entropy())
    assert abs(h - truth) < 1e-9


def test_multiplicative_single_color(rng):
    pts = make_mix(rng, [64])
    index = EstimatorIndex(pts)
    assert estimate_multiplicative(index, FULL, 0.4, FAST, rng).value == 0.0


def test_multiplicative_heavy_branch_bound(rng):
    pts = make_mix(rng, [160, 8, 8, 8, 8, 8])  # heavy 0.8 + 5 light
    index = EstimatorIndex(pts)
    truth = brute_entropy(pts, FULL, SHANNON).value
    eps = 0.25
    ok = 0
    runs = 60
    for seed in range(runs):
        r = np.random.default_rng(2000 + seed)
        h = estimate_multiplicative(index, FULL, eps, FAST, r).value
        ok += truth / (1 + eps) - 1e-12 <= h <= (1 + eps) * truth + 1e-12
    assert ok >= 0.9 * runs


def test_multiplicative_light_branch_bound(rng):
    pts = make_mix(rng, [8] * 32)  # near-uniform 32 colors, truth 5 bits
    index = EstimatorIndex(pts)
    eps = 0.2
    ok = 0
    runs = 60
    for seed in range(runs):
        r = np.random.default_rng(3000 + seed)
        h = estimate_multiplicative(index, FULL, eps, FAST, r).value
        ok += 5.0 / (1 + eps) <= h <= (1 + eps) * 5.0
    assert ok >= 0.9 * runs


def test_lemma_heavy_ratio_inequality():
    # (N-Ni)/Ni <= (Ni/N)log(N/Ni) + ((N-Ni)/N)log(N/(N-Ni)) on (2/3, 1)
    grid = np.linspace(2 / 3 + 1e-6, 1 - 1e-6, 10_000)
    lhs = (1 - grid) / grid
    rhs = grid * np.log2(1 / grid) + (1 - grid) * np.log2(1 / (1 - grid))
    assert np.all(lhs <= rhs + 1e-12)


def test_estimator_deterministic_given_seed(rng):
    pts = make_mix(rng, [30, 20, 10])
    index = EstimatorIndex(pts)
    a = estimate_additive(index, FULL, 0.2, FAST, np.random.default_rng(7)).value
    b = estimate_additive(index, FULL, 0.2, FAST, np.random.default_rng(7)).value
    assert a == b
