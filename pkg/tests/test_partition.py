"""Partitioners: DP vs exhaustive, approximation factors, greedy traces."""

import numpy as np
import pytest

from entrange.core import ColoredPointSet, QueryRect, SHANNON
from entrange.errors import TooManyBuckets
from entrange.exact1d import Exact1DIndex
from entrange.oracle import exhaustive_partition
from entrange.partition import (
    Bucketing1D,
    ExactIndexBackend,
    OracleBackend,
    greedy_tree_split,
    maxpart_approx,
    maxpart_dp,
    smallest_nonzero_expected_entropy,
    sumpart_approx,
)

from conftest import random_pointset


def seq_points(colors, coords=None):
    colors = np.asarray(colors, dtype=np.int64)
    if coords is None:
        coords = np.arange(len(colors), dtype=float)
    return ColoredPointSet(np.asarray(coords, dtype=float), colors)


def test_maxpart_dp_two_blocks():
    pts = seq_points([0, 0, 1, 1])
    out = maxpart_dp(pts, 2, OracleBackend(pts))
    assert out.cuts == (0, 2, 4)
    assert out.value == 0.0


def test_maxpart_dp_trivial_k():
    pts = seq_points([0, 1, 0, 2, 1])
    backend = OracleBackend(pts)
    one = maxpart_dp(pts, 1, backend)
    assert one.cuts == (0, 5)
    assert abs(one.value - backend.expected_range(0, 5)) < 1e-12
    full = maxpart_dp(pts, 5, backend)
    assert full.value == 0.0
    assert full.cuts == (0, 1, 2, 3, 4, 5)


def test_maxpart_dp_equals_exhaustive(rng):
    for trial in range(40):
        n = int(rng.integers(4, 13))
        k = int(rng.integers(1, min(4, n) + 1))
        pts = seq_points(rng.integers(0, 4, size=n))
        want, _ = exhaustive_partition(pts, k, SHANNON, objective="max")
        got = maxpart_dp(pts, k, OracleBackend(pts))
        assert abs(got.value - want) < 1e-9
        assert max(got.scores) == pytest.approx(got.value, abs=1e-12)


def test_maxpart_dp_binary_equals_linear(rng):
    pts = random_pointset(rng, 120, d=1, m=6)
    backend = OracleBackend(pts)
    for k in (2, 3, 5):
        fast = maxpart_dp(pts, k, backend, inner="binary")
        slow = maxpart_dp(pts, k, backend, inner="linear")
        assert abs(fast.value - slow.value) < 1e-9


def test_maxpart_dp_monotone_in_k(rng):
    pts = random_pointset(rng, 60, d=1, m=5)
    backend = OracleBackend(pts)
    values = [maxpart_dp(pts, k, backend).value for k in range(1, 9)]
    for a, b in zip(values[:-1], values[1:]):
        assert b <= a + 1e-12


def test_maxpart_dp_maximize_min(rng):
    pts = seq_points([0, 1, 0, 1, 2, 2])
    got = maxpart_dp(pts, 2, OracleBackend(pts), objective="max")
    # brute force max-min
    best = -1.0
    backend = OracleBackend(pts)
    for cut in range(1, 6):
        best = max(best, min(backend.expected_range(0, cut), backend.expected_range(cut, 6)))
    assert abs(got.value - best) < 1e-9


def test_maxpart_rejects_bad_k():
    pts = seq_points([0, 1])
    with pytest.raises(TooManyBuckets):
        maxpart_dp(pts, 3, OracleBackend(pts))
    with pytest.raises(ValueError):
        maxpart_dp(pts, 0, OracleBackend(pts))


def test_maxpart_approx_zero_case():
    pts = seq_points([0, 0, 1, 1])
    out = maxpart_approx(pts, 2, 0.1, OracleBackend(pts))
    assert out.value == 0.0
    assert out.k == 2


def test_maxpart_approx_within_factor(rng):
    for trial in range(15):
        n = int(rng.integers(20, 120))
        k = int(rng.integers(2, 6))
        pts = seq_points(rng.integers(0, 5, size=n))
        backend = OracleBackend(pts)
        for eps in (0.1, 0.4):
            opt = maxpart_dp(pts, k, backend).value
            got = maxpart_approx(pts, k, eps, backend).value
            assert got <= (1 + eps) * opt + 1e-9
            assert got >= opt - 1e-9  # cannot beat the optimum


def test_maxpart_approx_k_equals_n(rng):
    pts = seq_points(rng.integers(0, 3, size=7))
    out = maxpart_approx(pts, 7, 0.2, OracleBackend(pts))
    assert out.value == 0.0
    assert out.cuts == tuple(range(8))


def test_smallest_nonzero_expected_entropy(rng):
    pts = seq_points([0, 1, 1, 1])
    # two cheapest distinct-color weights are 1 and 1: pair mass 2, H=1
    assert smallest_nonzero_expected_entropy(pts) == pytest.approx(2 / 4)
    single = seq_points([0, 0, 0])
    assert smallest_nonzero_expected_entropy(single) == 0.0


def test_sumpart_trivial_cases(rng):
    pts = seq_points([0] * 6)
    for k in (1, 2, 3):
        assert sumpart_approx(pts, k, 0.2, OracleBackend(pts)).value == 0.0
    pts = seq_points([0, 1, 0, 1])
    backend = OracleBackend(pts)
    one = sumpart_approx(pts, 1, 0.3, backend)
    assert one.value == pytest.approx(backend.expected_range(0, 4))


def test_sumpart_within_factor_of_exhaustive(rng):
    for trial in range(25):
        n = int(rng.integers(5, 13))
        k = int(rng.integers(1, min(4, n) + 1))
        pts = seq_points(rng.integers(0, 4, size=n))
        want, _ = exhaustive_partition(pts, k, SHANNON, objective="sum")
        for eps in (0.1, 0.5):
            got = sumpart_approx(pts, k, eps, OracleBackend(pts))
            assert got.value <= (1 + eps) * want + 1e-9
            assert got.value >= want - 1e-9


def test_exact_backend_matches_oracle(rng):
    coords = rng.permutation(np.arange(80, dtype=float))
    pts = ColoredPointSet(coords, rng.integers(0, 6, size=80))
    oracle_b = OracleBackend(pts)
    exact_b = ExactIndexBackend(Exact1DIndex(pts, t=0.5))
    for _ in range(40):
        i, j = sorted(rng.integers(0, 81, size=2))
        if i == j:
            continue
        assert abs(oracle_b.expected_range(i, j) - exact_b.expected_range(i, j)) < 1e-6
    got = maxpart_dp(pts, 3, exact_b)
    want = maxpart_dp(pts, 3, oracle_b)
    assert abs(got.value - want.value) < 1e-6


# ---------------------------------------------------------------------------
# greedy tree splitter


def quadrant_points():
    # four clusters, one color each
    coords, colors = [], []
    offsets = [(0, 0), (10, 0), (0, 10), (10, 10)]
    for color, (ox, oy) in enumerate(offsets):
        for i in range(4):
            coords.append((ox + i % 2, oy + i // 2))
            colors.append(color)
    return ColoredPointSet(np.array(coords, dtype=float), np.array(colors))


def test_greedy_tree_k1(rng):
    pts = quadrant_points()
    part = greedy_tree_split(pts, 1, OracleBackend(pts))
    assert len(part.leaves) == 1
    assert part.leaves[0] is part.root
    assert part.trace == []


def test_greedy_tree_quadrants():
    pts = quadrant_points()
    part = greedy_tree_split(pts, 4, OracleBackend(pts))
    assert len(part.leaves) == 4
    assert all(score == 0.0 for score in part.scores)
    sets = sorted(tuple(sorted(leaf.point_ids.tolist())) for leaf in part.leaves)
    assert sets == [tuple(range(0, 4)), tuple(range(4, 8)),
                    tuple(range(8, 12)), tuple(range(12, 16))]


def test_greedy_tree_trace_extremeness(rng):
    pts = random_pointset(rng, 100, d=2, m=7)
    for objective in ("min", "max"):
        part = greedy_tree_split(pts, 6, OracleBackend(pts), objective=objective)
        assert len(part.leaves) == 6
        for step in part.trace:
            chosen_score = step["scores"][step["chosen"]]
            splittable_scores = [step["scores"][i] for i in step["splittable"]]
            if objective == "min":
                assert chosen_score == max(splittable_scores)
            else:
                assert chosen_score == min(splittable_scores)
            # tie rule: oldest among the extreme
            extremes = [i for i in step["splittable"]
                        if step["scores"][i] == chosen_score]
            assert step["chosen"] == min(extremes)


def test_greedy_tree_children_partition_parent(rng):
    pts = random_pointset(rng, 60, d=3, m=5)
    part = greedy_tree_split(pts, 5, OracleBackend(pts))
    ids = np.concatenate([leaf.point_ids for leaf in part.leaves])
    assert sorted(ids.tolist()) == list(range(60))

    def walk(node):
        if node.is_leaf:
            return
        got = np.concatenate([node.left.point_ids, node.right.point_ids])
        assert sorted(got.tolist()) == sorted(node.point_ids.tolist())
        walk(node.left)
        walk(node.right)

    walk(part.root)


def test_greedy_tree_too_many_buckets():
    pts = quadrant_points()
    with pytest.raises(TooManyBuckets):
        greedy_tree_split(pts, 17, OracleBackend(pts))
