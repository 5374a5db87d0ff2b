import numpy as np
import pytest

from entrange.core import ColoredPointSet


def random_pointset(rng, n, d=1, m=None, weighted=False, coord_range=(0.0, 100.0),
                    duplicate_frac=0.0):
    """Synthetic colored points with optional skewed colors and duplicates."""
    if m is None:
        m = max(2, n // 8)
    coords = rng.uniform(coord_range[0], coord_range[1], size=(n, d))
    if duplicate_frac > 0 and n > 1:
        ndup = int(n * duplicate_frac)
        src = rng.integers(0, n, size=ndup)
        dst = rng.integers(0, n, size=ndup)
        coords[dst] = coords[src]
    # zipf-ish color skew
    raw = rng.zipf(1.6, size=n) % m
    colors = raw.astype(np.int64)
    weights = rng.uniform(0.5, 3.0, size=n) if weighted else None
    return ColoredPointSet(coords, colors, weights, num_colors=m)


def random_rect(rng, d=1, coord_range=(0.0, 100.0)):
    from entrange.core import QueryRect

    a = rng.uniform(coord_range[0], coord_range[1], size=d)
    b = rng.uniform(coord_range[0], coord_range[1], size=d)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    return QueryRect(tuple(lo), tuple(hi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
