"""Entropy algebra over color histograms.

Shannon entropy of a histogram with per-color masses w_i (total W) is
``sum_i (w_i/W) * log2(W/w_i)``; the Renyi entropy of order alpha > 1 is
``(1/(alpha-1)) * log2(1 / sum_i (w_i/W)**alpha)``. Both are in bits.

Besides direct evaluation, this module provides the constant-time update
rules for color-disjoint unions, single-color insertions and single-color
deletions, for both entropy families. Every update recomputes from the
stored (count, value) pair of its inputs, so chains of updates do not
accumulate incremental-log drift beyond ordinary float rounding.

All values are weighted: "count" always means total weight. Unweighted
data is the weight-1 special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidOrder, InvalidWeight, Underflow

ColorId = int


# ---------------------------------------------------------------------------
# entropy kinds and summaries


@dataclass(frozen=True)
class EntropyKind:
    """Shannon (``alpha is None``) or Renyi of a fixed order ``alpha > 1``."""

    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        if self.alpha is not None and not self.alpha > 1.0:
            raise InvalidOrder(f"Renyi order must be > 1, got {self.alpha}")

    @property
    def is_shannon(self) -> bool:
        return self.alpha is None

    def label(self) -> str:
        return "shannon" if self.alpha is None else f"renyi({self.alpha:g})"


SHANNON = EntropyKind()


def renyi_kind(alpha: float) -> EntropyKind:
    return EntropyKind(float(alpha))


@dataclass(frozen=True)
class EntropySummary:
    """An entropy value (bits) together with the total mass it describes.

    The pair (count, value) is exactly the state the update formulas need;
    no histogram is retained.
    """

    kind: EntropyKind
    count: float  # total weight of the summarized set
    value: float  # entropy in bits

    @classmethod
    def empty(cls, kind: EntropyKind = SHANNON) -> "EntropySummary":
        return cls(kind, 0.0, 0.0)

    @property
    def is_empty(self) -> bool:
        return self.count == 0.0


# ---------------------------------------------------------------------------
# points and histograms


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]
    color: ColorId
    weight: float = 1.0


class ColoredPointSet:
    """Immutable set of colored, weighted points in R^d.

    Color ids are dense integers 0..m-1. Use :meth:`from_labeled` to intern
    arbitrary labels in first-appearance order. The backing numpy arrays are
    marked read-only after construction.
    """

    __slots__ = ("coords", "colors", "weights", "labels", "_num_colors")

    def __init__(
        self,
        coords: np.ndarray,
        colors: np.ndarray,
        weights: Optional[np.ndarray] = None,
        labels: Optional[tuple] = None,
        num_colors: Optional[int] = None,
    ):
        coords = np.array(coords, dtype=np.float64, copy=True)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)  # flat input means 1-D points
        colors = np.asarray(colors, dtype=np.int64)
        n = coords.shape[0]
        if colors.shape != (n,):
            raise ValueError("colors must be one id per point")
        if weights is None:
            weights = np.ones(n, dtype=np.float64)
        else:
            weights = np.asarray(weights, dtype=np.float64)
            if weights.shape != (n,):
                raise ValueError("weights must be one value per point")
        if n and not np.all(np.isfinite(coords)):
            raise InvalidWeight("coordinates must be finite")
        if n and (weights < 0).any():
            raise InvalidWeight("weights must be nonnegative")
        if n and (colors < 0).any():
            raise ValueError("color id out of range")
        m = int(colors.max()) + 1 if n else 0
        if num_colors is not None:
            if m > num_colors:
                raise ValueError("color id out of range")
            m = num_colors
        if labels is not None and len(labels) != m:
            raise ValueError("labels must cover all color ids")
        for arr in (coords, colors, weights):
            arr.setflags(write=False)
        self.coords = coords
        self.colors = colors
        self.weights = weights
        self.labels = labels
        self._num_colors = m

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def num_colors(self) -> int:
        return self._num_colors

    def __len__(self) -> int:
        return self.coords.shape[0]

    def point(self, i: int) -> Point:
        return Point(tuple(self.coords[i]), int(self.colors[i]), float(self.weights[i]))

    def __iter__(self) -> Iterator[Point]:
        return (self.point(i) for i in range(len(self)))

    @classmethod
    def from_points(cls, points: Sequence[Point], num_colors: Optional[int] = None) -> "ColoredPointSet":
        if not points:
            return cls(np.zeros((0, 1)), np.zeros(0, dtype=np.int64), num_colors=num_colors or 0)
        coords = np.array([p.coords for p in points], dtype=np.float64)
        colors = np.array([p.color for p in points], dtype=np.int64)
        weights = np.array([p.weight for p in points], dtype=np.float64)
        return cls(coords, colors, weights, num_colors=num_colors)

    @classmethod
    def from_labeled(
        cls,
        coords: Iterable[Sequence[float]],
        labels: Iterable,
        weights: Optional[Iterable[float]] = None,
    ) -> "ColoredPointSet":
        """Intern arbitrary color labels to dense ids in first-appearance order."""
        table: dict = {}
        ids = []
        for lab in labels:
            if lab not in table:
                table[lab] = len(table)
            ids.append(table[lab])
        coords_arr = np.asarray(list(coords), dtype=np.float64)
        if coords_arr.ndim == 1:
            coords_arr = coords_arr.reshape(-1, 1)
        w = None if weights is None else np.asarray(list(weights), dtype=np.float64)
        return cls(coords_arr, np.array(ids, dtype=np.int64), w, labels=tuple(table))


class ColorHistogram:
    """Mapping color id -> total weight; zero-weight colors are absent."""

    __slots__ = ("entries", "total")

    def __init__(self, entries: Mapping[ColorId, float]):
        self.entries = {c: float(w) for c, w in entries.items() if w != 0.0}
        for c, w in self.entries.items():
            if w < 0:
                raise InvalidWeight(f"negative mass for color {c}")
        self.total = float(sum(self.entries.values()))

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, ColorHistogram) and self.entries == other.entries

    @classmethod
    def from_counts(cls, counts: Iterable[float]) -> "ColorHistogram":
        return cls({i: float(c) for i, c in enumerate(counts)})

    @classmethod
    def from_points(cls, pts: ColoredPointSet, mask: Optional[np.ndarray] = None) -> "ColorHistogram":
        colors = pts.colors if mask is None else pts.colors[mask]
        weights = pts.weights if mask is None else pts.weights[mask]
        if len(colors) == 0:
            return cls({})
        sums = np.bincount(colors, weights=weights, minlength=pts.num_colors)
        return cls({int(c): float(sums[c]) for c in np.nonzero(sums)[0]})

    def union(self, other: "ColorHistogram") -> "ColorHistogram":
        merged = dict(self.entries)
        for c, w in other.entries.items():
            merged[c] = merged.get(c, 0.0) + w
        return ColorHistogram(merged)


# ---------------------------------------------------------------------------
# direct evaluation


def shannon_entropy(h: ColorHistogram) -> EntropySummary:
    """Shannon entropy of a histogram; empty and single-color are exactly 0."""
    if h.total == 0.0:
        return EntropySummary.empty(SHANNON)
    total = h.total
    value = 0.0
    for w in h.entries.values():
        value += (w / total) * math.log2(total / w)
    return EntropySummary(SHANNON, total, value)


def renyi_entropy(h: ColorHistogram, alpha: float) -> EntropySummary:
    """Renyi entropy of order alpha > 1; empty and single-color are exactly 0."""
    kind = renyi_kind(alpha)
    if h.total == 0.0:
        return EntropySummary.empty(kind)
    total = h.total
    power_sum = sum((w / total) ** alpha for w in h.entries.values())
    value = -math.log2(power_sum) / (alpha - 1.0)
    return EntropySummary(kind, total, value)


def entropy_of(h: ColorHistogram, kind: EntropyKind) -> EntropySummary:
    if kind.is_shannon:
        return shannon_entropy(h)
    return renyi_entropy(h, kind.alpha)


# ---------------------------------------------------------------------------
# Shannon updates

def _require_kind(s: EntropySummary, kind: EntropyKind, what: str) -> None:
    if s.kind != kind:
        raise ValueError(f"{what}: expected {kind.label()} summary, got {s.kind.label()}")


def merge_shannon(h1: EntropySummary, h2: EntropySummary) -> EntropySummary:
    """Entropy of the union of two color-disjoint sets (caller's contract).

    H = (N1*H1 + N2*H2 + N1*log2(N/N1) + N2*log2(N/N2)) / N  with N = N1+N2.
    A zero-count argument returns the other unchanged.
    """
    _require_kind(h1, SHANNON, "merge_shannon")
    _require_kind(h2, SHANNON, "merge_shannon")
    if h1.count == 0.0:
        return h2
    if h2.count == 0.0:
        return h1
    n1, n2 = h1.count, h2.count
    n = n1 + n2
    value = (
        n1 * h1.value
        + n2 * h2.value
        + n1 * math.log2(n / n1)
        + n2 * math.log2(n / n2)
    ) / n
    return EntropySummary(SHANNON, n, value)


def insert_color_shannon(h: EntropySummary, added_weight: float) -> EntropySummary:
    """Add one brand-new color of the given mass.

    Equivalent to merging with a zero-entropy block of that mass.
    """
    _require_kind(h, SHANNON, "insert_color_shannon")
    if added_weight <= 0.0:
        raise InvalidWeight(f"added weight must be positive, got {added_weight}")
    if h.count == 0.0:
        return EntropySummary(SHANNON, added_weight, 0.0)
    n1, n2 = h.count, added_weight
    n = n1 + n2
    value = (n1 * h.value) / n + (n1 / n) * math.log2(n / n1) + (n2 / n) * math.log2(n / n2)
    return EntropySummary(SHANNON, n, value)


def delete_color_shannon(h: EntropySummary, removed_weight: float) -> EntropySummary:
    """Remove ALL mass of one color (the color had exactly this mass in h).

    Inverse of :func:`insert_color_shannon`:
    H' = N/(N-N3) * (H - (N3/N)*log2(N/N3) - ((N-N3)/N)*log2(N/(N-N3))).
    """
    _require_kind(h, SHANNON, "delete_color_shannon")
    if removed_weight <= 0.0:
        raise InvalidWeight(f"removed weight must be positive, got {removed_weight}")
    n1 = h.count
    if removed_weight >= n1:
        raise Underflow(f"cannot remove {removed_weight} from total {n1}")
    n3 = removed_weight
    rest = n1 - n3
    value = (n1 / rest) * (
        h.value - (n3 / n1) * math.log2(n1 / n3) - (rest / n1) * math.log2(n1 / rest)
    )
    return EntropySummary(SHANNON, rest, value)


# ---------------------------------------------------------------------------
# Renyi updates
#
# The raw power sum of a set with total mass N and Renyi entropy H is
# N**alpha * 2**((1-alpha)*H); the three updates below are that identity
# applied to union / single-color insert / single-color delete.


def _power_sum(count: float, value: float, alpha: float) -> float:
    return count**alpha * 2.0 ** ((1.0 - alpha) * value)


def merge_renyi(h1: EntropySummary, h2: EntropySummary, alpha: float) -> EntropySummary:
    """Renyi entropy of a color-disjoint union."""
    kind = renyi_kind(alpha)
    _require_kind(h1, kind, "merge_renyi")
    _require_kind(h2, kind, "merge_renyi")
    if h1.count == 0.0:
        return h2
    if h2.count == 0.0:
        return h1
    n = h1.count + h2.count
    denom = _power_sum(h1.count, h1.value, alpha) + _power_sum(h2.count, h2.value, alpha)
    value = math.log2(n**alpha / denom) / (alpha - 1.0)
    return EntropySummary(kind, n, value)


def insert_color_renyi(h: EntropySummary, added_weight: float, alpha: float) -> EntropySummary:
    """Add one brand-new color of the given mass (Renyi analogue)."""
    kind = renyi_kind(alpha)
    _require_kind(h, kind, "insert_color_renyi")
    if added_weight <= 0.0:
        raise InvalidWeight(f"added weight must be positive, got {added_weight}")
    if h.count == 0.0:
        return EntropySummary(kind, added_weight, 0.0)
    n = h.count + added_weight
    denom = _power_sum(h.count, h.value, alpha) + added_weight**alpha
    value = math.log2(n**alpha / denom) / (alpha - 1.0)
    return EntropySummary(kind, n, value)


def delete_color_renyi(h: EntropySummary, removed_weight: float, alpha: float) -> EntropySummary:
    """Remove ALL mass of one color (Renyi analogue); inverts the insert."""
    kind = renyi_kind(alpha)
    _require_kind(h, kind, "delete_color_renyi")
    if removed_weight <= 0.0:
        raise InvalidWeight(f"removed weight must be positive, got {removed_weight}")
    n1 = h.count
    if removed_weight >= n1:
        raise Underflow(f"cannot remove {removed_weight} from total {n1}")
    rest = n1 - removed_weight
    denom = _power_sum(n1, h.value, alpha) - removed_weight**alpha
    if denom <= 0.0:
        # mathematically impossible under the precondition; float cancellation
        raise Underflow("remaining power sum vanished (extreme mass ratio)")
    value = math.log2(rest**alpha / denom) / (alpha - 1.0)
    return EntropySummary(kind, rest, value)


# ---------------------------------------------------------------------------
# kind-dispatched forms, used by the index structures


def merge(h1: EntropySummary, h2: EntropySummary) -> EntropySummary:
    kind = h1.kind if not h1.is_empty or h2.is_empty else h2.kind
    if kind.is_shannon:
        return merge_shannon(h1, h2)
    return merge_renyi(h1, h2, kind.alpha)


def insert_color(h: EntropySummary, added_weight: float) -> EntropySummary:
    if h.kind.is_shannon:
        return insert_color_shannon(h, added_weight)
    return insert_color_renyi(h, added_weight, h.kind.alpha)


def delete_color(h: EntropySummary, removed_weight: float) -> EntropySummary:
    if h.kind.is_shannon:
        return delete_color_shannon(h, removed_weight)
    return delete_color_renyi(h, removed_weight, h.kind.alpha)


# ---------------------------------------------------------------------------
# axis-aligned query rectangles (shared by every index structure)


@dataclass(frozen=True)
class QueryRect:
    """Closed axis-aligned hyper-rectangle; membership is lo <= x <= hi."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same dimension")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty rectangle: lo {self.lo} exceeds hi {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "QueryRect":
        return cls((float(lo),), (float(hi),))

    @classmethod
    def full(cls, dim: int) -> "QueryRect":
        import sys

        big = sys.float_info.max
        return cls((-big,) * dim, (big,) * dim)

    def contains(self, coords: Sequence[float]) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, coords, self.hi))

    def mask(self, pts: ColoredPointSet) -> np.ndarray:
        """Boolean membership mask over a point set (vectorized)."""
        if len(pts) == 0:
            return np.zeros(0, dtype=bool)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts.coords >= lo) & (pts.coords <= hi), axis=1)
