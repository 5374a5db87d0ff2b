"""Multi-level range trees over colored point sets.

A d-level range tree: level k is a balanced binary tree over the points
sorted by coordinate k (ties broken by point input index, so builds are
deterministic); every internal node of level k < d owns a (k+1)-level tree
on its subtree's points. For a closed query rectangle the canonical nodes
are the O(log^d n) level-d subtrees whose point sets partition the range
exactly.

Each node carries its subtree weight and count, which supports counting,
weight sums, and weighted range sampling: draw one canonical node by node
weight, then walk root-to-leaf choosing children by weight. The color-aware
variant additionally stores per-node color->weight maps so the same walk
can exclude all points of one color.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import ColoredPointSet, Point, QueryRect
from .errors import EmptyRange


class _Node:
    __slots__ = (
        "lo", "hi", "left", "right", "weight", "count", "minc", "maxc",
        "sub", "color_weights", "point_id",
    )

    def __init__(self, lo: int, hi: int):
        self.lo = lo          # span [lo, hi) in the level's sorted order
        self.hi = hi
        self.left: Optional["_Node"] = None
        self.right: Optional["_Node"] = None
        self.weight = 0.0
        self.count = 0
        self.minc = 0.0       # coordinate interval of the subtree in this dim
        self.maxc = 0.0
        self.sub: Optional["_LevelTree"] = None
        self.color_weights: Optional[dict] = None
        self.point_id = -1    # leaf only

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


class _LevelTree:
    __slots__ = ("level", "order", "sorted_coords", "root")

    def __init__(self, pts: ColoredPointSet, ids: np.ndarray, level: int, last: int, color_aware: bool):
        self.level = level
        coords = pts.coords[ids, level]
        perm = np.lexsort((ids, coords))
        self.order = ids[perm]
        self.sorted_coords = coords[perm]
        self.root = self._build(pts, 0, len(ids), last, color_aware) if len(ids) else None

    def _build(self, pts: ColoredPointSet, lo: int, hi: int, last: int, color_aware: bool) -> _Node:
        node = _Node(lo, hi)
        node.minc = float(self.sorted_coords[lo])
        node.maxc = float(self.sorted_coords[hi - 1])
        if hi - lo == 1:
            pid = int(self.order[lo])
            node.point_id = pid
            node.weight = float(pts.weights[pid])
            node.count = 1
            if self.level == last and color_aware:
                node.color_weights = {int(pts.colors[pid]): node.weight}
        else:
            mid = (lo + hi) // 2
            node.left = self._build(pts, lo, mid, last, color_aware)
            node.right = self._build(pts, mid, hi, last, color_aware)
            node.weight = node.left.weight + node.right.weight
            node.count = node.left.count + node.right.count
            if self.level == last and color_aware:
                cw = dict(node.left.color_weights)
                for c, w in node.right.color_weights.items():
                    cw[c] = cw.get(c, 0.0) + w
                node.color_weights = cw
        if self.level < last:
            node.sub = _LevelTree(pts, self.order[lo:hi], self.level + 1, last, color_aware)
        return node

    def index_range(self, lo: float, hi: float) -> tuple[int, int]:
        """Closed coordinate interval -> half-open index span in sorted order."""
        a = int(np.searchsorted(self.sorted_coords, lo, side="left"))
        b = int(np.searchsorted(self.sorted_coords, hi, side="right"))
        return a, b


class CanonicalNode:
    """A level-d canonical subtree plus the box of level intervals above it."""

    __slots__ = ("node", "box", "tree")

    def __init__(self, node: _Node, box: tuple, tree: "_LevelTree"):
        self.node = node
        self.box = box
        self.tree = tree

    @property
    def weight(self) -> float:
        return self.node.weight

    @property
    def count(self) -> int:
        return self.node.count

    def point_ids(self) -> np.ndarray:
        return self.tree.order[self.node.lo: self.node.hi]


class RangeTree:
    """Static d-level range tree; immutable after build, queries are pure."""

    color_aware = False

    def __init__(self, pts: ColoredPointSet):
        self.pts = pts
        self.dim = pts.dim
        ids = np.arange(len(pts), dtype=np.int64)
        self.tree = _LevelTree(pts, ids, 0, self.dim - 1, self.color_aware) if len(pts) else None

    @classmethod
    def build(cls, pts: ColoredPointSet) -> "RangeTree":
        return cls(pts)

    # -- canonical decomposition ------------------------------------------

    def canonical_nodes(self, rect: QueryRect) -> list[CanonicalNode]:
        if rect.dim != self.dim:
            raise ValueError(f"rect dim {rect.dim} != tree dim {self.dim}")
        out: list[CanonicalNode] = []
        if self.tree is not None:
            self._canon_level(self.tree, rect, (), out)
        return out

    def _canon_level(self, tree: _LevelTree, rect: QueryRect, box: tuple, out: list) -> None:
        k = tree.level
        a, b = tree.index_range(rect.lo[k], rect.hi[k])
        if a >= b or tree.root is None:
            return
        self._canon_node(tree, tree.root, a, b, rect, box, out)

    def _canon_node(self, tree: _LevelTree, node: _Node, a: int, b: int,
                    rect: QueryRect, box: tuple, out: list) -> None:
        if node.hi <= a or node.lo >= b:
            return
        if a <= node.lo and node.hi <= b:
            sub_box = box + ((node.minc, node.maxc),)
            if tree.level == self.dim - 1:
                out.append(CanonicalNode(node, sub_box, tree))
            else:
                self._canon_level(node.sub, rect, sub_box, out)
            return
        if not node.is_leaf:
            self._canon_node(tree, node.left, a, b, rect, box, out)
            self._canon_node(tree, node.right, a, b, rect, box, out)

    # -- counting -----------------------------------------------------------

    def range_weight(self, rect: QueryRect) -> float:
        return sum(c.weight for c in self.canonical_nodes(rect))

    def range_count(self, rect: QueryRect) -> int:
        return sum(c.count for c in self.canonical_nodes(rect))

    # -- sampling -----------------------------------------------------------

    def sample_index(self, rect: QueryRect, rng: np.random.Generator) -> int:
        nodes = self.canonical_nodes(rect)
        return self._draw(nodes, rng, excluded=None)

    def sample(self, rect: QueryRect, rng: np.random.Generator) -> Point:
        return self.pts.point(self.sample_index(rect, rng))

    def _node_weight(self, node: _Node, excluded: Optional[int]) -> float:
        if excluded is None:
            return node.weight
        return node.weight - node.color_weights.get(excluded, 0.0)

    def _draw(self, nodes: list[CanonicalNode], rng: np.random.Generator,
              excluded: Optional[int]) -> int:
        weights = [self._node_weight(c.node, excluded) for c in nodes]
        total = sum(weights)
        if total <= 0.0:
            raise EmptyRange("no sampleable mass in query range")
        r = rng.random() * total
        acc = 0.0
        chosen = nodes[-1].node
        for c, w in zip(nodes, weights):
            acc += w
            if r < acc:
                chosen = c.node
                break
        node = chosen
        while not node.is_leaf:
            wl = self._node_weight(node.left, excluded)
            wr = self._node_weight(node.right, excluded)
            node = node.left if rng.random() * (wl + wr) < wl else node.right
        return node.point_id


class ColorAwareRangeTree(RangeTree):
    """Range tree whose level-d nodes carry color->weight maps.

    Invariant: at every node the map sums to the node weight. Enables
    sampling that excludes one color in the same root-to-leaf walk.
    """

    color_aware = True

    def sample_excluding_index(self, rect: QueryRect, excluded: int,
                               rng: np.random.Generator) -> int:
        nodes = self.canonical_nodes(rect)
        return self._draw(nodes, rng, excluded=excluded)

    def sample_excluding(self, rect: QueryRect, excluded: int,
                         rng: np.random.Generator) -> Point:
        return self.pts.point(self.sample_excluding_index(rect, excluded, rng))

    def color_weight_in(self, rect: QueryRect, color: int) -> float:
        """Weight of one color inside the range, via the canonical maps."""
        return sum(c.node.color_weights.get(color, 0.0) for c in self.canonical_nodes(rect))


class ColorTrees:
    """One counting range tree per color: the O(m)-space exact baseline."""

    def __init__(self, pts: ColoredPointSet):
        self.pts = pts
        self.trees: dict[int, RangeTree] = {}
        for color in range(pts.num_colors):
            sel = pts.colors == color
            if not sel.any():
                continue
            sub = ColoredPointSet(pts.coords[sel], np.zeros(int(sel.sum()), dtype=np.int64),
                                  pts.weights[sel], num_colors=1)
            self.trees[color] = RangeTree(sub)

    def weight(self, rect: QueryRect, color: int) -> float:
        tree = self.trees.get(color)
        return tree.range_weight(rect) if tree is not None else 0.0

    def count(self, rect: QueryRect, color: int) -> int:
        tree = self.trees.get(color)
        return tree.range_count(rect) if tree is not None else 0


def color_range_count(trees: ColorTrees, rect: QueryRect, color: int) -> float:
    return trees.weight(rect, color)
