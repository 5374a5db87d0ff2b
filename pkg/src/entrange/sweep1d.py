"""Deterministic 1-D approximate entropy structures with polylog queries.

Each input point p_j of a color (taken in coordinate order within the
color) becomes the 2-D point (p_j, p_{j-1}), with -infinity standing in
for the missing predecessor. A query interval [a, b] becomes the box
[a, b] x (-inf, a), in which every color of the original range appears
exactly once, so the canonical nodes of a 2-level range tree over the
mapped points slice the range's colors into disjoint groups.

A canonical node v knows its color set U_v and the smallest mapped
x-coordinate x_v. For the original points of those colors at coordinates
>= x_v, two monotone step functions of the right endpoint b are
precomputed on a (1+e')-geometric ladder:

  * the running point count |P(U_v) cap [x_v, b]|, and
  * F = count * H (Shannon) or G = sum of per-color count^alpha (Renyi),

stored as jump lists (x, exponent): the exponent is minimal with
(1+e')^exponent >= value, and an entry appears only where it increases.
A query binary-searches both ladders per node, yielding a count estimate
within one (1+e') factor and a value estimate within another; Shannon
results are folded pairwise with the disjoint-union rule (balanced, so
the per-merge inflation stays within the shrunken e'), Renyi results
close over the power-sum ratio directly.

Guarantees are deterministic, not statistical: the Shannon answer h obeys
H <= h <= (1+eps)H + eps and the Renyi answer H_a <= h <= H_a +
eps*(alpha+1)/(alpha-1) for every query. Only unit weights are supported;
the count ladders are integer-based.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import (
    ColoredPointSet,
    EntropyKind,
    EntropySummary,
    QueryRect,
    SHANNON,
    renyi_kind,
)
from .errors import WeightsNotSupported

MERGE_DEPTH_C = 4  # constant in the Shannon eps shrink: eps / (4*c*loglog n)


def _shrink_eps_shannon(eps: float, n: int) -> float:
    loglog = math.log2(max(2.0, math.log2(max(4, n))))
    return eps / (4.0 * MERGE_DEPTH_C * max(1.0, loglog))


def _ceil_exponent(value: float, base: float, log_base: float) -> int:
    """Minimal integer e >= 0 with base**e >= value (exact under float pow)."""
    if value <= 1.0:
        return 0
    e = max(0, math.ceil(math.log(value) / log_base - 1e-12))
    while base**e < value:
        e += 1
    while e > 0 and base ** (e - 1) >= value:
        e -= 1
    return e


class _PrimNode:
    __slots__ = ("lo", "hi", "left", "right", "ys", "xs_y", "colors_y", "span_gid")

    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi
        self.left = -1
        self.right = -1
        self.ys: np.ndarray
        self.xs_y: np.ndarray
        self.colors_y: np.ndarray
        self.span_gid: dict[tuple[int, int], int] = {}


class Sweep1DIndex:
    """Shared engine for the Shannon and Renyi variants (see build_*)."""

    def __init__(self, pts: ColoredPointSet, eps: float, alpha: Optional[float] = None,
                 keep_debug: Optional[bool] = None):
        if pts.dim != 1:
            raise ValueError("sweep index requires 1-D points")
        if not 0.0 < eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        if len(pts) and not np.all(pts.weights == 1.0):
            raise WeightsNotSupported("sweep structures are count-based; weights must be 1")
        self.pts = pts
        self.eps = float(eps)
        self.alpha = None if alpha is None else float(alpha)
        self.kind: EntropyKind = SHANNON if alpha is None else renyi_kind(alpha)
        n = len(pts)
        self.n = n
        if alpha is None:
            self.eps_prime = _shrink_eps_shannon(eps, n)
        else:
            self.eps_prime = eps / 2.0
        self._base = 1.0 + self.eps_prime
        self._log_base = math.log(self._base)
        self._keep_debug = keep_debug if keep_debug is not None else n <= 5000
        self._debug: dict[int, dict] = {}

        # per-color sorted original coordinates
        self._color_coords: dict[int, np.ndarray] = {}
        coords = pts.coords[:, 0]
        order = np.lexsort((np.arange(n), coords))
        for c in np.unique(pts.colors):
            sel = order[pts.colors[order] == c]
            self._color_coords[int(c)] = coords[sel]

        # the (p_j, p_{j-1}) mapping
        mx = np.empty(n)
        my = np.empty(n)
        mcolor = np.empty(n, dtype=np.int64)
        pos = 0
        for c, arr in self._color_coords.items():
            k = len(arr)
            mx[pos:pos + k] = arr
            my[pos] = -np.inf
            my[pos + 1:pos + k] = arr[:-1]
            mcolor[pos:pos + k] = c
            pos += k
        m_order = np.lexsort((mcolor, my, mx))
        self.mx = mx[m_order]
        self.my = my[m_order]
        self.mcolor = mcolor[m_order]

        # pools for the jump ladders
        self._sx: list[float] = []
        self._se: list[int] = []
        self._hx: list[float] = []
        self._he: list[int] = []
        self._offsets: list[tuple[int, int, int, int]] = []  # per gid

        self.prim: list[_PrimNode] = []
        self.root = self._build_primary(0, n) if n else -1

        self.sx_pool = np.asarray(self._sx)
        self.se_pool = np.asarray(self._se, dtype=np.int64)
        self.hx_pool = np.asarray(self._hx)
        self.he_pool = np.asarray(self._he, dtype=np.int64)
        offs = np.asarray(self._offsets, dtype=np.int64).reshape(-1, 4)
        self.s_off, self.s_len = offs[:, 0], offs[:, 1]
        self.h_off, self.h_len = offs[:, 2], offs[:, 3]
        del self._sx, self._se, self._hx, self._he, self._offsets

    # -- construction ---------------------------------------------------------

    def _build_primary(self, lo: int, hi: int) -> int:
        node = _PrimNode(lo, hi)
        node_id = len(self.prim)
        self.prim.append(node)
        if hi - lo > 1:
            mid = (lo + hi) // 2
            node.left = self._build_primary(lo, mid)
            node.right = self._build_primary(mid, hi)
        sl = slice(lo, hi)
        perm = np.lexsort((self.mcolor[sl], self.mx[sl], self.my[sl]))
        node.ys = self.my[sl][perm]
        node.xs_y = self.mx[sl][perm]
        node.colors_y = self.mcolor[sl][perm]
        self._build_secondary(node, 0, hi - lo)
        return node_id

    def _build_secondary(self, node: _PrimNode, l: int, r: int) -> None:
        colors = node.colors_y[l:r]
        if len(set(colors.tolist())) == len(colors):
            node.span_gid[(l, r)] = self._make_arrays(
                colors, float(node.xs_y[l:r].min())
            )
        # descend regardless: a child of a duplicated-color node can qualify
        if r - l > 1:
            mid = (l + r) // 2
            self._build_secondary(node, l, mid)
            self._build_secondary(node, mid, r)

    def _make_arrays(self, colors: np.ndarray, x_v: float) -> int:
        suffixes = []
        suffix_colors = []
        for c in colors.tolist():
            arr = self._color_coords[int(c)]
            start = int(np.searchsorted(arr, x_v, side="left"))
            suffixes.append(arr[start:])
            suffix_colors.append(np.full(len(arr) - start, int(c), dtype=np.int64))
        walk_x = np.concatenate(suffixes)
        walk_c = np.concatenate(suffix_colors)
        order = np.argsort(walk_x, kind="stable")
        walk_x = walk_x[order]
        walk_c = walk_c[order]
        single_color = len(colors) == 1
        shannon = self.alpha is None
        if len(walk_x) >= 48:
            sx, se, hx, he = self._walk_vector(walk_x, walk_c, shannon, single_color)
        else:
            sx, se, hx, he = self._walk_scalar(walk_x, walk_c, shannon, single_color)
        # queries resolve against the first jump, which sits at the walk start
        if len(sx) and sx[0] != walk_x[0]:
            raise AssertionError("count ladder must start at the first point")

        self._offsets.append((len(self._sx), len(sx), len(self._hx), len(hx)))
        self._sx.extend(sx)
        self._se.extend(se)
        self._hx.extend(hx)
        self._he.extend(he)
        if self._keep_debug:
            self._debug[len(self._offsets) - 1] = {
                "colors": tuple(int(c) for c in colors.tolist()),
                "x_v": x_v,
            }
        return len(self._offsets) - 1

    def _walk_scalar(self, walk_x, walk_c, shannon: bool, single_color: bool):
        sx: list[float] = []
        se: list[int] = []
        hx: list[float] = []
        he: list[int] = []
        counts: dict[int, int] = {}
        total = 0
        t_acc = 0.0  # sum n_c*log2(n_c) (Shannon) or sum n_c**alpha (Renyi)
        base, log_base = self._base, self._log_base
        m = len(walk_x)
        i = 0
        while i < m:
            j = i
            x = walk_x[i]
            while j < m and walk_x[j] == x:
                c = int(walk_c[j])
                nc = counts.get(c, 0) + 1
                counts[c] = nc
                if shannon:
                    if nc > 1:
                        t_acc += nc * math.log2(nc) - (nc - 1) * math.log2(nc - 1)
                else:
                    t_acc += nc**self.alpha - (nc - 1) ** self.alpha
                total += 1
                j += 1
            e_s = _ceil_exponent(float(total), base, log_base)
            if not se or e_s > se[-1]:
                sx.append(float(x))
                se.append(e_s)
            if shannon:
                value = total * math.log2(total) - t_acc if total > 1 else 0.0
            else:
                value = t_acc
            if not (shannon and single_color) and value > 0.0:
                e_h = _ceil_exponent(value, base, log_base)
                if not he or e_h > he[-1]:
                    hx.append(float(x))
                    he.append(e_h)
            i = j
        return sx, se, hx, he

    def _walk_vector(self, walk_x, walk_c, shannon: bool, single_color: bool):
        """Vectorized ladder construction; same outputs as the scalar walk."""
        m = len(walk_x)
        # per-point occurrence rank within its color, in walk order
        stable = np.argsort(walk_c, kind="stable")
        grouped = walk_c[stable]
        starts = np.flatnonzero(np.concatenate(([True], grouped[1:] != grouped[:-1])))
        rank_sorted = np.arange(m) - np.repeat(starts, np.diff(np.append(starts, m)))
        ranks = np.empty(m, dtype=np.int64)
        ranks[stable] = rank_sorted
        nc = ranks + 1.0
        if shannon:
            inc = nc * np.log2(nc)
            repeat = ranks > 0
            prev = nc[repeat] - 1.0
            inc[repeat] -= prev * np.log2(prev)
        else:
            inc = nc**self.alpha - (nc - 1.0) ** self.alpha
        t_pref = np.cumsum(inc)
        totals = np.arange(1, m + 1, dtype=np.float64)
        group_end = np.concatenate((walk_x[1:] != walk_x[:-1], [True]))
        g_tot = totals[group_end]
        g_x = walk_x[group_end]
        base, log_base = self._base, self._log_base

        def exponents(values: np.ndarray) -> np.ndarray:
            e = np.ceil(np.log(values) / log_base - 1e-12).astype(np.int64)
            np.maximum(e, 0, out=e)
            for _ in range(4):
                over = base ** e.astype(np.float64) < values
                if not over.any():
                    break
                e[over] += 1
            for _ in range(4):
                under = (e > 0) & (base ** (e - 1.0) >= values)
                if not under.any():
                    break
                e[under] -= 1
            return e

        def thin(xs: np.ndarray, es: np.ndarray):
            keep = np.concatenate(([True], es[1:] > es[:-1]))
            return xs[keep].tolist(), es[keep].tolist()

        sx, se = thin(g_x, exponents(g_tot))
        if shannon:
            if single_color:
                return sx, se, [], []
            g_val = g_tot * np.log2(g_tot) - t_pref[group_end]
            g_val[g_tot <= 1] = 0.0
        else:
            g_val = t_pref[group_end]
        positive = g_val > 0.0
        if not positive.any():
            return sx, se, [], []
        hx, he = thin(g_x[positive], exponents(g_val[positive]))
        return sx, se, hx, he

    # -- canonical node collection ---------------------------------------------

    def _canonical_gids(self, a: float, b: float) -> np.ndarray:
        if self.n == 0:
            return np.empty(0, dtype=np.int64)
        ilo = int(np.searchsorted(self.mx, a, side="left"))
        ihi = int(np.searchsorted(self.mx, b, side="right"))
        if ilo >= ihi:
            return np.empty(0, dtype=np.int64)
        out: list[int] = []
        self._prim_canon(self.root, ilo, ihi, a, out)
        return np.asarray(out, dtype=np.int64)

    def _prim_canon(self, node_id: int, ilo: int, ihi: int, a: float, out: list) -> None:
        node = self.prim[node_id]
        if node.hi <= ilo or node.lo >= ihi:
            return
        if ilo <= node.lo and node.hi <= ihi:
            c = int(np.searchsorted(node.ys, a, side="left"))  # y < a, strict
            if c > 0:
                self._sec_canon(node, 0, node.hi - node.lo, c, out)
            return
        if node.left >= 0:
            self._prim_canon(node.left, ilo, ihi, a, out)
            self._prim_canon(node.right, ilo, ihi, a, out)

    def _sec_canon(self, node: _PrimNode, l: int, r: int, c: int, out: list) -> None:
        if l >= c:
            return
        if r <= c:
            gid = node.span_gid.get((l, r))
            if gid is None:
                raise AssertionError("canonical node with duplicated colors")
            out.append(gid)
            return
        mid = (l + r) // 2
        self._sec_canon(node, l, mid, c, out)
        self._sec_canon(node, mid, r, c, out)

    # -- ladder lookups ----------------------------------------------------------

    def _ragged_exponents(self, offs: np.ndarray, lens: np.ndarray,
                          xs_pool: np.ndarray, es_pool: np.ndarray, b: float) -> np.ndarray:
        """Per node, exponent of the rightmost jump with x <= b (vectorized)."""
        lo = offs.copy()
        hi = offs + lens
        while True:
            active = lo < hi
            if not active.any():
                break
            mid = (lo + hi) // 2
            right = np.zeros(len(lo), dtype=bool)
            right[active] = xs_pool[mid[active]] <= b
            lo = np.where(active & right, mid + 1, lo)
            hi = np.where(active & ~right, mid, hi)
        idx = lo - 1
        if np.any(idx < offs):
            raise AssertionError("ladder probed before its first jump")
        return es_pool[idx]

    # -- queries -------------------------------------------------------------------

    def query(self, rect: QueryRect) -> EntropySummary:
        if rect.dim != 1:
            raise ValueError("query rect must be 1-D")
        a, b = rect.lo[0], rect.hi[0]
        gids = self._canonical_gids(a, b)
        if len(gids) == 0:
            return EntropySummary.empty(self.kind)
        if self.alpha is None:
            return self._query_shannon(gids, b)
        return self._query_renyi(gids, b)

    def _node_estimates(self, gids: np.ndarray, b: float):
        l_s = self._ragged_exponents(self.s_off[gids], self.s_len[gids],
                                     self.sx_pool, self.se_pool, b)
        hi_w = self._base**l_s
        lo_w = self._base ** (l_s - 1)
        h_len = self.h_len[gids]
        l_h = np.zeros(len(gids), dtype=np.int64)
        has_h = h_len > 0
        if has_h.any():
            l_h[has_h] = self._ragged_exponents(
                self.h_off[gids][has_h], h_len[has_h], self.hx_pool, self.he_pool, b
            )
        return l_s, l_h, has_h, hi_w, lo_w

    def _query_shannon(self, gids: np.ndarray, b: float) -> EntropySummary:
        l_s, l_h, has_h, hi_w, lo_w = self._node_estimates(gids, b)
        h_v = np.where(has_h, self._base**l_h / lo_w, 0.0)
        # balanced pairwise folds: depth log2 |V|, matching the eps budget
        while len(h_v) > 1:
            odd = len(h_v) % 2 == 1
            if odd:
                tail = (h_v[-1:], hi_w[-1:], lo_w[-1:])
                h_v, hi_w, lo_w = h_v[:-1], hi_w[:-1], lo_w[:-1]
            a_h, b_h = h_v[0::2], h_v[1::2]
            a_hi, b_hi = hi_w[0::2], hi_w[1::2]
            a_lo, b_lo = lo_w[0::2], lo_w[1::2]
            s_hi = a_hi + b_hi
            h_v = (
                a_hi * a_h + b_hi * b_h
                + a_hi * np.log2(s_hi / a_lo) + b_hi * np.log2(s_hi / b_lo)
            ) / (a_lo + b_lo)
            hi_w = s_hi
            lo_w = a_lo + b_lo
            if odd:
                h_v = np.concatenate([h_v, tail[0]])
                hi_w = np.concatenate([hi_w, tail[1]])
                lo_w = np.concatenate([lo_w, tail[2]])
        return EntropySummary(SHANNON, float(hi_w[0]), float(h_v[0]))

    def _query_renyi(self, gids: np.ndarray, b: float) -> EntropySummary:
        assert self.alpha is not None
        l_s, l_h, has_h, hi_w, _ = self._node_estimates(gids, b)
        num = float(hi_w.sum()) ** self.alpha
        den = float((self._base ** (l_h - 1)).sum())
        value = math.log2(num / den) / (self.alpha - 1.0)
        return EntropySummary(self.kind, float(hi_w.sum()), value)

    # -- introspection ----------------------------------------------------------

    def canonical_debug(self, rect: QueryRect) -> list[dict]:
        """Per-canonical-node view of a query, for invariant checks."""
        if not self._keep_debug:
            raise RuntimeError("index built without debug retention")
        a, b = rect.lo[0], rect.hi[0]
        gids = self._canonical_gids(a, b)
        if len(gids) == 0:
            return []
        l_s, l_h, has_h, hi_w, lo_w = self._node_estimates(gids, b)
        out = []
        for i, gid in enumerate(gids.tolist()):
            info = dict(self._debug[gid])
            info.update(
                gid=gid, l_s=int(l_s[i]), l_h=int(l_h[i]) if has_h[i] else None,
                count_hi=float(hi_w[i]), count_lo=float(lo_w[i]),
                estimate=(self._base ** int(l_h[i]) / float(lo_w[i])) if has_h[i] else 0.0,
            )
            out.append(info)
        return out

    def space_stats(self) -> dict:
        return {
            "points": self.n,
            "eps": self.eps,
            "eps_prime": self.eps_prime,
            "ladder_entries": int(len(self.sx_pool) + len(self.hx_pool)),
            "qualifying_nodes": len(self.s_off),
        }


def build_shannon(pts: ColoredPointSet, eps: float,
                  keep_debug: Optional[bool] = None) -> Sweep1DIndex:
    """Deterministic (1+eps)-multiplicative plus eps-additive Shannon index."""
    return Sweep1DIndex(pts, eps, alpha=None, keep_debug=keep_debug)


def build_renyi(pts: ColoredPointSet, eps: float, alpha: float,
                keep_debug: Optional[bool] = None) -> Sweep1DIndex:
    """Deterministic eps*(alpha+1)/(alpha-1)-additive Renyi index."""
    kind = renyi_kind(alpha)  # validates alpha > 1
    assert kind.alpha is not None
    return Sweep1DIndex(pts, eps, alpha=alpha, keep_debug=keep_debug)


def shannon_bound_holds(truth: float, estimate: float, eps: float, slack: float = 1e-9) -> bool:
    return truth - slack <= estimate <= (1.0 + eps) * truth + eps + slack


def renyi_bound_holds(truth: float, estimate: float, eps: float, alpha: float,
                      slack: float = 1e-9) -> bool:
    return truth - slack <= estimate <= truth + eps * (alpha + 1.0) / (alpha - 1.0) + slack
