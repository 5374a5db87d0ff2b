"""Command-line interface: ingest, build/save/load, query, partition, bench.

Exit codes: 0 ok, 2 usage (argparse), 3 data error, 4 index error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import exact1d, exactnd, partition, storage, sweep1d
from .approx_renyi import estimate_additive_renyi, estimate_multiplicative_renyi
from .approx_shannon import EstimatorConfig, EstimatorIndex, estimate_additive, estimate_multiplicative
from .core import ColoredPointSet, QueryRect, SHANNON, renyi_kind
from .errors import DataFormatError, EntrangeError, IndexFileError, IndexKindMismatch
from .oracle import brute_entropy


def parse_rect(text: str, dim: int | None = None) -> QueryRect:
    big = sys.float_info.max
    lo, hi = [], []
    for part in text.split(","):
        piece = part.strip()
        if ":" not in piece:
            raise DataFormatError(f"bad rect component {piece!r} (want lo:hi)")
        a, b = piece.split(":", 1)
        lo.append(-big if a.strip() == "*" else float(a))
        hi.append(big if b.strip() == "*" else float(b))
    if dim is not None and len(lo) != dim:
        raise DataFormatError(f"rect has {len(lo)} dimensions, data has {dim}")
    return QueryRect(tuple(lo), tuple(hi))


def _parse_alphas(text: str) -> tuple[float, ...]:
    if not text:
        return ()
    return tuple(float(a) for a in text.split(","))


# ---------------------------------------------------------------------------
# build


def cmd_build(args: argparse.Namespace) -> int:
    pts = storage.ingest(args.input)
    alphas = _parse_alphas(args.alphas)
    extra: dict = {"points": len(pts), "dim": pts.dim}
    if args.kind == "exact1d":
        index = exact1d.Exact1DIndex(pts, args.t, alphas)
        extra.update(t=args.t, alphas=list(alphas))
    elif args.kind == "exactnd":
        index = exactnd.ExactNDIndex(pts, args.t, alphas)
        extra.update(t=args.t, alphas=list(alphas))
    elif args.kind == "sweep-shannon":
        index = sweep1d.build_shannon(pts, args.epsilon)
        extra.update(epsilon=args.epsilon)
    elif args.kind == "sweep-renyi":
        index = sweep1d.build_renyi(pts, args.epsilon, args.alpha)
        extra.update(epsilon=args.epsilon, alpha=args.alpha)
    else:  # estimator
        index = EstimatorIndex(pts)
    storage.save_index(args.out, args.kind, index, extra)
    print(f"built {args.kind} over {len(pts)} points -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# query


def _query_once(kind_name: str, header: dict, index, args) -> dict:
    rect = parse_rect(args.rect)
    want_kind = SHANNON if args.kind == "shannon" else renyi_kind(args.alpha)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    if args.mode == "exact":
        if kind_name not in ("exact1d", "exactnd"):
            raise IndexKindMismatch(f"mode=exact needs an exact index, file holds {kind_name}")
        summary = index.query(rect, want_kind)
        bounds = {"exact": True, "tolerance": 1e-6}
    elif args.mode == "deterministic":
        if kind_name not in ("sweep-shannon", "sweep-renyi"):
            raise IndexKindMismatch(f"mode=deterministic needs a sweep index, file holds {kind_name}")
        if (kind_name == "sweep-shannon") != (args.kind == "shannon"):
            raise IndexKindMismatch(f"{kind_name} cannot answer {args.kind} queries")
        if kind_name == "sweep-renyi" and abs(index.alpha - args.alpha) > 1e-12:
            raise IndexKindMismatch(f"index built for alpha={index.alpha}, asked {args.alpha}")
        summary = index.query(rect)
        if kind_name == "sweep-shannon":
            bounds = {"lower": "H", "upper": f"(1+{index.eps})*H+{index.eps}"}
        else:
            slack = index.eps * (index.alpha + 1) / (index.alpha - 1)
            bounds = {"lower": "H_a", "upper": f"H_a+{slack:.6g}"}
    else:  # additive | multiplicative
        if kind_name != "estimator":
            raise IndexKindMismatch(f"mode={args.mode} needs an estimator index, file holds {kind_name}")
        cfg = EstimatorConfig(seed=args.seed)
        if args.mode == "additive":
            if args.kind == "shannon":
                summary = estimate_additive(index, rect, args.delta, cfg, rng)
            else:
                summary = estimate_additive_renyi(index, rect, args.alpha, args.delta, cfg, rng)
            bounds = {"additive": args.delta, "confidence": "whp"}
        else:
            if args.kind == "shannon":
                summary = estimate_multiplicative(index, rect, args.epsilon, cfg, rng)
            else:
                summary = estimate_multiplicative_renyi(index, rect, args.alpha, args.epsilon, cfg, rng)
            bounds = {"factor": 1 + args.epsilon, "confidence": "whp"}
    elapsed_us = (time.perf_counter() - t0) * 1e6
    return {
        "value": summary.value,
        "count": summary.count,
        "kind": args.kind if args.kind == "shannon" else f"renyi({args.alpha:g})",
        "mode": args.mode,
        "bounds_claimed": bounds,
        "seed": args.seed,
        "wall_time_us": round(elapsed_us, 1),
    }


def cmd_query(args: argparse.Namespace) -> int:
    kind_name, header, index = storage.load_index(args.index)
    out = _query_once(kind_name, header, index, args)
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"{out['kind']} entropy = {out['value']:.6f} bits "
              f"(mode={out['mode']}, mass={out['count']:g}, {out['wall_time_us']:.0f}us)")
    return 0


# ---------------------------------------------------------------------------
# partition


def cmd_partition(args: argparse.Namespace) -> int:
    pts = storage.ingest(args.input)
    kind = SHANNON if args.kind == "shannon" else renyi_kind(args.alpha)
    if args.backend == "oracle":
        backend = partition.OracleBackend(pts, kind)
    elif args.backend == "exact":
        if pts.dim == 1:
            index = exact1d.Exact1DIndex(pts, args.t, () if kind.is_shannon else (kind.alpha,))
        else:
            index = exactnd.ExactNDIndex(pts, args.t, () if kind.is_shannon else (kind.alpha,))
        backend = partition.ExactIndexBackend(index, kind)
    else:
        backend = partition.EstimateBackend(
            EstimatorIndex(pts), mode="additive", delta=args.delta,
            alpha=None if kind.is_shannon else kind.alpha,
            rng=np.random.default_rng(args.seed),
        )

    if args.algorithm == "greedy-tree":
        part = partition.greedy_tree_split(pts, args.k, backend, objective=args.objective)
        payload = {
            "algorithm": args.algorithm,
            "k": args.k,
            "leaves": [
                {"rect": [list(leaf.rect.lo), list(leaf.rect.hi)],
                 "points": len(leaf.point_ids), "score": leaf.score}
                for leaf in part.leaves
            ],
            "objective": args.objective,
            "value": (max if args.objective == "min" else min)(part.scores),
            "backend": part.backend_info,
        }
    else:
        if args.algorithm == "dp":
            out = partition.maxpart_dp(pts, args.k, backend, objective=args.objective)
        elif args.algorithm == "maxpart-approx":
            out = partition.maxpart_approx(pts, args.k, args.epsilon, backend)
        else:
            out = partition.sumpart_approx(pts, args.k, args.epsilon, backend)
        order = np.lexsort((np.arange(len(pts)), pts.coords[:, 0]))
        sorted_x = pts.coords[order, 0]
        boundaries = [float(sorted_x[c - 1]) for c in out.cuts[1:-1]]
        payload = {
            "algorithm": args.algorithm,
            "k": out.k,
            "cuts": list(out.cuts),
            "cut_coordinates": boundaries,
            "bucket_scores": list(out.scores),
            "value": out.value,
            "backend": out.backend_info,
        }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"{payload['algorithm']}: k={payload['k']} value={payload['value']:.6f}")
        if "cuts" in payload:
            print(f"cuts: {payload['cuts']}")
            print(f"scores: {['%.4f' % s for s in payload['bucket_scores']]}")
        else:
            for leaf in payload["leaves"]:
                print(f"  rect={leaf['rect']} points={leaf['points']} score={leaf['score']:.4f}")
    return 0


# ---------------------------------------------------------------------------
# bench


def _synthetic(rng: np.random.Generator, n: int, colors: int) -> ColoredPointSet:
    coords = rng.uniform(0.0, 1000.0, size=n)
    cols = rng.integers(0, colors, size=n)
    return ColoredPointSet(coords, cols, num_colors=colors)


def cmd_bench(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]
    ts = [float(t) for t in args.t_values.split(",")]
    writer = open(args.out, "w") if args.out else sys.stdout
    print("kind,n,t,build_s,space_entries,q50_us,q95_us,oracle_q50_us", file=writer)
    for n in sizes:
        pts = _synthetic(rng, n, args.colors)
        rects = [None] * args.queries
        for i in range(args.queries):
            a, b = sorted(rng.uniform(0.0, 1000.0, size=2))
            rects[i] = QueryRect.interval(a, b)
        oracle_times = []
        for rect in rects:
            t0 = time.perf_counter()
            brute_entropy(pts, rect, SHANNON)
            oracle_times.append(time.perf_counter() - t0)
        oracle_q50 = np.percentile(oracle_times, 50) * 1e6
        for t in ts:
            for kind in args.kinds.split(","):
                t0 = time.perf_counter()
                if kind == "exact1d":
                    index = exact1d.Exact1DIndex(pts, t)
                    space = index.space_stats()["table_entries"]
                elif kind == "exactnd":
                    index = exactnd.ExactNDIndex(pts, t)
                    space = index.space_stats()["table_entries"]
                elif kind == "sweep-shannon":
                    index = sweep1d.build_shannon(pts, args.epsilon, keep_debug=False)
                    space = index.space_stats()["ladder_entries"]
                else:
                    raise DataFormatError(f"bench does not know kind {kind!r}")
                build_s = time.perf_counter() - t0
                times = []
                for rect in rects:
                    t0 = time.perf_counter()
                    index.query(rect)
                    times.append(time.perf_counter() - t0)
                q50 = np.percentile(times, 50) * 1e6
                q95 = np.percentile(times, 95) * 1e6
                print(f"{kind},{n},{t:g},{build_s:.3f},{space},{q50:.1f},{q95:.1f},{oracle_q50:.1f}",
                      file=writer)
    if args.out:
        writer.close()
    return 0


# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entrange",
                                     description="Range entropy queries and partitioning")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build an index from CSV/TSV and save it")
    b.add_argument("--input", required=True)
    b.add_argument("--kind", required=True, choices=storage.INDEX_KINDS)
    b.add_argument("--out", required=True)
    b.add_argument("--t", type=float, default=0.5)
    b.add_argument("--alphas", default="", help="comma-separated Renyi orders to precompute")
    b.add_argument("--epsilon", type=float, default=0.2)
    b.add_argument("--alpha", type=float, default=2.0)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer one range entropy query")
    q.add_argument("--index", required=True)
    q.add_argument("--rect", required=True, help='per-dim "lo:hi", comma-separated; * = unbounded')
    q.add_argument("--kind", default="shannon", choices=("shannon", "renyi"))
    q.add_argument("--alpha", type=float, default=2.0)
    q.add_argument("--mode", default="exact",
                   choices=("exact", "additive", "multiplicative", "deterministic"))
    q.add_argument("--delta", type=float, default=0.1)
    q.add_argument("--epsilon", type=float, default=0.2)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_query)

    p = sub.add_parser("partition", help="entropy-driven partitioning")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algorithm", default="dp",
                   choices=("dp", "maxpart-approx", "sumpart", "greedy-tree"))
    p.add_argument("--backend", default="oracle", choices=("oracle", "exact", "estimate"))
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--objective", default="min", choices=("min", "max"))
    p.add_argument("--kind", default="shannon", choices=("shannon", "renyi"))
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_partition)

    be = sub.add_parser("bench", help="build/query timing sweep, CSV output")
    be.add_argument("--sizes", default="1000,10000")
    be.add_argument("--t-values", dest="t_values", default="0.5")
    be.add_argument("--kinds", default="exact1d")
    be.add_argument("--queries", type=int, default=100)
    be.add_argument("--colors", type=int, default=32)
    be.add_argument("--epsilon", type=float, default=0.5)
    be.add_argument("--seed", type=int, default=20240801)
    be.add_argument("--out", default=None)
    be.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except IndexFileError as exc:
        print(f"index error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except EntrangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
