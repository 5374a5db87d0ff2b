"""Persistence round-trips, ingestion, and the CLI surface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from entrange import exact1d, exactnd, storage, sweep1d
from entrange.approx_shannon import EstimatorConfig, EstimatorIndex, estimate_additive
from entrange.core import ColoredPointSet, QueryRect, SHANNON, renyi_kind
from entrange.errors import (
    DataFormatError,
    IndexKindMismatch,
    NotAnIndex,
    UnsupportedVersion,
)

from conftest import random_pointset


def write_csv(path, rows, header="x1,x2,color,weight"):
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return path


NINE_POINT_ROWS = [
    "1,1,red", "2,2,red",
    "1,3,green", "2,4,green", "3,1,green",
    "3,3,blue", "4,2,blue", "4,4,blue", "2.5,2.5,blue",
]


def test_ingest_nine_point_example(tmp_path):
    path = write_csv(tmp_path / "ninepoint.csv", NINE_POINT_ROWS, header="x1,x2,color")
    pts = storage.ingest(path)
    assert len(pts) == 9 and pts.dim == 2 and pts.num_colors == 3
    assert pts.labels == ("red", "green", "blue")
    counts = np.bincount(pts.colors)
    assert counts.tolist() == [2, 3, 4]
    assert np.all(pts.weights == 1.0)


def test_ingest_weights_and_1d(tmp_path):
    path = write_csv(tmp_path / "w.csv", ["0,a,2.5", "1,b,0.5"], header="x1,color,weight")
    pts = storage.ingest(path)
    assert pts.dim == 1
    assert pts.weights.tolist() == [2.5, 0.5]


def test_ingest_header_only(tmp_path):
    path = write_csv(tmp_path / "empty.csv", [], header="x1,color")
    pts = storage.ingest(path)
    assert len(pts) == 0


def test_ingest_errors_carry_line_numbers(tmp_path):
    path = write_csv(tmp_path / "bad.csv", ["0,a,1", "oops,b,1"], header="x1,color,weight")
    with pytest.raises(DataFormatError, match=":3:"):
        storage.ingest(path)
    path = write_csv(tmp_path / "neg.csv", ["0,a,-2"], header="x1,color,weight")
    with pytest.raises(DataFormatError, match="nonnegative"):
        storage.ingest(path)
    path = write_csv(tmp_path / "inf.csv", ["inf,a,1"], header="x1,color,weight")
    with pytest.raises(DataFormatError, match="non-finite"):
        storage.ingest(path)
    path = write_csv(tmp_path / "nohdr.csv", ["1,2"], header="a,b")
    with pytest.raises(DataFormatError, match="x1..xd"):
        storage.ingest(path)


def test_ingest_large_synthetic_roundtrip(tmp_path, rng):
    n = 100_000
    colors = rng.integers(0, 40, size=n)
    coords = rng.uniform(0, 100, size=n)
    rows = [f"{float(coords[i])!r},c{colors[i]}" for i in range(n)]
    path = write_csv(tmp_path / "big.csv", rows, header="x1,color")
    pts = storage.ingest(path)
    assert len(pts) == n
    # interning keeps per-label masses
    for label_id, label in enumerate(pts.labels):
        want = int((colors == int(label[1:])).sum())
        assert int((pts.colors == label_id).sum()) == want


def test_cli_usage_error_exit_code():
    from entrange.cli import main

    with pytest.raises(SystemExit) as exc:
        main(["query"])  # missing required flags
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# save/load


def _indexes_for_roundtrip(pts1, pts2):
    return [
        ("exact1d", exact1d.Exact1DIndex(pts1, 0.5, (2.0,))),
        ("exactnd", exactnd.ExactNDIndex(pts2, 0.5, (2.0,))),
        ("sweep-shannon", sweep1d.build_shannon(pts1, 0.3)),
        ("sweep-renyi", sweep1d.build_renyi(pts1, 0.3, 2.0)),
        ("estimator", EstimatorIndex(pts2)),
    ]


def test_save_load_roundtrip_identical_answers(tmp_path, rng):
    pts1 = random_pointset(rng, 150, d=1, m=9)
    pts2 = random_pointset(rng, 150, d=2, m=9)
    rects1 = [QueryRect.interval(*sorted(rng.uniform(0, 100, 2))) for _ in range(40)]
    rects2 = []
    for _ in range(40):
        a = rng.uniform(0, 100, 2)
        b = rng.uniform(0, 100, 2)
        rects2.append(QueryRect(tuple(np.minimum(a, b)), tuple(np.maximum(a, b))))
    for kind, index in _indexes_for_roundtrip(pts1, pts2):
        path = tmp_path / f"{kind}.rqe"
        storage.save_index(path, kind, index)
        got_kind, header, loaded = storage.load_index(path)
        assert got_kind == kind
        if kind in ("exact1d", "exactnd"):
            rects = rects1 if kind == "exact1d" else rects2
            for rect in rects:
                a = index.query(rect, renyi_kind(2.0))
                b = loaded.query(rect, renyi_kind(2.0))
                assert a.value == b.value and a.count == b.count
        elif kind.startswith("sweep"):
            for rect in rects1:
                assert index.query(rect) == loaded.query(rect)
        else:
            cfg = EstimatorConfig(c_add=0.05)
            for rect in rects2[:10]:
                try:
                    a = estimate_additive(index, rect, 0.3, cfg, np.random.default_rng(5))
                    b = estimate_additive(loaded, rect, 0.3, cfg, np.random.default_rng(5))
                except Exception:
                    continue
                assert a.value == b.value


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "junk.rqe"
    path.write_bytes(b"NOTANINDEX")
    with pytest.raises(NotAnIndex):
        storage.load_index(path)


def test_load_rejects_truncation(tmp_path, rng):
    pts = random_pointset(rng, 30, d=1)
    path = tmp_path / "x.rqe"
    storage.save_index(path, "exact1d", exact1d.Exact1DIndex(pts, 0.5))
    data = path.read_bytes()
    for cut in (3, 8, 10, len(data) // 2):
        path.write_bytes(data[:cut])
        with pytest.raises(NotAnIndex):
            storage.load_index(path)


def test_load_rejects_newer_version(tmp_path, rng):
    pts = random_pointset(rng, 10, d=1)
    path = tmp_path / "v.rqe"
    storage.save_index(path, "exact1d", exact1d.Exact1DIndex(pts, 0.5))
    data = bytearray(path.read_bytes())
    data[len(storage.MAGIC)] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(UnsupportedVersion):
        storage.load_index(path)


def test_load_rejects_cross_kind(tmp_path, rng):
    pts = random_pointset(rng, 20, d=1)
    path = tmp_path / "k.rqe"
    storage.save_index(path, "exact1d", exact1d.Exact1DIndex(pts, 0.5))
    with pytest.raises(IndexKindMismatch):
        storage.load_index(path, expect_kind="exactnd")


# ---------------------------------------------------------------------------
# CLI (in-process via main())


def run_cli(*argv):
    from entrange.cli import main

    return main(list(argv))


def test_cli_build_query_roundtrip(tmp_path, capsys):
    csv_path = write_csv(tmp_path / "ninepoint.csv", NINE_POINT_ROWS, header="x1,x2,color")
    idx_path = tmp_path / "ninepoint.rqe"
    assert run_cli("build", "--input", str(csv_path), "--kind", "exactnd",
                   "--out", str(idx_path), "--t", "0.5", "--alphas", "2") == 0
    capsys.readouterr()
    assert run_cli("query", "--index", str(idx_path), "--rect", "0:5,0:5",
                   "--kind", "shannon", "--mode", "exact", "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["value"] - 1.5304930567574824) < 1e-6
    assert out["mode"] == "exact"
    assert "wall_time_us" in out
    assert run_cli("query", "--index", str(idx_path), "--rect", "0:5,0:5",
                   "--kind", "renyi", "--alpha", "2", "--mode", "exact", "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["value"] - 1.4818690077570527) < 1e-6


def test_cli_rect_wildcards(tmp_path, capsys):
    csv_path = write_csv(tmp_path / "d.csv", ["0,a", "1,a", "2,b"], header="x1,color")
    idx_path = tmp_path / "d.rqe"
    run_cli("build", "--input", str(csv_path), "--kind", "exact1d", "--out", str(idx_path))
    capsys.readouterr()
    assert run_cli("query", "--index", str(idx_path), "--rect", "*:*", "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["count"] == 3.0


def test_cli_mode_kind_mismatch_exit_code(tmp_path, capsys):
    csv_path = write_csv(tmp_path / "d.csv", ["0,a", "1,b"], header="x1,color")
    idx_path = tmp_path / "d.rqe"
    run_cli("build", "--input", str(csv_path), "--kind", "exact1d", "--out", str(idx_path))
    capsys.readouterr()
    assert run_cli("query", "--index", str(idx_path), "--rect", "0:1",
                   "--mode", "additive") == 4


def test_cli_missing_input_exit_code(tmp_path, capsys):
    assert run_cli("build", "--input", str(tmp_path / "none.csv"),
                   "--kind", "exact1d", "--out", str(tmp_path / "o.rqe")) == 3


def test_cli_seeded_queries_reproducible(tmp_path, capsys):
    rows = [f"{i},{'ab'[i % 2]}" for i in range(64)]
    csv_path = write_csv(tmp_path / "e.csv", rows, header="x1,color")
    idx_path = tmp_path / "e.rqe"
    run_cli("build", "--input", str(csv_path), "--kind", "estimator", "--out", str(idx_path))
    capsys.readouterr()
    outs = []
    for _ in range(2):
        assert run_cli("query", "--index", str(idx_path), "--rect", "0:63",
                       "--mode", "additive", "--delta", "0.3", "--seed", "42",
                       "--json") == 0
        payload = json.loads(capsys.readouterr().out)
        payload.pop("wall_time_us")
        outs.append(payload)
    assert outs[0] == outs[1]


def test_cli_partition_json(tmp_path, capsys):
    rows = [f"{i},{'aabb'[i % 4]}" for i in range(16)]
    csv_path = write_csv(tmp_path / "p.csv", rows, header="x1,color")
    assert run_cli("partition", "--input", str(csv_path), "--k", "4",
                   "--algorithm", "dp", "--backend", "oracle", "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["k"] == 4
    assert len(out["bucket_scores"]) == 4
    assert out["cuts"][0] == 0 and out["cuts"][-1] == 16


def test_cli_partition_greedy_tree(tmp_path, capsys):
    rows = []
    for i in range(8):
        rows.append(f"{i % 4},{i // 4},c{i % 2}")
    csv_path = write_csv(tmp_path / "g.csv", rows, header="x1,x2,color")
    assert run_cli("partition", "--input", str(csv_path), "--k", "3",
                   "--algorithm", "greedy-tree", "--json") == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["leaves"]) == 3


def test_cli_bench_smoke(tmp_path, capsys):
    assert run_cli("bench", "--sizes", "200", "--t-values", "0.5",
                   "--queries", "20", "--colors", "8") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("kind,n,t,")
    assert lines[1].startswith("exact1d,200,")


def test_cli_entrypoint_subprocess(tmp_path):
    csv_path = write_csv(tmp_path / "s.csv", ["0,a", "1,b"], header="x1,color")
    idx = tmp_path / "s.rqe"
    proc = subprocess.run(
        [sys.executable, "-m", "entrange.cli", "build", "--input", str(csv_path),
         "--kind", "exact1d", "--out", str(idx)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run(
        [sys.executable, "-m", "entrange.cli", "query", "--index", str(idx),
         "--rect", "0:1", "--json"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert abs(json.loads(proc.stdout)["value"] - 1.0) < 1e-9
