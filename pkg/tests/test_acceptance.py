"""Acceptance suite: one test per criterion, at its stated tolerance.

Each test prints '[PASS] <criterion>' (or FAIL) so a -s run reads as a
checklist. The desk-scale substitutes for the paper-scale dataset are a
bundled seeded preferential-attachment store of 1M nodes / 10M edges and
a 1M-edge control with the same node count; both embed one identical
50-node clique so induction work can be compared across store sizes.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
import tracemalloc
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from graphdeck import (
    NodeSet,
    build_store,
    compute_pagerank,
    induce,
    init_layout,
    open_store,
    pin,
    step,
)
from graphdeck.layout import ideal_edge_length, repulsion_displacement
from graphdeck.protocol import unpack_frame
from graphdeck.service import ServiceConfig, create_app

from conftest import build_from_edges, write_edge_file
from test_features import dense_pagerank_oracle
from test_layout import exact_repulsion_oracle, make_subgraph
from test_subgraph import induced_token_pairs
from test_service import recv_any, next_json, next_frame

NODES = 1_000_000
EDGES_BIG = 10_000_000
EDGES_SMALL = 1_000_000
CLIQUE = 50

_BUILD_WRAPPER = """
import json, resource, sys, time
from graphdeck.build import build_store
t0 = time.perf_counter()
build_store(sys.argv[1], sys.argv[2])
print(json.dumps({
    "seconds": time.perf_counter() - t0,
    "peak_rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0,
}))
"""


def _report(name: str, ok: bool, detail: str = ""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def _append_clique(path: Path):
    with open(path, "a", encoding="utf-8") as f:
        for i in range(CLIQUE):
            for j in range(i + 1, CLIQUE):
                f.write(f"emb{i} emb{j}\n")


@pytest.fixture(scope="session")
def bigstores(tmp_path_factory):
    """Generate and ingest the desk-scale stores once per test session."""
    base = tmp_path_factory.mktemp("deskscale")
    metrics = {}
    for tag, edges, seed in (("small", EDGES_SMALL, 43), ("big", EDGES_BIG, 42)):
        txt = base / f"{tag}.txt"
        subprocess.run(
            [
                sys.executable, "-m", "graphdeck.cli", "gen-synthetic", str(txt),
                "--nodes", str(NODES), "--edges", str(edges), "--seed", str(seed),
            ],
            check=True, capture_output=True,
        )
        _append_clique(txt)
        proc = subprocess.run(
            [sys.executable, "-c", _BUILD_WRAPPER, str(txt), str(base / f"{tag}.carn")],
            check=True, capture_output=True, text=True,
        )
        metrics[tag] = json.loads(proc.stdout.strip().splitlines()[-1])
        txt.unlink()
    return {
        "dir": base,
        "small": base / "small.carn",
        "big": base / "big.carn",
        "metrics": metrics,
    }


# ---------------------------------------------------------------------------


def test_accept_induction_correctness_oracle():
    """induce == brute-force edge filter on 50 graphs x 20 node sets."""
    import tempfile

    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        for g in range(50):
            rng = random.Random(10_000 + g)
            n = rng.randrange(20, 201)
            edges = [
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.1
            ]
            if not edges:
                edges = [(0, 1)]
            store = build_from_edges(Path(tmp), edges, name=f"g{g}")
            raw = {(str(u), str(v)) for u, v in edges}
            for s in range(20):
                size = rng.randrange(1, store.node_count + 1)
                picked = rng.sample(range(store.node_count), size)
                sub = induce(store, NodeSet(picked))
                toks = {store.record(i).external_id for i in picked}
                expect = {
                    (min(a, b), max(a, b))
                    for a, b in raw
                    if a in toks and b in toks
                }
                assert induced_token_pairs(store, sub) == expect
    elapsed = time.perf_counter() - t0
    _report(
        "induction correctness oracle (50 graphs x 20 sets)",
        elapsed < 10.0,
        f"exact match, {elapsed:.1f}s",
    )


def test_accept_induction_latency(bigstores):
    """k=2000 induction on the 10M-edge store: median < 200ms."""
    proc = subprocess.run(
        [
            sys.executable, "-m", "graphdeck.cli", "bench-induce",
            str(bigstores["big"]), "--k", "2000", "--runs", "20",
            "--seed", "7", "--json-only",
        ],
        check=True, capture_output=True, text=True,
    )
    report = json.loads(proc.stdout.strip().splitlines()[-1])
    bigstores["bench_report"] = report
    _report(
        "induction latency (paper 120ms point, scaled budget 200ms)",
        report["median_ms"] < 200.0,
        f"median={report['median_ms']}ms p95={report['p95_ms']}ms "
        f"edges={report['store_edge_count']}",
    )


def test_accept_out_of_core_memory(bigstores):
    """Bench process RSS < 512MB; induce transients size-independent."""
    report = bigstores.get("bench_report")
    if report is None:
        proc = subprocess.run(
            [
                sys.executable, "-m", "graphdeck.cli", "bench-induce",
                str(bigstores["big"]), "--k", "2000", "--runs", "20",
                "--seed", "7", "--json-only",
            ],
            check=True, capture_output=True, text=True,
        )
        report = json.loads(proc.stdout.strip().splitlines()[-1])
    ok_rss = report["peak_rss_mb"] < 512.0

    peaks = {}
    for tag in ("small", "big"):
        store = open_store(bigstores[tag])
        ids = NodeSet([store.lookup_external(f"emb{i}") for i in range(CLIQUE)])
        induce(store, ids)  # warm
        tracemalloc.start()
        sub = induce(store, ids)
        _, peaks[tag] = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert sub.edge_count == CLIQUE * (CLIQUE - 1) // 2
        store.close()
    spread = abs(peaks["small"] - peaks["big"]) / max(peaks.values())
    _report(
        "out-of-core memory contract",
        ok_rss and spread < 0.10,
        f"bench peak_rss={report['peak_rss_mb']}MB (<512), induce transient "
        f"spread={spread * 100:.1f}% (1M vs 10M edges)",
    )


def test_accept_pagerank_oracle(bigstores, tmp_path):
    """Streaming PageRank vs dense oracle (1e-8 Linf); sums stay at 1."""
    worst = 0.0
    for trial in range(30):
        rng = random.Random(7_000 + trial)
        n = rng.randrange(5, 101)
        directed = trial % 2 == 0
        edges = [
            (rng.randrange(n), rng.randrange(n))
            for _ in range(rng.randrange(n, 4 * n))
        ]
        store = build_from_edges(tmp_path, edges, name=f"pr{trial}", directed=directed)
        fv = compute_pagerank(store, damping=0.85, max_iters=200, tol=1e-13)
        oracle = dense_pagerank_oracle(store, 0.85, 200, 1e-13)
        worst = max(worst, float(np.max(np.abs(fv.values - oracle))))
        assert abs(fv.values.sum() - 1.0) < 1e-6
    big = open_store(bigstores["big"])
    fv_big = compute_pagerank(big)
    big_sum = float(fv_big.values.sum())
    big.close()
    _report(
        "pagerank oracle + normalization",
        worst < 1e-8 and abs(big_sum - 1.0) < 1e-6,
        f"worst Linf={worst:.2e} over 30 graphs; 10M-edge store sum={big_sum:.9f} "
        f"after {fv_big.metadata['iterations']} iterations",
    )


def test_accept_layout_fixed_point():
    """2-node spring settles at k (2%); pins freeze; seeds reproduce."""
    sub = make_subgraph(2, [(0, 1)])
    state = init_layout(sub, 42, (1000.0, 1000.0))
    step(state, sub, 500)
    d = float(np.hypot(*(state.positions[0] - state.positions[1])))
    ok_fixed = abs(d - state.k) / state.k < 0.02

    ring = make_subgraph(12, [(i, (i + 1) % 12) for i in range(12)])
    pinned_state = init_layout(ring, 3, (500.0, 500.0))
    for i in range(12):
        pin(pinned_state, i, pinned_state.positions[i])
    before = pinned_state.positions.copy()
    _, stats = step(pinned_state, ring, 200)
    ok_pinned = np.array_equal(pinned_state.positions, before) and stats.max_displacement == 0.0

    a = init_layout(ring, 11, (500.0, 500.0))
    b = init_layout(ring, 11, (500.0, 500.0))
    step(a, ring, 137)
    step(b, ring, 137)
    ok_seeded = np.array_equal(a.positions, b.positions)

    _report(
        "layout fixed point / pinning / determinism",
        ok_fixed and ok_pinned and ok_seeded,
        f"2-node distance {d:.2f} vs k={state.k:.2f} "
        f"({abs(d - state.k) / state.k * 100:.2f}%)",
    )


def test_accept_barnes_hut_fidelity():
    """Quadtree repulsion within 10% per node of exact, theta=0.8."""
    worst = 0.0
    k = ideal_edge_length(500, (1000.0, 1000.0))
    for seed in range(20):
        rng = np.random.default_rng(seed)
        pos = rng.random((500, 2)) * 1000.0
        approx = repulsion_displacement(pos, k, use_quadtree=True)
        oracle = exact_repulsion_oracle(pos, k)
        rel = np.linalg.norm(approx - oracle, axis=1) / np.linalg.norm(oracle, axis=1)
        worst = max(worst, float(rel.max()))
    _report(
        "barnes-hut fidelity (theta=0.8, 20 seeded 500-node layouts)",
        worst < 0.10,
        f"worst per-node relative error {worst * 100:.2f}%",
    )


def test_accept_ingest_throughput(bigstores):
    """10M-edge build < 5 minutes; peak RSS tracks nodes, not edges."""
    m = bigstores["metrics"]
    seconds = m["big"]["seconds"]
    spread = abs(m["big"]["peak_rss_mb"] - m["small"]["peak_rss_mb"]) / max(
        m["big"]["peak_rss_mb"], m["small"]["peak_rss_mb"]
    )
    _report(
        "ingest throughput + build-memory contract",
        seconds < 300.0 and spread < 0.10,
        f"10M-edge build {seconds:.0f}s; 1M vs 10M peak RSS "
        f"{m['small']['peak_rss_mb']:.0f}/{m['big']['peak_rss_mb']:.0f}MB "
        f"(spread {spread * 100:.1f}%)",
    )


def test_accept_protocol_conformance(tmp_path):
    """Scripted headless client: monotone frames, control-before-frame,
    expand position preservation."""
    src = write_edge_file(tmp_path / "p.txt", [(0, 1), (1, 2), (2, 3), (3, 4)])
    store = build_store(src, tmp_path / "proto.carn")
    config = ServiceConfig(stores=[store], frame_rate=60.0)
    ok_mono = ok_ctrl = ok_expand = False
    with TestClient(create_app(config)) as client:
        r = client.post(
            "/sessions",
            json={
                "dataset_id": "proto",
                "selection": {"external_ids": ["0", "1"]},
                "seed": 5,
                "paused": True,
            },
        )
        sid = r.json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            hello = next_json(ws)
            assert hello["type"] == "hello"
            ws.send_text(json.dumps({"op": "resume", "seq": 1}))
            next_json(ws)

            # frame monotonicity over a stretch of frames
            numbers = [next_frame(ws)[0] for _ in range(15)]
            ok_mono = all(b > a for a, b in zip(numbers, numbers[1:]))

            # control-before-frame: drag acked, then exact in next frame
            ws.send_text(json.dumps({"op": "drag", "index": 0, "x": 321.5, "y": -77.25, "seq": 2}))
            while True:
                kind, data = recv_any(ws)
                if kind == "json" and data.get("seq") == 2:
                    break
            fno, count, xy = next_frame(ws)
            ok_ctrl = (
                xy[0, 0] == np.float32(321.5)
                and xy[0, 1] == np.float32(-77.25)
                and count == 2
            )

            # expand preserves the pinned node bitwise and grows the frame
            ws.send_text(json.dumps({"op": "expand", "index": 1, "hops": 2, "cap": 10, "seq": 3}))
            while True:
                kind, data = recv_any(ws)
                if kind == "json" and data.get("seq") == 3:
                    assert data["type"] == "ack" and data["changed"] is True
                    break
            notice = next_json(ws)
            assert notice["type"] == "subgraph"
            new_count = len(notice["subgraph"]["nodes"])
            locals_by_ext = {
                n["external_id"]: i for i, n in enumerate(notice["subgraph"]["nodes"])
            }
            fno2, count2, xy2 = next_frame(ws)
            pinned_local = locals_by_ext["0"]
            ok_expand = (
                new_count == 4
                and count2 == 4
                and fno2 > fno
                and xy2[pinned_local, 0] == np.float32(321.5)
                and xy2[pinned_local, 1] == np.float32(-77.25)
            )
            ws.send_text(json.dumps({"op": "close"}))
        client.delete(f"/sessions/{sid}")
    _report(
        "protocol conformance (monotonic frames, control-before-frame, expand)",
        ok_mono and ok_ctrl and ok_expand,
        f"frames {numbers[0]}..{numbers[-1]}, drag exact, expand 2->4 nodes",
    )
