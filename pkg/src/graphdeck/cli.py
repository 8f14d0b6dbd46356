"""Operator command line: ingest, stats, features, queries, bench, serve.

Exit codes: 0 success, 1 usage error, 2 data/store error.
"""

from __future__ import annotations

import argparse
import json
import resource
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import build, features, subgraph
from .errors import GraphDeckError
from .store import GraphStore

# layout/synth (JIT-backed) and service imports are deferred into their
# commands so data-path commands start light.


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class BenchReport:
    runs: int
    k: int
    selection: str
    latencies_ms: list[float]
    median_ms: float
    p95_ms: float
    induced_nodes: int
    induced_edges: int
    store_edge_count: int
    peak_rss_mb: float


def _peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _load_labels(path) -> dict[str, str]:
    labels = {}
    with open(path, "rt", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise GraphDeckError(f"{path}:{lineno}: expected 'id<TAB>label'")
            labels[parts[0]] = parts[1]
    return labels


def _parse_selection(store: GraphStore, args) -> subgraph.NodeSet:
    chosen = [x for x in (args.ids, args.top_k, getattr(args, "expand", None)) if x]
    if len(chosen) != 1:
        raise SystemExit(1)
    if args.ids:
        ids = []
        for tok in args.ids.split(","):
            nid = store.lookup_external(tok)
            if nid is None:
                raise GraphDeckError(f"unknown external id {tok!r}")
            ids.append(nid)
        return subgraph.NodeSet(ids, node_count=store.node_count)
    if args.top_k:
        name, _, k = args.top_k.partition(":")
        if not k.isdigit():
            raise SystemExit(1)
        return subgraph.select_top_k(store, name, int(k))
    seeds_s, _, rest = args.expand.partition(":")
    hops_s, _, cap_s = rest.partition(":")
    if not (hops_s.lstrip("-").isdigit() and cap_s.isdigit()):
        raise SystemExit(1)
    ids = []
    for tok in seeds_s.split(","):
        nid = store.lookup_external(tok)
        if nid is None:
            raise GraphDeckError(f"unknown external id {tok!r}")
        ids.append(nid)
    seeds = subgraph.NodeSet(ids, node_count=store.node_count)
    return subgraph.expand(store, seeds, int(hops_s), int(cap_s))


def _selection_desc(args) -> str:
    if args.ids:
        return f"ids:{args.ids}"
    if args.top_k:
        return f"top_k:{args.top_k}"
    return f"expand:{args.expand}"


def _add_selection_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ids", help="comma-separated external ids")
    p.add_argument("--top-k", dest="top_k", help="feature:k, e.g. pagerank:100")
    p.add_argument(
        "--expand", help="seeds:hops:cap, seeds = comma-separated external ids"
    )


def cmd_ingest(args) -> int:
    labels = _load_labels(args.labels) if args.labels else None
    t0 = time.perf_counter()
    out = build.build_store(
        args.edge_list,
        args.out,
        directed=args.directed,
        dedupe=not args.no_dedupe,
        drop_self_loops=not args.keep_self_loops,
        labels=labels,
    )
    store = GraphStore(out)
    features.save_feature(out, features.compute_degree(store))
    elapsed = time.perf_counter() - t0
    print(
        f"nodes={store.node_count} edges={store.edge_count} "
        f"directed={str(store.directed).lower()} elapsed_s={elapsed:.2f} "
        f"features=degree store={out}"
    )
    return 0


def cmd_stats(args) -> int:
    store = GraphStore(args.store)
    feats = ",".join(features.list_features(args.store))
    print(
        f"nodes={store.node_count} edges={store.edge_count} "
        f"directed={str(store.directed).lower()}"
        + (f" features={feats}" if feats else "")
    )
    return 0


def cmd_search(args) -> int:
    store = GraphStore(args.store)
    for nid, label in store.search_labels(args.query, args.limit):
        print(f"{nid}\t{label}")
    return 0


def cmd_pagerank(args) -> int:
    store = GraphStore(args.store)
    fv = features.compute_pagerank(
        store, damping=args.damping, max_iters=args.max_iters, tol=args.tol
    )
    path = features.save_feature(args.store, fv)
    print(
        f"feature=pagerank iterations={fv.metadata['iterations']} "
        f"residual={fv.metadata['residual']:.3e} sum={fv.values.sum():.9f} "
        f"sidecar={path}"
    )
    return 0


def cmd_induce(args) -> int:
    store = GraphStore(args.store)
    node_set = _parse_selection(store, args)
    sub = subgraph.induce(store, node_set, selection_desc=_selection_desc(args))
    if args.out_prefix:
        nodes_csv = Path(f"{args.out_prefix}nodes.csv")
        edges_csv = Path(f"{args.out_prefix}edges.csv")
        sub.write_csv(nodes_csv, edges_csv)
        print(f"nodes={sub.node_count} edges={sub.edge_count} "
              f"wrote {nodes_csv} {edges_csv}")
    else:
        print(sub.to_json())
    return 0


def cmd_layout(args) -> int:
    from . import layout

    store = GraphStore(args.store)
    node_set = _parse_selection(store, args)
    sub = subgraph.induce(store, node_set, selection_desc=_selection_desc(args))
    state = layout.init_layout(sub, args.seed, (args.width, args.height))
    remaining = args.iters
    while remaining > 0:
        batch = min(remaining, 200)
        layout.step(state, sub, batch)
        remaining -= batch
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("local_index,x,y\n")
        for i, (x, y) in enumerate(state.positions):
            f.write(f"{i},{x:.6f},{y:.6f}\n")
    print(f"nodes={sub.node_count} edges={sub.edge_count} iters={args.iters} out={args.out}")
    return 0


def cmd_bench_induce(args) -> int:
    store = GraphStore(args.store)
    if args.k > store.node_count:
        raise GraphDeckError(f"k {args.k} exceeds node count {store.node_count}")
    rng = np.random.default_rng(args.seed)

    def sample() -> subgraph.NodeSet:
        if args.selection == "random":
            ids = rng.choice(store.node_count, size=args.k, replace=False)
            return subgraph.NodeSet(ids)
        return subgraph.select_top_k(store, "pagerank", args.k)

    warm = subgraph.induce(store, sample(), selection_desc="bench-warm")
    latencies = []
    edges_counts = []
    for _ in range(args.runs):
        ns = sample()
        t0 = time.perf_counter()
        sub = subgraph.induce(store, ns, selection_desc="bench")
        latencies.append((time.perf_counter() - t0) * 1000.0)
        edges_counts.append(sub.edge_count)
    report = BenchReport(
        runs=args.runs,
        k=args.k,
        selection=args.selection,
        latencies_ms=[round(x, 3) for x in latencies],
        median_ms=round(statistics.median(latencies), 3),
        p95_ms=round(float(np.percentile(latencies, 95)), 3),
        induced_nodes=warm.node_count,
        induced_edges=int(statistics.median(edges_counts)),
        store_edge_count=store.edge_count,
        peak_rss_mb=round(_peak_rss_mb(), 1),
    )
    if not args.json_only:
        print(f"bench induce  store={args.store}")
        print(f"  runs={report.runs} k={report.k} selection={report.selection}")
        print(f"  median_ms={report.median_ms} p95_ms={report.p95_ms}")
        print(f"  induced_nodes={report.induced_nodes} induced_edges={report.induced_edges}")
        print(f"  store_edges={report.store_edge_count} peak_rss_mb={report.peak_rss_mb}")
    print(json.dumps(asdict(report)))
    return 0


def cmd_gen_synthetic(args) -> int:
    from . import synth

    out = synth.generate_edge_list_file(
        args.nodes, args.edges, args.seed, args.out, model=args.model
    )
    print(f"wrote {out} nodes={args.nodes} edges={args.edges} seed={args.seed}")
    return 0


def cmd_serve(args) -> int:
    from . import service

    config = service.ServiceConfig.load(
        store_paths=[Path(p) for p in args.stores],
        config_path=args.config,
        port=args.port,
        frame_rate=args.frame_rate,
        iters_per_frame=args.iters_per_frame,
        static_dir=args.static_dir,
    )
    service.run(config)
    return 0


def main(argv=None) -> int:
    parser = _Parser(prog="graphdeck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a store from an edge-list file")
    p.add_argument("edge_list")
    p.add_argument("-o", "--out", help="output store path (default: <input>.carn)")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--keep-self-loops", action="store_true")
    p.add_argument("--labels", help="tab-separated external_id -> label file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="print store counts")
    p.add_argument("store")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("search", help="prefix-search node labels")
    p.add_argument("store")
    p.add_argument("query")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("pagerank", help="compute and persist pagerank")
    p.add_argument("store")
    p.add_argument("--damping", type=float, default=features.PAGERANK_DAMPING)
    p.add_argument("--tol", type=float, default=features.PAGERANK_TOL)
    p.add_argument("--max-iters", type=int, default=features.PAGERANK_MAX_ITERS)
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("induce", help="induce a subgraph and print/export it")
    p.add_argument("store")
    _add_selection_flags(p)
    p.add_argument("--out-prefix", help="write <prefix>nodes.csv and <prefix>edges.csv")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("layout", help="run headless layout, write positions CSV")
    p.add_argument("store")
    _add_selection_flags(p)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--width", type=float, default=1000.0)
    p.add_argument("--height", type=float, default=1000.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("bench-induce", help="repeated-induction latency benchmark")
    p.add_argument("store")
    p.add_argument("--k", type=int, default=2000)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--selection", choices=["random", "top_pagerank"], default="random")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json-only", action="store_true")
    p.set_defaults(func=cmd_bench_induce)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic edge list")
    p.add_argument("out")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--model", choices=["pref_attach"], default="pref_attach")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("serve", help="serve stores to the browser explorer")
    p.add_argument("stores", nargs="*", help="store files (may also come from --config)")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--frame-rate", type=float, default=None)
    p.add_argument("--iters-per-frame", type=int, default=None)
    p.add_argument("--static-dir", default=None)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphDeckError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
