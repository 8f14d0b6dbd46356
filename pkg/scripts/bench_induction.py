#!/usr/bin/env python3
"""Reproduce the induction-latency experiment at desk scale.

Builds (or reuses) the 1M-node / 10M-edge preferential-attachment store,
then benchmarks 2000-node subgraph inductions and reports the latency
distribution and the benchmark process's peak memory. The reference
point being reproduced is a ~120ms induction of a 2000-node subgraph
out of a 69M-edge graph; the desk-scale pass budget is 200ms median.
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", default="demo_data", help="where the store lives")
    ap.add_argument("--nodes", type=int, default=1_000_000)
    ap.add_argument("--edges", type=int, default=10_000_000)
    ap.add_argument("--k", type=int, default=2000)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    base = Path(args.dir)
    base.mkdir(parents=True, exist_ok=True)
    store = base / f"synth_{args.nodes}_{args.edges}.carn"
    if not store.exists():
        txt = base / f"synth_{args.nodes}_{args.edges}.txt"
        subprocess.run(
            [sys.executable, "-m", "graphdeck.cli", "gen-synthetic", str(txt),
             "--nodes", str(args.nodes), "--edges", str(args.edges), "--seed", "42"],
            check=True,
        )
        subprocess.run(
            [sys.executable, "-m", "graphdeck.cli", "ingest", str(txt), "-o", str(store)],
            check=True,
        )
        txt.unlink()

    proc = subprocess.run(
        [sys.executable, "-m", "graphdeck.cli", "bench-induce", str(store),
         "--k", str(args.k), "--runs", str(args.runs), "--seed", str(args.seed),
         "--json-only"],
        check=True, capture_output=True, text=True,
    )
    report = json.loads(proc.stdout.strip().splitlines()[-1])
    print(json.dumps(report, indent=2))
    verdict = "PASS" if report["median_ms"] < 200.0 else "FAIL"
    print(f"\n{verdict}: median {report['median_ms']}ms (budget 200ms), "
          f"peak RSS {report['peak_rss_mb']}MB (budget 512MB)")
    return 0 if verdict == "PASS" else 1


if __name__ == "__main__":
    sys.exit(main())
