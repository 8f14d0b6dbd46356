#!/usr/bin/env python3
"""Build a ready-to-serve demo: synthetic store + features + serve hint.

Usage:
    python scripts/build_demo.py [--nodes N] [--edges E] [--seed S] [--out DIR]

Generates a seeded preferential-attachment graph, ingests it, computes
degree and pagerank sidecars, and prints the serve command.
"""

import argparse
import subprocess
import sys
from pathlib import Path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--edges", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", default="demo_data")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    txt = out / f"synth_{args.nodes}_{args.edges}.txt"
    store = out / f"synth_{args.nodes}_{args.edges}.carn"

    def run(*cmd):
        print("+", " ".join(cmd))
        subprocess.run([sys.executable, "-m", "graphdeck.cli", *cmd], check=True)

    run("gen-synthetic", str(txt), "--nodes", str(args.nodes),
        "--edges", str(args.edges), "--seed", str(args.seed))
    run("ingest", str(txt), "-o", str(store))
    run("pagerank", str(store))
    run("stats", str(store))
    print(f"\nserve it:\n  graphdeck serve {store} --static-dir frontend/dist")
    return 0


if __name__ == "__main__":
    sys.exit(main())
