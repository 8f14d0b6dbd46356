#!/usr/bin/env python3
"""Verify the out-of-core build-memory contract empirically.

Builds a 1M-edge and a 10M-edge edge list with identical node counts and
compares peak RSS of the two build processes: out-of-core ingestion must
keep peak memory a function of node count, not edge count (within 10%).
"""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

WRAPPER = """
import json, resource, sys, time
from graphdeck.build import build_store
t0 = time.perf_counter()
build_store(sys.argv[1], sys.argv[2])
print(json.dumps({
    "seconds": time.perf_counter() - t0,
    "peak_rss_mb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0,
}))
"""


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=1_000_000)
    args = ap.parse_args()

    results = {}
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        for tag, edges, seed in (("1M-edge", 1_000_000, 43), ("10M-edge", 10_000_000, 42)):
            txt = base / f"{tag}.txt"
            subprocess.run(
                [sys.executable, "-m", "graphdeck.cli", "gen-synthetic", str(txt),
                 "--nodes", str(args.nodes), "--edges", str(edges), "--seed", str(seed)],
                check=True, capture_output=True,
            )
            proc = subprocess.run(
                [sys.executable, "-c", WRAPPER, str(txt), str(base / f"{tag}.carn")],
                check=True, capture_output=True, text=True,
            )
            results[tag] = json.loads(proc.stdout.strip().splitlines()[-1])
            print(f"{tag}: {results[tag]['seconds']:.1f}s, "
                  f"peak RSS {results[tag]['peak_rss_mb']:.1f}MB")
            txt.unlink()

    peaks = [r["peak_rss_mb"] for r in results.values()]
    spread = abs(peaks[0] - peaks[1]) / max(peaks)
    verdict = "PASS" if spread < 0.10 else "FAIL"
    print(f"\n{verdict}: peak RSS spread {spread * 100:.1f}% (budget 10%)")
    return 0 if verdict == "PASS" else 1


if __name__ == "__main__":
    sys.exit(main())
