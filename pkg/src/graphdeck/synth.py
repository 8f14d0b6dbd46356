"""Seeded synthetic graph generation for benchmarks and demos.

Preferential attachment with a fixed (node, edge) budget: each new node
links to distinct earlier nodes sampled proportionally to degree (the
classic repeated-endpoints pool), producing the power-law degree tail
typical of real  social/web graphs. Output is reproducible bit-for-bit
for a given seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numba import njit

from .errors import DataError


@njit(cache=True)
def _pref_attach_core(n_nodes, m0, links, total_edges, seed):
    np.random.seed(seed)
    edges = np.empty((total_edges, 2), dtype=np.uint32)
    pool = np.empty(2 * total_edges, dtype=np.uint32)
    pool_len = 0
    e = 0
    scratch = np.empty(64, dtype=np.uint32)
    for i in range(m0, n_nodes):
        m = links[i - m0]
        got = 0
        tries = 0
        while got < m:
            if pool_len == 0:
                t = np.uint32(np.random.randint(0, i))
            else:
                t = pool[np.random.randint(0, pool_len)]
            dup = False
            for j in range(got):
                if scratch[j] == t:
                    dup = True
                    break
            tries += 1
            if dup:
                if tries > 32 * m + 64:
                    # Deterministic escape for saturated pools: walk ids.
                    t = np.uint32((int(t) + 1) % i)
                    while True:
                        dup2 = False
                        for j in range(got):
                            if scratch[j] == t:
                                dup2 = True
                                break
                        if not dup2:
                            break
                        t = np.uint32((int(t) + 1) % i)
                else:
                    continue
            scratch[got] = t
            got += 1
        for j in range(m):
            t = scratch[j]
            edges[e, 0] = i
            edges[e, 1] = t
            e += 1
            pool[pool_len] = t
            pool_len += 1
            pool[pool_len] = i
            pool_len += 1
    return edges


def generate_pref_attach(n_nodes: int, n_edges: int, seed: int) -> np.ndarray:
    """Edge array (n_edges, 2) of a seeded preferential-attachment graph."""
    if n_nodes < 2:
        raise DataError("need at least 2 nodes")
    if n_edges < 1:
        raise DataError("need at least 1 edge")
    base = max(1, n_edges // max(n_nodes - 1, 1))
    m0 = base + 1
    attachers = n_nodes - m0
    if attachers < 1:
        raise DataError(f"too few nodes ({n_nodes}) for {n_edges} edges")
    base = n_edges // attachers
    extra = n_edges - base * attachers
    if base + 1 > m0:
        m0 = base + 2
        attachers = n_nodes - m0
        if attachers < 1:
            raise DataError(f"too few nodes ({n_nodes}) for {n_edges} edges")
        base = n_edges // attachers
        extra = n_edges - base * attachers
    if base + (1 if extra else 0) > 64:
        raise DataError("edge density too high for the generator (max ~64 per node)")
    links = np.full(attachers, base, dtype=np.int64)
    links[:extra] += 1
    return _pref_attach_core(n_nodes, m0, links, n_edges, seed)


def write_edge_list(edges: np.ndarray, out_path, *, comment: str | None = None) -> Path:
    """Write edges as SNAP-style text (`src dst` per line)."""
    out = Path(out_path)
    import pandas as pd

    with open(out, "w", encoding="utf-8") as f:
        if comment:
            f.write(f"# {comment}\n")
        pd.DataFrame(edges).to_csv(f, sep=" ", header=False, index=False)
    return out


def generate_edge_list_file(
    n_nodes: int, n_edges: int, seed: int, out_path, model: str = "pref_attach"
) -> Path:
    if model != "pref_attach":
        raise DataError(f"unknown synthetic model {model!r}")
    edges = generate_pref_attach(n_nodes, n_edges, seed)
    return write_edge_list(
        edges,
        out_path,
        comment=f"synthetic pref_attach nodes={n_nodes} edges={n_edges} seed={seed}",
    )
