"""Shared helpers: tiny stores and independent brute-force oracles."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from graphdeck import GraphStore, build_store


def write_edge_file(path: Path, edges, comment: str | None = None) -> Path:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for u, v in edges:
        lines.append(f"{u} {v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_from_edges(dirpath: Path, edges, name: str = "g", **opts) -> GraphStore:
    src = write_edge_file(dirpath / f"{name}.txt", edges)
    return GraphStore(build_store(src, dirpath / f"{name}.carn", **opts))


def ref_adjacency(edges, *, directed=False, dedupe=True, drop_self_loops=True):
    """Brute-force oracle: token -> set/list of neighbor tokens.

    Independent of the store implementation: plain dicts of sets (or
    lists when duplicates are kept), mirroring the documented ingestion
    semantics.
    """
    tokens: list[str] = []
    seen: set[str] = set()
    adj: dict[str, list[str]] = {}

    def touch(t: str):
        if t not in seen:
            seen.add(t)
            tokens.append(t)
            adj[t] = []

    kept_arcs = 0
    self_arcs = 0
    for u, v in edges:
        u, v = str(u), str(v)
        touch(u)
        touch(v)
        if u == v:
            if drop_self_loops:
                continue
            adj[u].append(u)
        else:
            adj[u].append(v)
            if not directed:
                adj[v].append(u)
    if dedupe:
        adj = {t: sorted(set(ns), key=_token_sort_key(tokens)) for t, ns in adj.items()}
    else:
        adj = {t: sorted(ns, key=_token_sort_key(tokens)) for t, ns in adj.items()}
    for t, ns in adj.items():
        kept_arcs += len(ns)
        self_arcs += sum(1 for x in ns if x == t)
    if directed:
        edge_count = kept_arcs
    else:
        edge_count = (kept_arcs + self_arcs) // 2
    return tokens, adj, edge_count


def _token_sort_key(tokens):
    order = {t: i for i, t in enumerate(tokens)}
    return lambda t: order[t]


def ref_induced_edges(edges, selected_tokens, *, directed=False):
    """Brute-force induced edge set as frozenset of token pairs."""
    sel = set(str(t) for t in selected_tokens)
    out = set()
    for u, v in edges:
        u, v = str(u), str(v)
        if u != v and u in sel and v in sel:
            out.add((min(u, v), max(u, v)))
    return out


def random_edges(rng: random.Random, n_nodes: int, n_edges: int, *, self_loops=False, dups=False):
    edges = []
    for _ in range(n_edges):
        u = rng.randrange(n_nodes)
        v = rng.randrange(n_nodes)
        if not self_loops:
            while v == u:
                v = rng.randrange(n_nodes)
        edges.append((u, v))
    if dups and edges:
        for _ in range(max(1, n_edges // 10)):
            edges.append(rng.choice(edges))
    return edges


def erdos_renyi_edges(rng: random.Random, n: int, p: float):
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


@pytest.fixture
def triangle_store(tmp_path) -> GraphStore:
    return build_from_edges(tmp_path, [(0, 1), (1, 2), (2, 0)], name="triangle")


@pytest.fixture
def path_store(tmp_path) -> GraphStore:
    return build_from_edges(tmp_path, [(0, 1), (1, 2)], name="path")


@pytest.fixture
def star_store(tmp_path) -> GraphStore:
    edges = [("hub", f"leaf{i}") for i in range(10)]
    return build_from_edges(tmp_path, edges, name="star")
