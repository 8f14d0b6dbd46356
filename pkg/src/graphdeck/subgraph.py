"""Materialize selected regions of an on-disk graph in memory.

``induce`` walks only the adjacency slices of the selected nodes, so its
cost and transient memory scale with the selection and its induced edge
count, never with the size of the parent store.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as features_mod
from .store import GraphStore, NodeRecord

# Neighbor entries gathered per vectorized induction chunk.
_INDUCE_CHUNK = 65_536


class NodeSet:
    """Immutable set of node ids with an ascending-id snapshot."""

    __slots__ = ("ids", "_members")

    def __init__(self, ids, *, node_count: int | None = None):
        arr = np.unique(np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64))
        if arr.size and arr[0] < 0:
            raise ValueError("node ids must be non-negative")
        if node_count is not None and arr.size and arr[-1] >= node_count:
            raise IndexError(f"node id {int(arr[-1])} out of range [0, {node_count})")
        self.ids = arr.astype(np.uint32)
        self.ids.setflags(write=False)
        self._members: frozenset | None = None

    def __len__(self) -> int:
        return int(self.ids.size)

    def __iter__(self):
        return iter(int(x) for x in self.ids)

    def __contains__(self, node) -> bool:
        if self._members is None:
            self._members = frozenset(self.ids.tolist())
        return int(node) in self._members

    def union(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(np.union1d(self.ids, other.ids))

    def __repr__(self) -> str:
        return f"NodeSet({self.ids.size} nodes)"


@dataclass(frozen=True)
class SubgraphOrigin:
    store: str
    selection: str


@dataclass(frozen=True)
class Subgraph:
    """Induced subgraph over local indices 0..len(nodes)-1.

    ``nodes`` is ordered by ascending parent-store id; ``edges`` holds
    (local_u, local_v) pairs with local_u < local_v, lexicographically
    sorted, each undirected edge once.
    """

    nodes: tuple[NodeRecord, ...]
    edges: np.ndarray
    origin: SubgraphOrigin = field(default=SubgraphOrigin("", ""))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def parent_ids(self) -> np.ndarray:
        return np.array([r.internal for r in self.nodes], dtype=np.uint32)

    def to_payload(self, features: dict[str, np.ndarray] | None = None) -> dict:
        """JSON-ready dict: nodes with attributes, edges as index pairs."""
        nodes = []
        for li, rec in enumerate(self.nodes):
            fvals = {}
            if features:
                for name, vals in features.items():
                    fvals[name] = float(vals[li])
            nodes.append(
                {
                    "id": rec.internal,
                    "external_id": rec.external_id,
                    "label": rec.label,
                    "degree": rec.degree,
                    "features": fvals,
                }
            )
        return {
            "nodes": nodes,
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "origin": {"store": self.origin.store, "selection": self.origin.selection},
        }

    def to_json(self, features: dict[str, np.ndarray] | None = None) -> str:
        return json.dumps(self.to_payload(features))

    def write_csv(self, nodes_path, edges_path) -> None:
        """Two-file CSV form: nodes.csv and edges.csv."""
        with open(nodes_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["local_index", "id", "external_id", "label", "degree"])
            for li, rec in enumerate(self.nodes):
                w.writerow([li, rec.internal, rec.external_id, rec.label, rec.degree])
        with open(edges_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["u", "v"])
            for u, v in self.edges:
                w.writerow([int(u), int(v)])


def _member_chunks(store: GraphStore, members: np.ndarray, cap: int):
    """Split members into runs whose slice totals stay under ~cap entries."""
    offsets = store.offsets
    degs = (offsets[members + 1] - offsets[members]).astype(np.int64)
    cum = np.cumsum(degs)
    a = 0
    total = len(members)
    while a < total:
        base = cum[a - 1] if a else 0
        b = int(np.searchsorted(cum, base + cap, side="left")) + 1
        b = min(max(b, a + 1), total)
        yield a, b, degs[a:b]
        a = b


def induce(store: GraphStore, node_set: NodeSet, *, selection_desc: str = "custom") -> Subgraph:
    """Exactly the parent edges with both endpoints in ``node_set``.

    Reads only the adjacency slices of the selected nodes. On directed
    stores the arc direction is collapsed; each resulting pair appears
    once with local_u < local_v.
    """
    members = node_set.ids.astype(np.int64)
    if members.size and members[-1] >= store.node_count:
        raise IndexError(
            f"node id {int(members[-1])} out of range [0, {store.node_count})"
        )
    origin = SubgraphOrigin(str(store.path), selection_desc)
    records = tuple(store.records(members))
    if members.size == 0:
        return Subgraph(records, np.empty((0, 2), dtype=np.uint32), origin)

    offsets = store.offsets
    flat = store.neighbors_flat
    m = members.size
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    for a, b, degs in _member_chunks(store, members, _INDUCE_CHUNK):
        total = int(degs.sum())
        if total == 0:
            continue
        starts = offsets[members[a:b]].astype(np.int64)
        local_cum = np.concatenate(([0], np.cumsum(degs)[:-1]))
        gather = np.arange(total, dtype=np.int64) + np.repeat(starts - local_cum, degs)
        nbr = flat[gather].astype(np.int64)
        src_local = np.repeat(np.arange(a, b, dtype=np.int64), degs)
        pos = np.searchsorted(members, nbr)
        inset = members[np.minimum(pos, m - 1)] == nbr
        if store.directed:
            # Forward arcs may point either way; self-loops excluded.
            keep = inset & (nbr != members[src_local])
        else:
            keep = inset & (nbr > members[src_local])
        if not keep.any():
            continue
        us.append(src_local[keep].astype(np.uint32))
        vs.append(pos[keep].astype(np.uint32))

    if not us:
        return Subgraph(records, np.empty((0, 2), dtype=np.uint32), origin)
    u_all = np.concatenate(us)
    v_all = np.concatenate(vs)
    # Canonicalize to local_u < local_v and drop duplicates (arc pairs on
    # directed stores; repeated entries if the store kept duplicate edges).
    lo = np.minimum(u_all, v_all)
    hi = np.maximum(u_all, v_all)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    keep = np.empty(len(lo), dtype=bool)
    keep[0] = True
    np.logical_or(lo[1:] != lo[:-1], hi[1:] != hi[:-1], out=keep[1:])
    edges = np.column_stack([lo[keep], hi[keep]])
    edges.setflags(write=False)
    return Subgraph(records, edges, origin)


def expand(store: GraphStore, seeds: NodeSet, hops: int, cap: int) -> NodeSet:
    """BFS neighborhood of the seeds, capped deterministically.

    Nodes are admitted level by level, within a level by ascending id,
    until ``cap`` nodes are in. The seeds are always included.
    """
    if hops < 0:
        raise ValueError("hops must be non-negative")
    if cap < len(seeds):
        raise ValueError(f"cap {cap} is smaller than the seed set ({len(seeds)})")
    if seeds.ids.size and int(seeds.ids[-1]) >= store.node_count:
        raise IndexError(
            f"node id {int(seeds.ids[-1])} out of range [0, {store.node_count})"
        )
    admitted = seeds.ids.astype(np.int64)
    frontier = admitted
    budget = cap - admitted.size
    for _ in range(hops):
        if budget <= 0 or frontier.size == 0:
            break
        slices = [store.neighbors(int(u)) for u in frontier]
        if not slices:
            break
        cand = np.unique(np.concatenate(slices).astype(np.int64))
        if cand.size:
            pos = np.searchsorted(admitted, cand)
            seen = admitted[np.minimum(pos, admitted.size - 1)] == cand
            cand = cand[~seen]
        if cand.size > budget:
            cand = cand[:budget]
        admitted = np.sort(np.concatenate([admitted, cand]))
        frontier = cand
        budget -= cand.size
    return NodeSet(admitted)


def select_top_k(store: GraphStore, feature_name: str, k: int) -> NodeSet:
    """The k nodes with the highest sidecar feature value (ties: lower id)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > store.node_count:
        raise ValueError(f"k {k} exceeds node count {store.node_count}")
    fv = features_mod.load_feature(store.path, feature_name)
    order = np.argsort(-fv.values, kind="stable")[:k]
    return NodeSet(order)
