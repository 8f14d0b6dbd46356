"""Per-node graph measures computed by streaming passes over the store.

Feature vectors persist as sidecar files next to the store
(``<store>.<name>.f64``): a 16-byte header (magic, version, value count)
followed by one little-endian f64 per node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import storefmt
from .errors import DataError, StoreFormatError, UnknownFeatureError
from .store import GraphStore

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-9
PAGERANK_MAX_ITERS = 100

# Neighbor entries processed per streaming chunk (bounds resident state).
_CHUNK_ENTRIES = 4_000_000

_NAME_RE = re.compile(r"[a-z0-9_]+")


@dataclass
class FeatureVector:
    feature_name: str
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


def _check_name(name: str) -> str:
    if not _NAME_RE.fullmatch(name):
        raise ValueError(f"bad feature name {name!r} (want [a-z0-9_]+)")
    return name


def feature_path(store_path, name: str) -> Path:
    store_path = Path(store_path)
    return store_path.parent / f"{store_path.name}.{_check_name(name)}.f64"


def _store_node_count(store_path) -> int:
    """Node count from the store header alone (no full validation)."""
    with open(store_path, "rb") as f:
        raw = f.read(storefmt.HEADER_SIZE)
    if len(raw) < storefmt.HEADER_SIZE:
        raise StoreFormatError(f"{store_path} is not a store file")
    return storefmt.unpack_header(raw).node_count


def list_features(store_path) -> list[str]:
    """Names of sidecar features present next to a store file."""
    store_path = Path(store_path)
    names = []
    for p in store_path.parent.glob(f"{store_path.name}.*.f64"):
        mid = p.name[len(store_path.name) + 1 : -len(".f64")]
        if _NAME_RE.fullmatch(mid):
            names.append(mid)
    return sorted(names)


def save_feature(store_path, fv: FeatureVector) -> Path:
    node_count = _store_node_count(store_path)
    if len(fv.values) != node_count:
        raise DataError(
            f"feature length {len(fv.values)} != node count {node_count}"
        )
    path = feature_path(store_path, fv.feature_name)
    header = storefmt.SIDECAR_HEADER_STRUCT.pack(
        storefmt.SIDECAR_MAGIC, 1, 0, len(fv.values)
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(fv.values, dtype="<f8").tobytes())
    return path


def load_feature(store_path, name: str) -> FeatureVector:
    path = feature_path(store_path, name)
    if not path.exists():
        raise UnknownFeatureError(f"no sidecar for feature {name!r} at {path}")
    node_count = _store_node_count(store_path)
    with open(path, "rb") as f:
        raw = f.read(storefmt.SIDECAR_HEADER_SIZE)
        if len(raw) != storefmt.SIDECAR_HEADER_SIZE:
            raise DataError(f"sidecar {path} is truncated")
        magic, version, _, count = storefmt.SIDECAR_HEADER_STRUCT.unpack(raw)
        if magic != storefmt.SIDECAR_MAGIC or version != 1:
            raise DataError(f"sidecar {path} has bad magic/version")
        if count != node_count:
            raise DataError(
                f"sidecar {path} holds {count} values, store has {node_count} nodes"
            )
        values = np.frombuffer(f.read(8 * count), dtype="<f8")
        if len(values) != count:
            raise DataError(f"sidecar {path} is truncated")
    return FeatureVector(name, values.copy(), {})


def _node_ranges(offsets: np.ndarray, cap: int):
    """Contiguous node ranges whose adjacency slices total <= ~cap entries."""
    n = len(offsets) - 1
    a = 0
    while a < n:
        b = int(np.searchsorted(offsets, int(offsets[a]) + cap, side="left"))
        b = max(b, a + 1)
        b = min(b, n)
        yield a, b
        a = b


def compute_degree(store: GraphStore) -> FeatureVector:
    """Degree of every node, as 64-bit reals."""
    return FeatureVector("degree", store.degrees().astype(np.float64), {})


def compute_pagerank(
    store: GraphStore,
    damping: float = PAGERANK_DAMPING,
    max_iters: int = PAGERANK_MAX_ITERS,
    tol: float = PAGERANK_TOL,
) -> FeatureVector:
    """Power-iteration PageRank streamed over the on-disk adjacency.

    Each iteration makes one pass over the adjacency in fixed-size
    chunks; resident state is two rank arrays plus constants. Out-degree
    normalization treats an undirected store as two arcs per edge.
    Mass of dangling (degree-0) nodes is redistributed uniformly.
    Iterates until the L1 change drops below ``tol`` or ``max_iters``.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    n = store.node_count
    offsets = store.offsets
    flat = store.neighbors_flat
    out_deg = store.degrees().astype(np.float64)
    dangling = out_deg == 0.0
    safe_deg = np.where(dangling, 1.0, out_deg)

    rank = np.full(n, 1.0 / n)
    residual = float("inf")
    iterations = 0
    for _ in range(max_iters):
        contrib = rank / safe_deg
        contrib[dangling] = 0.0
        nxt = np.zeros(n)
        if store.directed:
            for a, b in _node_ranges(offsets, _CHUNK_ENTRIES):
                sl = flat[int(offsets[a]) : int(offsets[b])]
                if sl.size == 0:
                    continue
                counts = (offsets[a + 1 : b + 1] - offsets[a:b]).astype(np.int64)
                srcs = np.repeat(np.arange(a, b), counts)
                nxt += np.bincount(sl, weights=contrib[srcs], minlength=n)
        else:
            # Symmetric adjacency: incoming contributions of node v are
            # exactly the contributions of v's own neighbor slice.
            for a, b in _node_ranges(offsets, _CHUNK_ENTRIES):
                sl = flat[int(offsets[a]) : int(offsets[b])]
                counts = (offsets[a + 1 : b + 1] - offsets[a:b]).astype(np.int64)
                if sl.size == 0:
                    continue
                vals = contrib[sl]
                starts = (offsets[a:b] - offsets[a]).astype(np.int64)
                seg = np.add.reduceat(vals, np.minimum(starts, vals.size - 1))
                seg[counts == 0] = 0.0
                nxt[a:b] = seg
        dangling_mass = float(rank[dangling].sum())
        nxt = (1.0 - damping) / n + damping * (nxt + dangling_mass / n)
        residual = float(np.abs(nxt - rank).sum())
        rank = nxt
        iterations += 1
        if residual < tol:
            break
    return FeatureVector(
        "pagerank",
        rank,
        {"damping": damping, "iterations": iterations, "residual": residual},
    )
