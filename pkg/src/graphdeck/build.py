"""Streaming edge-list ingestion into a single-file graph store.

The build never holds the adjacency in RAM. Pass 1 streams the text file
once, assigning dense node ids in first-seen order, counting degrees, and
spilling raw arcs (u32 pairs) to a temporary binary file. The arcs are
then re-partitioned into node-range buckets whose adjacency fits a fixed
arc budget, and each bucket is sorted, deduplicated, and appended to the
store sequentially. Peak memory is O(node_count) for the id map plus
fixed-size buffers, independent of edge count.
"""

from __future__ import annotations

import tempfile
import zlib
from array import array
from pathlib import Path
from typing import Mapping

import numpy as np

from . import storefmt
from .errors import DataError

# Fixed-size knobs. Identical across input sizes so that build memory
# depends on node count only.
ARC_FLUSH_ENTRIES = 2_000_000  # u32 entries buffered before spilling (8MB)
BUCKET_ARC_CAP = 1_000_000     # arcs sorted in one go (~25MB transient)
READ_CHUNK_ARCS = 1_000_000    # arcs per read chunk while re-bucketing
WRITE_CHUNK = 1 << 20

MAX_TOKEN_BYTES = 0xFFFF  # u16 length prefix in the node table


class _CrcWriter:
    """Appends to a positioned file while accumulating a section CRC32."""

    def __init__(self, fh):
        self.fh = fh
        self.crc = 0

    def start_section(self):
        self.crc = 0

    def write(self, data) -> None:
        self.fh.write(data)
        self.crc = zlib.crc32(data, self.crc)


def _scan_pass(src: Path, arcs_fh, directed: bool, drop_self_loops: bool):
    """Pass 1: assign ids, count (pre-dedupe) degrees, spill arcs."""
    ids: dict[str, int] = {}
    tokens: list[str] = []
    degrees = array("q")
    buf = array("I")
    arc_total = 0
    get = ids.get
    with open(src, "rt", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if line.startswith("#"):
                continue
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(
                    f"{src}:{lineno}: expected 'src dst', got {line.rstrip()!r}"
                )
            a, b = parts
            u = get(a)
            if u is None:
                u = ids[a] = len(tokens)
                tokens.append(a)
                degrees.append(0)
            v = get(b)
            if v is None:
                v = ids[b] = len(tokens)
                tokens.append(b)
                degrees.append(0)
            if u == v:
                if drop_self_loops:
                    continue
                # A kept self-loop is one adjacency entry (one arc).
                buf.append(u)
                buf.append(u)
                degrees[u] += 1
                arc_total += 1
            else:
                buf.append(u)
                buf.append(v)
                degrees[u] += 1
                arc_total += 1
                if not directed:
                    buf.append(v)
                    buf.append(u)
                    degrees[v] += 1
                    arc_total += 1
            if len(buf) >= ARC_FLUSH_ENTRIES:
                arcs_fh.write(buf.tobytes())
                del buf[:]
    if buf:
        arcs_fh.write(buf.tobytes())
    arcs_fh.flush()
    assert len(set(ids.values())) == len(tokens), "dense id collision"
    return ids, tokens, np.asarray(degrees, dtype=np.int64), arc_total


def _bucket_bounds(degrees: np.ndarray, cap: int) -> list[tuple[int, int]]:
    """Split nodes into contiguous ranges of at most ~cap arcs each."""
    n = len(degrees)
    cum = np.cumsum(degrees)
    total = int(cum[-1]) if n else 0
    if total <= cap:
        return [(0, n)]
    marks = np.arange(cap, total + cap, cap, dtype=np.int64)
    cuts = np.searchsorted(cum, marks, side="left") + 1
    bounds = [0]
    for c in cuts:
        c = min(int(c), n)
        if c > bounds[-1]:
            bounds.append(c)
    if bounds[-1] != n:
        bounds.append(n)
    return list(zip(bounds, bounds[1:]))


def _rebucket(arcs_path: Path, bounds, tmpdir: Path) -> list[Path]:
    """Pass 2: partition the arc spill file by source-node range."""
    paths = [tmpdir / f"bucket{i:05d}.arcs" for i in range(len(bounds))]
    files = [open(p, "wb", buffering=WRITE_CHUNK) for p in paths]
    lows = np.array([lo for lo, _ in bounds], dtype=np.int64)
    try:
        with open(arcs_path, "rb") as f:
            while True:
                raw = f.read(READ_CHUNK_ARCS * 8)
                if not raw:
                    break
                pairs = np.frombuffer(raw, dtype=np.uint32).reshape(-1, 2)
                which = np.searchsorted(lows, pairs[:, 0], side="right") - 1
                for i, fh in enumerate(files):
                    sel = pairs[which == i]
                    if sel.size:
                        fh.write(sel.tobytes())
    finally:
        for fh in files:
            fh.close()
    return paths


def _emit_bucket(pairs: np.ndarray, lo: int, hi: int, dedupe: bool, writer: _CrcWriter):
    """Sort one bucket's arcs, optionally dedupe, append neighbor column."""
    if pairs.size == 0:
        return np.zeros(hi - lo, dtype=np.int64), 0
    u = pairs[:, 0].astype(np.int64)
    v = pairs[:, 1]
    order = np.lexsort((v, u))
    u = u[order]
    v = v[order]
    if dedupe:
        keep = np.empty(len(u), dtype=bool)
        keep[0] = True
        np.logical_or(u[1:] != u[:-1], v[1:] != v[:-1], out=keep[1:])
        u = u[keep]
        v = v[keep]
    self_arcs = int(np.count_nonzero(u == v.astype(np.int64)))
    final_deg = np.bincount(u - lo, minlength=hi - lo)
    writer.write(np.ascontiguousarray(v, dtype="<u4").tobytes())
    return final_deg, self_arcs


def _write_node_table(writer: _CrcWriter, tokens, labels: Mapping[str, str] | None):
    buf = bytearray()
    for i, tok in enumerate(tokens):
        ext = tok.encode("utf-8")
        lab_s = labels.get(tok, tok) if labels else tok
        lab = lab_s.encode("utf-8")
        if len(ext) > MAX_TOKEN_BYTES or len(lab) > MAX_TOKEN_BYTES:
            raise DataError(f"node {i}: id or label longer than {MAX_TOKEN_BYTES} bytes")
        buf += len(ext).to_bytes(2, "little")
        buf += ext
        buf += len(lab).to_bytes(2, "little")
        buf += lab
        if len(buf) >= WRITE_CHUNK:
            writer.write(bytes(buf))
            buf.clear()
    if buf:
        writer.write(bytes(buf))


def _write_label_index(writer: _CrcWriter, tokens, labels: Mapping[str, str] | None):
    n = len(tokens)
    norm = [
        storefmt.normalize_label(labels.get(tok, tok) if labels else tok).encode("utf-8")
        for tok in tokens
    ]
    order = sorted(range(n), key=lambda i: (norm[i], i))
    lengths = np.fromiter((len(norm[i]) for i in order), dtype=np.int64, count=n)
    blob_offs = np.zeros(n, dtype=np.uint64)
    if n > 1:
        blob_offs[1:] = np.cumsum(lengths[:-1] + 2)
    entries = np.zeros(n, dtype=np.dtype([("off", "<u8"), ("nid", "<u4")]))
    entries["off"] = blob_offs
    entries["nid"] = np.asarray(order, dtype=np.uint32)
    writer.write(entries.tobytes())
    buf = bytearray()
    for i in order:
        lab = norm[i]
        buf += len(lab).to_bytes(2, "little")
        buf += lab
        if len(buf) >= WRITE_CHUNK:
            writer.write(bytes(buf))
            buf.clear()
    if buf:
        writer.write(bytes(buf))


def build_store(
    edge_list_path,
    out_path=None,
    *,
    directed: bool = False,
    dedupe: bool = True,
    drop_self_loops: bool = True,
    labels: Mapping[str, str] | None = None,
) -> Path:
    """Build a store file from a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are skipped. Node tokens are
    arbitrary strings; dense internal ids are assigned in first-seen
    order. Undirected inputs are symmetrized (each edge becomes two arcs).
    Returns the path of the written store.
    """
    src = Path(edge_list_path)
    out = Path(out_path) if out_path is not None else src.with_suffix(".carn")
    out.parent.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory(dir=out.parent, prefix=".gdk-build-") as tmp:
        tmpdir = Path(tmp)
        arcs_path = tmpdir / "arcs.u32"
        with open(arcs_path, "wb", buffering=WRITE_CHUNK) as arcs_fh:
            ids, tokens, degrees, arc_total = _scan_pass(
                src, arcs_fh, directed, drop_self_loops
            )
        del ids
        n = len(tokens)
        if n == 0:
            raise DataError("empty graph: input has no edges")

        bounds = _bucket_bounds(degrees, BUCKET_ARC_CAP)
        if len(bounds) > 1:
            bucket_paths = _rebucket(arcs_path, bounds, tmpdir)
        else:
            bucket_paths = [arcs_path]

        with open(out, "w+b") as fh:
            writer = _CrcWriter(fh)
            fh.write(b"\0" * storefmt.HEADER_SIZE)
            off_offsets = storefmt.HEADER_SIZE
            # Reserve the offsets section; real values are patched in once
            # final (post-dedupe) degrees are known.
            remaining = 8 * (n + 1)
            zeros = b"\0" * WRITE_CHUNK
            while remaining > 0:
                fh.write(zeros[: min(remaining, WRITE_CHUNK)])
                remaining -= WRITE_CHUNK
            off_neighbors = off_offsets + 8 * (n + 1)

            writer.start_section()
            final_degrees = np.zeros(n, dtype=np.int64)
            self_arcs = 0
            for (lo, hi), bpath in zip(bounds, bucket_paths):
                pairs = np.fromfile(bpath, dtype=np.uint32).reshape(-1, 2)
                deg, sl = _emit_bucket(pairs, lo, hi, dedupe, writer)
                final_degrees[lo:hi] = deg
                self_arcs += sl
                if bpath != arcs_path:
                    bpath.unlink()
            crc_neighbors = writer.crc
            arc_count = int(final_degrees.sum())
            if directed:
                edge_count = arc_count
            else:
                assert (arc_count + self_arcs) % 2 == 0
                edge_count = (arc_count + self_arcs) // 2
            off_node_table = off_neighbors + 4 * arc_count

            writer.start_section()
            _write_node_table(writer, tokens, labels)
            crc_node_table = writer.crc
            off_label_index = fh.tell()

            writer.start_section()
            _write_label_index(writer, tokens, labels)
            crc_label_index = writer.crc
            off_trailer = fh.tell()

            # Patch the offsets section.
            offsets = np.zeros(n + 1, dtype="<u8")
            np.cumsum(final_degrees, out=offsets[1:])
            fh.seek(off_offsets)
            writer.start_section()
            raw = offsets.tobytes()
            for i in range(0, len(raw), WRITE_CHUNK):
                writer.write(raw[i : i + WRITE_CHUNK])
            crc_offsets = writer.crc

            header = storefmt.StoreHeader(
                node_count=n,
                edge_count=edge_count,
                directed=directed,
                off_offsets=off_offsets,
                off_neighbors=off_neighbors,
                off_node_table=off_node_table,
                off_label_index=off_label_index,
                off_trailer=off_trailer,
            )
            header_bytes = header.pack()
            crc_header = zlib.crc32(header_bytes)
            trailer = storefmt.TRAILER_STRUCT.pack(
                crc_header,
                crc_offsets,
                crc_neighbors,
                crc_node_table,
                crc_label_index,
                0,
            )
            trailer = trailer[:20] + zlib.crc32(trailer[:20]).to_bytes(4, "little")
            fh.seek(off_trailer)
            fh.write(trailer)
            fh.seek(0)
            fh.write(header_bytes)
            fh.flush()
    return out
