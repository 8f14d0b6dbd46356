"""Read-only handle over a built store file.

Opening validates header fields and per-section CRCs by streaming the
file through a fixed-size buffer, then maps the file and exposes the
adjacency as zero-copy views. Query operations read only the byte ranges
they need; the adjacency is never materialized as a whole. A handle is
immutable and safe to share across threads.
"""

from __future__ import annotations

import mmap
import struct
import threading
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import storefmt
from .errors import StoreFormatError

_VERIFY_CHUNK = 1 << 20


@dataclass(frozen=True)
class NodeRecord:
    internal: int
    external_id: str
    label: str
    degree: int


def _scan_node_table(data: bytes, n: int):
    """Byte offset of each length-prefixed node record, or None if torn.

    Plain-Python scan (~0.5s per million nodes) so the query path stays
    free of JIT dependencies.
    """
    offs = []
    append = offs.append
    pos = 0
    try:
        for _ in range(n):
            append(pos)
            pos += 2 + (data[pos] | (data[pos + 1] << 8))
            pos += 2 + (data[pos] | (data[pos + 1] << 8))
    except IndexError:
        return None, 0
    return np.array(offs, dtype=np.int64), pos


def _stream_crcs(fh, header: storefmt.StoreHeader) -> None:
    """Verify each section digest without materializing any section."""
    sections = [
        ("offsets", header.off_offsets, header.off_neighbors, header.crc_offsets),
        ("neighbors", header.off_neighbors, header.off_node_table, header.crc_neighbors),
        ("node table", header.off_node_table, header.off_label_index, header.crc_node_table),
        ("label index", header.off_label_index, header.off_trailer, header.crc_label_index),
    ]
    for name, start, end, expected in sections:
        fh.seek(start)
        crc = 0
        remaining = end - start
        while remaining > 0:
            chunk = fh.read(min(_VERIFY_CHUNK, remaining))
            if not chunk:
                raise StoreFormatError(f"truncated store file in {name} section")
            crc = zlib.crc32(chunk, crc)
            remaining -= len(chunk)
        if crc != expected:
            raise StoreFormatError(f"checksum mismatch in {name} section")


class GraphStore:
    """Immutable, disk-backed graph opened from a store file."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            fh = open(self.path, "rb")
        except OSError as e:
            raise StoreFormatError(f"cannot open store: {e}") from e
        with fh:
            raw_header = fh.read(storefmt.HEADER_SIZE)
            header = storefmt.unpack_header(raw_header)
            fh.seek(0, 2)
            file_size = fh.tell()
            storefmt.validate_section_offsets(header, file_size)
            fh.seek(header.off_trailer)
            trailer_raw = fh.read(storefmt.TRAILER_SIZE)
            if len(trailer_raw) != storefmt.TRAILER_SIZE:
                raise StoreFormatError("truncated store file: missing trailer")
            crcs = storefmt.TRAILER_STRUCT.unpack(trailer_raw)
            if zlib.crc32(trailer_raw[:20]) != crcs[5]:
                raise StoreFormatError("checksum trailer is corrupt")
            if zlib.crc32(raw_header) != crcs[0]:
                raise StoreFormatError("checksum mismatch in header")
            header = storefmt.StoreHeader(
                node_count=header.node_count,
                edge_count=header.edge_count,
                directed=header.directed,
                off_offsets=header.off_offsets,
                off_neighbors=header.off_neighbors,
                off_node_table=header.off_node_table,
                off_label_index=header.off_label_index,
                off_trailer=header.off_trailer,
                crc_header=crcs[0],
                crc_offsets=crcs[1],
                crc_neighbors=crcs[2],
                crc_node_table=crcs[3],
                crc_label_index=crcs[4],
            )
            _stream_crcs(fh, header)
            self.header = header
            self._mm = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)

        n = header.node_count
        self._offsets = np.frombuffer(
            self._mm, dtype="<u8", count=n + 1, offset=header.off_offsets
        )
        arc_count = (header.off_node_table - header.off_neighbors) // 4
        self._neighbors = np.frombuffer(
            self._mm, dtype="<u4", count=arc_count, offset=header.off_neighbors
        )
        if int(self._offsets[0]) != 0 or int(self._offsets[-1]) != arc_count:
            raise StoreFormatError("adjacency offsets do not cover neighbors section")
        if np.any(self._offsets[1:] < self._offsets[:-1]):
            raise StoreFormatError("adjacency offsets are not non-decreasing")

        table_size = header.off_label_index - header.off_node_table
        table = self._mm[header.off_node_table : header.off_label_index]
        self._rec_offs, end = _scan_node_table(table, n)
        del table
        if self._rec_offs is None or end != table_size:
            raise StoreFormatError("node table does not parse cleanly")

        entry_dtype = np.dtype([("off", "<u8"), ("nid", "<u4")])
        self._label_entries = np.frombuffer(
            self._mm, dtype=entry_dtype, count=n, offset=header.off_label_index
        )
        self._blob_start = header.off_label_index + storefmt.LABEL_ENTRY_SIZE * n
        self._blob_end = header.off_trailer

        self._ext_index: dict[str, int] | None = None
        self._ext_lock = threading.Lock()

    # -- counts ---------------------------------------------------------

    @property
    def node_count(self) -> int:
        return self.header.node_count

    @property
    def edge_count(self) -> int:
        return self.header.edge_count

    @property
    def directed(self) -> bool:
        return self.header.directed

    @property
    def offsets(self) -> np.ndarray:
        """CSR offsets view, length node_count + 1 (read-only)."""
        return self._offsets

    @property
    def neighbors_flat(self) -> np.ndarray:
        """Flat neighbor array view (read-only; backed by the file map)."""
        return self._neighbors

    # -- adjacency ------------------------------------------------------

    def _check_node(self, node: int) -> int:
        node = int(node)
        if not 0 <= node < self.header.node_count:
            raise IndexError(f"node id {node} out of range [0, {self.header.node_count})")
        return node

    def degree(self, node: int) -> int:
        node = self._check_node(node)
        return int(self._offsets[node + 1] - self._offsets[node])

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted neighbor ids of one node; reads only that slice."""
        node = self._check_node(node)
        return self._neighbors[int(self._offsets[node]) : int(self._offsets[node + 1])]

    def degrees(self) -> np.ndarray:
        """All degrees as int64 (derived from the offsets view)."""
        o = self._offsets.astype(np.int64)
        return o[1:] - o[:-1]

    # -- node records ----------------------------------------------------

    def _read_record_fields(self, node: int) -> tuple[str, str]:
        p = self.header.off_node_table + int(self._rec_offs[node])
        mm = self._mm
        l1 = int.from_bytes(mm[p : p + 2], "little")
        ext = mm[p + 2 : p + 2 + l1].decode("utf-8")
        p += 2 + l1
        l2 = int.from_bytes(mm[p : p + 2], "little")
        label = mm[p + 2 : p + 2 + l2].decode("utf-8")
        return ext, label

    def record(self, node: int) -> NodeRecord:
        node = self._check_node(node)
        ext, label = self._read_record_fields(node)
        return NodeRecord(node, ext, label, self.degree(node))

    def records(self, nodes) -> list[NodeRecord]:
        return [self.record(int(n)) for n in nodes]

    def lookup_external(self, external_id: str) -> int | None:
        """Exact-match lookup of a source-file token; None if absent."""
        if self._ext_index is None:
            with self._ext_lock:
                if self._ext_index is None:
                    index: dict[str, int] = {}
                    for i in range(self.header.node_count):
                        ext, _ = self._read_record_fields(i)
                        index[ext] = i
                    self._ext_index = index
        return self._ext_index.get(external_id)

    # -- label search -----------------------------------------------------

    def _label_bytes(self, idx: int) -> bytes:
        p = self._blob_start + int(self._label_entries["off"][idx])
        mm = self._mm
        ln = int.from_bytes(mm[p : p + 2], "little")
        return mm[p + 2 : p + 2 + ln]

    def search_labels(self, query: str, limit: int) -> list[tuple[int, str]]:
        """Case-insensitive prefix search over labels.

        Results come back in normalized-label order (ties by node id),
        at most ``limit`` of them, as (node id, stored label) pairs.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        q = storefmt.normalize_label(query).encode("utf-8")
        n = self.header.node_count
        lo, hi = 0, n
        while lo < hi:
            mid = (lo + hi) // 2
            if self._label_bytes(mid) < q:
                lo = mid + 1
            else:
                hi = mid
        out: list[tuple[int, str]] = []
        i = lo
        while i < n and len(out) < limit:
            lab = self._label_bytes(i)
            if not lab.startswith(q):
                break
            nid = int(self._label_entries["nid"][i])
            _, label = self._read_record_fields(nid)
            out.append((nid, label))
            i += 1
        return out

    def close(self) -> None:
        """Release views; the map closes once no views remain."""
        self._offsets = None
        self._neighbors = None
        self._label_entries = None
        self._ext_index = None
        try:
            self._mm.close()
        except BufferError:
            pass

    def __repr__(self) -> str:
        return (
            f"GraphStore({self.path.name!r}, nodes={self.node_count}, "
            f"edges={self.edge_count}, directed={self.directed})"
        )


def open_store(path) -> GraphStore:
    return GraphStore(path)
