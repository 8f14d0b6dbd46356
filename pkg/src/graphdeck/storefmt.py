"""On-disk store layout: header, section order, checksum trailer.

All multi-byte integers are little-endian. The file is laid out as

    [header 64B][offsets (N+1)*u64][neighbors E'*u32][node table][label index][trailer 24B]

where the node table holds, per node, a u16-length-prefixed UTF-8
external id followed by a u16-length-prefixed UTF-8 label, and the label
index holds N fixed-size entries (u64 blob offset, u32 node id) sorted by
normalized label bytes, followed by a blob of u16-length-prefixed
normalized labels. The trailer carries one CRC32 per section plus a CRC
of the trailer itself.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import StoreFormatError

MAGIC = b"CARN"
FORMAT_VERSION = 1

FLAG_DIRECTED = 1

HEADER_STRUCT = struct.Struct("<4sHHQQQQQQQ")
HEADER_SIZE = HEADER_STRUCT.size
assert HEADER_SIZE == 64

TRAILER_STRUCT = struct.Struct("<IIIIII")
TRAILER_SIZE = TRAILER_STRUCT.size  # 24

LABEL_ENTRY_SIZE = 12  # u64 blob offset + u32 node id

# Sidecar feature files: magic + version + pad + u64 count, then f64 values.
SIDECAR_MAGIC = b"CARF"
SIDECAR_HEADER_STRUCT = struct.Struct("<4sHHQ")
SIDECAR_HEADER_SIZE = 16


@dataclass(frozen=True)
class StoreHeader:
    node_count: int
    edge_count: int
    directed: bool
    off_offsets: int
    off_neighbors: int
    off_node_table: int
    off_label_index: int
    off_trailer: int
    # Section digests, parsed from the trailer.
    crc_header: int = 0
    crc_offsets: int = 0
    crc_neighbors: int = 0
    crc_node_table: int = 0
    crc_label_index: int = 0

    def pack(self) -> bytes:
        flags = FLAG_DIRECTED if self.directed else 0
        raw = HEADER_STRUCT.pack(
            MAGIC,
            FORMAT_VERSION,
            flags,
            self.node_count,
            self.edge_count,
            self.off_offsets,
            self.off_neighbors,
            self.off_node_table,
            self.off_label_index,
            self.off_trailer,
        )
        return raw + b"\0" * (HEADER_SIZE - len(raw))


def unpack_header(raw: bytes) -> StoreHeader:
    if len(raw) < HEADER_SIZE:
        raise StoreFormatError("file too short for store header")
    (
        magic,
        version,
        flags,
        node_count,
        edge_count,
        off_offsets,
        off_neighbors,
        off_node_table,
        off_label_index,
        off_trailer,
    ) = HEADER_STRUCT.unpack_from(raw, 0)
    if magic != MAGIC:
        raise StoreFormatError(f"bad magic {magic!r}, not a graph store")
    if version != FORMAT_VERSION:
        raise StoreFormatError(f"unsupported format version {version}")
    return StoreHeader(
        node_count=node_count,
        edge_count=edge_count,
        directed=bool(flags & FLAG_DIRECTED),
        off_offsets=off_offsets,
        off_neighbors=off_neighbors,
        off_node_table=off_node_table,
        off_label_index=off_label_index,
        off_trailer=off_trailer,
    )


def validate_section_offsets(header: StoreHeader, file_size: int) -> None:
    """Check offsets are monotone, aligned with section sizes, in bounds."""
    n = header.node_count
    offs = [
        HEADER_SIZE,
        header.off_offsets,
        header.off_neighbors,
        header.off_node_table,
        header.off_label_index,
        header.off_trailer,
    ]
    if header.off_offsets != HEADER_SIZE:
        raise StoreFormatError("offsets section does not follow header")
    for a, b in zip(offs, offs[1:]):
        if b < a:
            raise StoreFormatError("section offsets not monotonically increasing")
    if header.off_trailer + TRAILER_SIZE != file_size:
        raise StoreFormatError("truncated store file")
    if header.off_neighbors - header.off_offsets != 8 * (n + 1):
        raise StoreFormatError("offsets section has wrong size")
    if (header.off_node_table - header.off_neighbors) % 4 != 0:
        raise StoreFormatError("neighbors section has wrong size")
    if header.off_trailer - header.off_label_index < LABEL_ENTRY_SIZE * n:
        raise StoreFormatError("label index section has wrong size")


def normalize_label(label: str) -> str:
    """Normalization applied before indexing and searching labels."""
    return label.lower()
