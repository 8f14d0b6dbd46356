"""Wire format shared by the session service and its clients.

Server-to-client position frames are binary:

    u32 frame_no | u32 node_count | node_count * (f32 x, f32 y)

little-endian, node order = subgraph node order. Client-to-server control
messages are JSON text; ``validate_control`` normalizes them and reports
malformed ones without killing the session.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import GraphDeckError

FRAME_HEADER = struct.Struct("<II")

CONTROL_OPS = {
    "pin",
    "drag",
    "unpin",
    "pause",
    "resume",
    "set_params",
    "expand",
    "close",
}


class ProtocolError(GraphDeckError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def pack_frame(frame_no: int, positions: np.ndarray) -> bytes:
    """Encode one position frame; positions is (n, 2) in layout units."""
    xy = np.ascontiguousarray(positions, dtype="<f4")
    return FRAME_HEADER.pack(frame_no, xy.shape[0]) + xy.tobytes()


def unpack_frame(data: bytes) -> tuple[int, int, np.ndarray]:
    """Decode a frame into (frame_no, node_count, (n,2) float32 array)."""
    if len(data) < FRAME_HEADER.size:
        raise ProtocolError("bad_frame", "frame shorter than its header")
    frame_no, node_count = FRAME_HEADER.unpack_from(data, 0)
    payload = data[FRAME_HEADER.size :]
    if len(payload) != 8 * node_count:
        raise ProtocolError(
            "bad_frame",
            f"frame payload is {len(payload)} bytes, want {8 * node_count}",
        )
    xy = np.frombuffer(payload, dtype="<f4").reshape(node_count, 2)
    return frame_no, node_count, xy


def validate_control(msg) -> dict:
    """Check a decoded client message; returns it or raises ProtocolError."""
    if not isinstance(msg, dict):
        raise ProtocolError("bad_message", "control message must be a JSON object")
    op = msg.get("op")
    if op not in CONTROL_OPS:
        raise ProtocolError("bad_message", f"unknown op {op!r}")
    if op in ("pin", "drag"):
        for key in ("index", "x", "y"):
            if key not in msg:
                raise ProtocolError("bad_message", f"{op} needs {key}")
        if not isinstance(msg["index"], int) or msg["index"] < 0:
            raise ProtocolError("bad_message", "index must be a non-negative integer")
        try:
            x, y = float(msg["x"]), float(msg["y"])
        except (TypeError, ValueError):
            raise ProtocolError("bad_message", "x and y must be numbers")
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ProtocolError("bad_message", "x and y must be finite")
    elif op == "unpin":
        if not isinstance(msg.get("index"), int) or msg["index"] < 0:
            raise ProtocolError("bad_message", "index must be a non-negative integer")
    elif op == "set_params":
        fr = msg.get("frame_rate")
        ipf = msg.get("iters_per_frame")
        if fr is not None and not (isinstance(fr, (int, float)) and 0 < fr <= 120):
            raise ProtocolError("bad_message", "frame_rate must be in (0, 120]")
        if ipf is not None and not (isinstance(ipf, int) and 1 <= ipf <= 100):
            raise ProtocolError("bad_message", "iters_per_frame must be in [1, 100]")
    elif op == "expand":
        if not isinstance(msg.get("index"), int) or msg["index"] < 0:
            raise ProtocolError("bad_message", "index must be a non-negative integer")
        hops = msg.get("hops", 1)
        cap = msg.get("cap", 500)
        if not isinstance(hops, int) or hops < 0:
            raise ProtocolError("bad_message", "hops must be a non-negative integer")
        if not isinstance(cap, int) or cap < 1:
            raise ProtocolError("bad_message", "cap must be a positive integer")
    return msg
