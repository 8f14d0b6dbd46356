"""Network service: datasets, search, induction, and live layout sessions.

HTTP endpoints handle request/response queries; each session runs a
stepping worker that advances the layout a few iterations per frame and
pushes binary position frames over a WebSocket. Inbound control messages
queue per session and are applied before the next frame is computed, so
an acknowledged control is always reflected in every frame that follows
its ack. Store handles are shared read-only across sessions; each layout
is owned by exactly one worker.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import features as features_mod
from . import layout as layout_mod
from . import protocol
from . import subgraph as subgraph_mod
from .errors import GraphDeckError, UnknownFeatureError
from .store import GraphStore
from .subgraph import NodeSet, Subgraph

FREEZE_DISPLACEMENT_FACTOR = 1e-6  # of k; below this a session freezes
EXPAND_JITTER_FACTOR = 0.25        # of k; radius for newly placed nodes
REAPER_PERIOD_S = 5.0
MAX_PENDING_FRAMES = 4

ENV_PORT = "GRAPHDECK_PORT"


class ApiError(Exception):
    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


@dataclass
class ServiceConfig:
    stores: list[Path] = field(default_factory=list)
    host: str = "127.0.0.1"
    port: int = 8600
    frame_rate: float = 30.0
    iters_per_frame: int = 2
    max_sessions: int = 16
    session_idle_timeout: float = 600.0
    static_dir: Path | None = None
    default_area: tuple[float, float] = (1000.0, 1000.0)
    default_seed: int = 42

    @classmethod
    def load(
        cls,
        store_paths=(),
        config_path=None,
        port=None,
        frame_rate=None,
        iters_per_frame=None,
        static_dir=None,
    ) -> "ServiceConfig":
        """Merge TOML config, CLI flags, and the port env override."""
        cfg = cls()
        if config_path:
            try:
                import tomllib  # type: ignore[import-not-found]
            except ModuleNotFoundError:
                import tomli as tomllib
            with open(config_path, "rb") as f:
                data = tomllib.load(f)
            cfg.stores = [Path(p) for p in data.get("stores", [])]
            cfg.host = data.get("host", cfg.host)
            cfg.port = int(data.get("port", cfg.port))
            cfg.frame_rate = float(data.get("frame_rate", cfg.frame_rate))
            cfg.iters_per_frame = int(data.get("iters_per_frame", cfg.iters_per_frame))
            cfg.max_sessions = int(data.get("max_sessions", cfg.max_sessions))
            cfg.session_idle_timeout = float(
                data.get("session_idle_timeout", cfg.session_idle_timeout)
            )
            if data.get("static_dir"):
                cfg.static_dir = Path(data["static_dir"])
        if store_paths:
            cfg.stores = list(cfg.stores) + [Path(p) for p in store_paths]
        if port is not None:
            cfg.port = port
        if os.environ.get(ENV_PORT):
            cfg.port = int(os.environ[ENV_PORT])
        if frame_rate is not None:
            cfg.frame_rate = frame_rate
        if iters_per_frame is not None:
            cfg.iters_per_frame = iters_per_frame
        if static_dir is not None:
            cfg.static_dir = Path(static_dir)
        return cfg


class Dataset:
    def __init__(self, dataset_id: str, store: GraphStore):
        self.dataset_id = dataset_id
        self.store = store
        self._feature_cache: dict[str, np.ndarray] = {}

    def list_features(self) -> list[str]:
        names = set(features_mod.list_features(self.store.path))
        names.add("degree")
        return sorted(names)

    def feature_values(self, name: str) -> np.ndarray:
        if name in self._feature_cache:
            return self._feature_cache[name]
        if name == "degree" and name not in features_mod.list_features(self.store.path):
            values = self.store.degrees().astype(np.float64)
        else:
            try:
                values = features_mod.load_feature(self.store.path, name).values
            except (UnknownFeatureError, ValueError):
                raise ApiError("unknown_feature", f"no feature {name!r}", 404)
        self._feature_cache[name] = values
        return values


class Subscriber:
    """Ordered per-client outbox; frames drop under backpressure, JSON
    control messages never do."""

    def __init__(self):
        self.items: deque = deque()
        self.event = asyncio.Event()
        self.pending_frames = 0

    def push_frame(self, data: bytes) -> None:
        if self.pending_frames >= MAX_PENDING_FRAMES:
            for i, (kind, _) in enumerate(self.items):
                if kind == "frame":
                    del self.items[i]
                    self.pending_frames -= 1
                    break
        self.items.append(("frame", data))
        self.pending_frames += 1
        self.event.set()

    def push_message(self, payload: dict) -> None:
        self.items.append(("msg", payload))
        self.event.set()

    def pop(self):
        kind, data = self.items.popleft()
        if kind == "frame":
            self.pending_frames -= 1
        return kind, data


class Session:
    def __init__(
        self,
        session_id: str,
        dataset: Dataset,
        sub: Subgraph,
        state: layout_mod.LayoutState,
        frame_rate: float,
        iters_per_frame: int,
    ):
        self.session_id = session_id
        self.dataset = dataset
        self.subgraph = sub
        self.layout = state
        self.status = "running"
        self.frame_no = 0
        self.frame_rate = frame_rate
        self.iters_per_frame = iters_per_frame
        self.controls: deque = deque()  # (message, Subscriber | None)
        self.subscribers: set[Subscriber] = set()
        self.last_activity = time.monotonic()
        self.closed = False
        self.worker: asyncio.Task | None = None

    def touch(self) -> None:
        self.last_activity = time.monotonic()

    def broadcast_frame(self, data: bytes) -> None:
        for sub in self.subscribers:
            sub.push_frame(data)

    def broadcast_message(self, payload: dict) -> None:
        for sub in self.subscribers:
            sub.push_message(payload)

    def subgraph_payload(self) -> dict:
        feats = {}
        for name in self.dataset.list_features():
            values = self.dataset.feature_values(name)
            feats[name] = values[self.subgraph.parent_ids()]
        return self.subgraph.to_payload(features=feats)

    def layout_payload(self) -> dict:
        st = self.layout
        return {
            "k": st.k,
            "temperature": st.temperature,
            "iteration": st.iteration,
            "seed": st.seed,
            "area": list(st.area),
            "pinned": sorted(st.pinned),
        }

    def describe(self) -> dict:
        return {
            "session_id": self.session_id,
            "dataset_id": self.dataset.dataset_id,
            "status": self.status,
            "frame_no": self.frame_no,
            "frame_rate": self.frame_rate,
            "iters_per_frame": self.iters_per_frame,
            "node_count": self.subgraph.node_count,
            "edge_count": self.subgraph.edge_count,
        }


def resolve_selection(dataset: Dataset, selection) -> NodeSet:
    """Turn a selection spec into a NodeSet.

    Shapes: {"external_ids": [...]}, {"top_k": {"feature": f, "k": n}},
    {"expand": {"seeds": [node ids], "hops": h, "cap": c}}.
    """
    store = dataset.store
    if not isinstance(selection, dict) or len(selection) != 1:
        raise ApiError(
            "bad_selection",
            "selection must carry exactly one of external_ids/top_k/expand",
        )
    if "external_ids" in selection:
        toks = selection["external_ids"]
        if not isinstance(toks, list) or not toks:
            raise ApiError("empty_selection", "external_ids must be a non-empty list")
        ids = []
        for tok in toks:
            nid = store.lookup_external(str(tok))
            if nid is None:
                raise ApiError("unknown_external_id", f"no node {tok!r}", 404)
            ids.append(nid)
        return NodeSet(ids, node_count=store.node_count)
    if "top_k" in selection:
        spec = selection["top_k"]
        name = spec.get("feature") if isinstance(spec, dict) else None
        k = spec.get("k") if isinstance(spec, dict) else None
        if not isinstance(name, str) or not isinstance(k, int) or k < 1:
            raise ApiError("bad_selection", "top_k needs {feature, k >= 1}")
        if k > store.node_count:
            raise ApiError("bad_selection", f"k {k} exceeds node count")
        values = dataset.feature_values(name)
        order = np.argsort(-values, kind="stable")[:k]
        return NodeSet(order)
    if "expand" in selection:
        spec = selection["expand"]
        if not isinstance(spec, dict):
            raise ApiError("bad_selection", "expand needs {seeds, hops, cap}")
        seeds = spec.get("seeds")
        hops = spec.get("hops", 1)
        cap = spec.get("cap", 500)
        if not isinstance(seeds, list) or not seeds:
            raise ApiError("empty_selection", "expand.seeds must be non-empty")
        try:
            seed_set = NodeSet([int(s) for s in seeds], node_count=store.node_count)
            return subgraph_mod.expand(store, seed_set, int(hops), int(cap))
        except (IndexError, ValueError) as e:
            raise ApiError("bad_selection", str(e))
    raise ApiError("bad_selection", "unknown selection kind")


class Service:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.datasets: dict[str, Dataset] = {}
        for path in config.stores:
            store = GraphStore(path)
            ds_id = Path(path).stem
            self.datasets[ds_id] = Dataset(ds_id, store)
        self.sessions: dict[str, Session] = {}
        self._reaper: asyncio.Task | None = None

    # -- lookup helpers ---------------------------------------------------

    def dataset(self, dataset_id: str) -> Dataset:
        ds = self.datasets.get(dataset_id)
        if ds is None:
            raise ApiError("unknown_dataset", f"no dataset {dataset_id!r}", 404)
        return ds

    def session(self, session_id: str) -> Session:
        s = self.sessions.get(session_id)
        if s is None:
            raise ApiError("unknown_session", f"no session {session_id!r}", 404)
        return s

    # -- session lifecycle --------------------------------------------------

    def create_session(self, body: dict) -> Session:
        if len(self.sessions) >= self.config.max_sessions:
            raise ApiError("session_limit", "too many concurrent sessions", 429)
        ds = self.dataset(str(body.get("dataset_id")))
        node_set = resolve_selection(ds, body.get("selection"))
        if len(node_set) == 0:
            raise ApiError("empty_selection", "selection resolves to no nodes")
        sub = subgraph_mod.induce(
            ds.store, node_set, selection_desc=json.dumps(body.get("selection"))
        )
        seed = int(body.get("seed", self.config.default_seed))
        area = body.get("area") or list(self.config.default_area)
        try:
            state = layout_mod.init_layout(sub, seed, (float(area[0]), float(area[1])))
        except ValueError as e:
            raise ApiError("bad_request", str(e))
        frame_rate = float(body.get("frame_rate", self.config.frame_rate))
        iters = int(body.get("iters_per_frame", self.config.iters_per_frame))
        if not 0 < frame_rate <= 120:
            raise ApiError("bad_request", "frame_rate must be in (0, 120]")
        if not 1 <= iters <= 100:
            raise ApiError("bad_request", "iters_per_frame must be in [1, 100]")
        session = Session(uuid.uuid4().hex, ds, sub, state, frame_rate, iters)
        if body.get("paused"):
            session.status = "paused"
        self.sessions[session.session_id] = session
        session.worker = asyncio.get_running_loop().create_task(self._run(session))
        return session

    def close_session(self, session: Session) -> None:
        session.closed = True
        session.status = "closed"
        session.broadcast_message({"type": "closed", "session_id": session.session_id})
        if session.worker is not None:
            session.worker.cancel()
        self.sessions.pop(session.session_id, None)

    # -- control application --------------------------------------------------

    def _apply_control(self, session: Session, msg: dict, origin: Subscriber | None):
        op = msg["op"]
        reply = {"type": "ack", "op": op, "seq": msg.get("seq")}
        try:
            if op in ("pin", "drag"):
                layout_mod.pin(session.layout, msg["index"], (msg["x"], msg["y"]))
                if session.status == "frozen":
                    session.status = "running"
            elif op == "unpin":
                layout_mod.unpin(session.layout, msg["index"])
                if session.status == "frozen":
                    session.status = "running"
            elif op == "pause":
                session.status = "paused"
            elif op == "resume":
                session.status = "running"
            elif op == "set_params":
                if msg.get("frame_rate") is not None:
                    session.frame_rate = float(msg["frame_rate"])
                if msg.get("iters_per_frame") is not None:
                    session.iters_per_frame = int(msg["iters_per_frame"])
            elif op == "expand":
                notice = self._expand(session, msg["index"], msg.get("hops", 1),
                                      msg.get("cap", 500))
                reply["changed"] = notice is not None
            elif op == "close":
                reply = None
                self.close_session(session)
        except (IndexError, ValueError) as e:
            reply = {
                "type": "error",
                "code": "invalid_index" if isinstance(e, IndexError) else "bad_message",
                "message": str(e),
                "seq": msg.get("seq"),
            }
            notice = None
        except ApiError as e:
            reply = {
                "type": "error",
                "code": e.code,
                "message": e.message,
                "seq": msg.get("seq"),
            }
            notice = None
        if reply is not None and origin is not None:
            origin.push_message(reply)
        if op == "expand" and notice is not None:
            session.broadcast_message(notice)

    def _expand(self, session: Session, local_index: int, hops: int, cap: int) -> dict | None:
        """Grow the session subgraph around one node; keep old positions.

        Returns the subgraph-change notice to broadcast, or None when the
        expansion added nothing (identity: positions untouched).
        """
        sub = session.subgraph
        if not 0 <= local_index < sub.node_count:
            raise ApiError("invalid_index", f"no local node {local_index}")
        store = session.dataset.store
        pid = int(sub.nodes[local_index].internal)
        grown = subgraph_mod.expand(store, NodeSet([pid]), int(hops), int(cap))
        old_ids = sub.parent_ids()
        merged = np.union1d(old_ids.astype(np.int64), grown.ids.astype(np.int64))
        if merged.size == old_ids.size:
            return None
        new_sub = subgraph_mod.induce(
            store,
            NodeSet(merged),
            selection_desc=f"{sub.origin.selection}+expand({pid},{hops},{cap})",
        )
        state = session.layout
        new_ids = new_sub.parent_ids()
        positions = np.empty((new_sub.node_count, 2))
        origin_pos = state.positions[local_index].copy()
        rng = np.random.Generator(
            np.random.PCG64(
                (state.seed * 0x9E3779B97F4A7C15 + state.iteration + 0x51ED) & (2**63 - 1)
            )
        )
        angles = rng.random(new_sub.node_count) * 2.0 * np.pi
        radii = EXPAND_JITTER_FACTOR * state.k * np.sqrt(rng.random(new_sub.node_count))
        positions[:, 0] = origin_pos[0] + radii * np.cos(angles)
        positions[:, 1] = origin_pos[1] + radii * np.sin(angles)
        keep_pos = np.searchsorted(new_ids, old_ids)
        positions[keep_pos] = state.positions
        pinned = {int(keep_pos[i]) for i in state.pinned}
        new_state = layout_mod.LayoutState(
            positions=positions,
            pinned=pinned,
            temperature=max(
                0.5 * state.initial_temperature,
                layout_mod.TEMP_FLOOR_FACTOR * state.k,
            ),
            k=layout_mod.ideal_edge_length(new_sub.node_count, state.area),
            iteration=state.iteration,
            seed=state.seed,
            area=state.area,
            initial_temperature=state.initial_temperature,
        )
        session.subgraph = new_sub
        session.layout = new_state
        if session.status == "frozen":
            session.status = "running"
        return {
            "type": "subgraph",
            "reason": "expand",
            "frame_no": session.frame_no,
            "subgraph": session.subgraph_payload(),
            "layout": session.layout_payload(),
        }

    # -- stepping worker ------------------------------------------------------

    async def _run(self, session: Session) -> None:
        loop = asyncio.get_running_loop()
        try:
            while not session.closed:
                tick_start = loop.time()
                while session.controls:
                    msg, origin = session.controls.popleft()
                    self._apply_control(session, msg, origin)
                    if session.closed:
                        return
                if session.status == "running":
                    _, stats = layout_mod.step(
                        session.layout, session.subgraph, session.iters_per_frame
                    )
                    session.frame_no += 1
                    frame = protocol.pack_frame(session.frame_no, session.layout.positions)
                    session.broadcast_frame(frame)
                    if stats.max_displacement < FREEZE_DISPLACEMENT_FACTOR * session.layout.k:
                        session.status = "frozen"
                        session.broadcast_message(
                            {"type": "status", "status": "frozen", "frame_no": session.frame_no}
                        )
                interval = 1.0 / session.frame_rate
                elapsed = loop.time() - tick_start
                await asyncio.sleep(max(0.0, interval - elapsed))
        except asyncio.CancelledError:
            pass

    async def _reap_idle(self) -> None:
        while True:
            await asyncio.sleep(REAPER_PERIOD_S)
            now = time.monotonic()
            for session in list(self.sessions.values()):
                idle = now - session.last_activity
                if not session.subscribers and idle > self.config.session_idle_timeout:
                    self.close_session(session)


def create_app(config: ServiceConfig) -> FastAPI:
    service = Service(config)
    app = FastAPI(title="graphdeck", version="0.1.0")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return JSONResponse({"code": exc.code, "message": exc.message}, exc.status)

    @app.exception_handler(GraphDeckError)
    async def _gd_error(_, exc: GraphDeckError):
        return JSONResponse({"code": "data_error", "message": str(exc)}, 400)

    @app.on_event("startup")
    async def _start():
        service._reaper = asyncio.get_running_loop().create_task(service._reap_idle())

    @app.on_event("shutdown")
    async def _stop():
        if service._reaper is not None:
            service._reaper.cancel()
        for session in list(service.sessions.values()):
            service.close_session(session)

    @app.get("/datasets")
    async def list_datasets():
        out = []
        for ds_id in sorted(service.datasets):
            ds = service.datasets[ds_id]
            out.append(
                {
                    "dataset_id": ds_id,
                    "node_count": ds.store.node_count,
                    "edge_count": ds.store.edge_count,
                    "features": ds.list_features(),
                }
            )
        return out

    @app.get("/datasets/{dataset_id}/stats")
    async def dataset_stats(dataset_id: str):
        ds = service.dataset(dataset_id)
        return {
            "dataset_id": ds.dataset_id,
            "node_count": ds.store.node_count,
            "edge_count": ds.store.edge_count,
            "directed": ds.store.directed,
            "features": ds.list_features(),
        }

    @app.get("/datasets/{dataset_id}/search")
    async def search(dataset_id: str, q: str = "", limit: int = 20):
        ds = service.dataset(dataset_id)
        if limit < 1:
            raise ApiError("bad_request", "limit must be >= 1")
        hits = ds.store.search_labels(q, min(limit, 500))
        return {
            "results": [
                {
                    "id": nid,
                    "label": label,
                    "external_id": ds.store.record(nid).external_id,
                    "degree": ds.store.degree(nid),
                }
                for nid, label in hits
            ]
        }

    @app.post("/datasets/{dataset_id}/induce")
    async def induce_once(dataset_id: str, body: dict):
        ds = service.dataset(dataset_id)
        node_set = resolve_selection(ds, body.get("selection"))
        sub = subgraph_mod.induce(
            ds.store, node_set, selection_desc=json.dumps(body.get("selection"))
        )
        feats = {
            name: ds.feature_values(name)[sub.parent_ids()]
            for name in ds.list_features()
        }
        return sub.to_payload(features=feats)

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        session = service.create_session(body)
        return {
            **session.describe(),
            "subgraph": session.subgraph_payload(),
            "layout": session.layout_payload(),
        }

    @app.get("/sessions")
    async def list_sessions():
        return [s.describe() for s in service.sessions.values()]

    @app.delete("/sessions/{session_id}")
    async def delete_session(session_id: str):
        service.close_session(service.session(session_id))
        return {"closed": session_id}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = service.sessions.get(session_id)
        await ws.accept()
        if session is None:
            await ws.send_json(
                {"type": "error", "code": "unknown_session", "message": session_id}
            )
            await ws.close()
            return
        subscriber = Subscriber()
        session.subscribers.add(subscriber)
        session.touch()
        subscriber.push_message(
            {
                "type": "hello",
                **session.describe(),
                "subgraph": session.subgraph_payload(),
                "layout": session.layout_payload(),
            }
        )

        async def pump():
            while True:
                await subscriber.event.wait()
                subscriber.event.clear()
                while subscriber.items:
                    kind, data = subscriber.pop()
                    if kind == "frame":
                        await ws.send_bytes(data)
                    else:
                        await ws.send_json(data)

        sender = asyncio.get_running_loop().create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                session.touch()
                try:
                    msg = protocol.validate_control(json.loads(raw))
                except json.JSONDecodeError:
                    subscriber.push_message(
                        {"type": "error", "code": "bad_message", "message": "not JSON"}
                    )
                    continue
                except protocol.ProtocolError as e:
                    subscriber.push_message(
                        {"type": "error", "code": e.code, "message": e.message}
                    )
                    continue
                session.controls.append((msg, subscriber))
                if msg["op"] == "close":
                    break
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.subscribers.discard(subscriber)
            session.touch()

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(config.static_dir), html=True))

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
