"""Incremental 2D force-directed layout over a subgraph.

Classic spring-embedder forces: repulsion k^2/d between all pairs,
attraction d^2/k along edges, per-node displacement clamped by a cooling
temperature. Stepping runs in small batches so a session can interleave
layout with user interaction; pinned nodes never move. Above 1000 nodes
the pairwise repulsion is approximated with a Barnes-Hut quadtree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import quadtree
from .subgraph import Subgraph

IDEAL_LENGTH_C = 1.0
COOLING = 0.95
TEMP_FLOOR_FACTOR = 1e-3
INITIAL_TEMP_FACTOR = 0.1
QUADTREE_MIN_NODES = 1001
THETA = 0.8
COINCIDENCE_EPS = 1e-9
JITTER_SCALE = 1e-6


@dataclass
class StepStats:
    iterations_run: int
    max_displacement: float
    temperature_after: float


@dataclass
class LayoutState:
    positions: np.ndarray  # (n, 2) float64
    pinned: set[int]
    temperature: float
    k: float
    iteration: int
    seed: int
    area: tuple[float, float]
    initial_temperature: float = field(default=0.0)

    def copy(self) -> "LayoutState":
        return replace(self, positions=self.positions.copy(), pinned=set(self.pinned))


def ideal_edge_length(n: int, area: tuple[float, float]) -> float:
    w, h = area
    return IDEAL_LENGTH_C * float(np.sqrt(w * h / n))


def init_layout(subgraph: Subgraph, seed: int, area: tuple[float, float]) -> LayoutState:
    """Seeded uniform placement over the layout frame (PCG64 stream)."""
    n = subgraph.node_count
    if n == 0:
        raise ValueError("cannot lay out an empty subgraph")
    w, h = float(area[0]), float(area[1])
    if w <= 0 or h <= 0:
        raise ValueError("layout area must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    positions = rng.random((n, 2))
    positions[:, 0] *= w
    positions[:, 1] *= h
    temp = INITIAL_TEMP_FACTOR * min(w, h)
    return LayoutState(
        positions=positions,
        pinned=set(),
        temperature=temp,
        k=ideal_edge_length(n, (w, h)),
        iteration=0,
        seed=int(seed),
        area=(w, h),
        initial_temperature=temp,
    )


def _check_consistent(state: LayoutState, subgraph: Subgraph) -> None:
    if len(state.positions) != subgraph.node_count:
        raise ValueError(
            f"layout holds {len(state.positions)} positions for a "
            f"{subgraph.node_count}-node subgraph"
        )


def _jitter_coincident(state: LayoutState) -> None:
    """Separate near-coincident points with a seed-derived nudge."""
    pos = state.positions
    n = len(pos)
    if n < 2:
        return
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    p = pos[order]
    close = np.zeros(n, dtype=bool)
    d2 = ((p[1:] - p[:-1]) ** 2).sum(axis=1)
    pairs = d2 < COINCIDENCE_EPS**2
    if not pairs.any():
        return
    close[:-1] |= pairs
    close[1:] |= pairs
    targets = order[close]
    targets = targets[[t not in state.pinned for t in targets]]
    if len(targets) == 0:
        return
    rng = np.random.Generator(
        np.random.PCG64((state.seed * 0x9E3779B97F4A7C15 + state.iteration + 1) & (2**63 - 1))
    )
    angles = rng.random(len(targets)) * 2.0 * np.pi
    radii = JITTER_SCALE * state.k * (0.5 + rng.random(len(targets)))
    pos[targets, 0] += radii * np.cos(angles)
    pos[targets, 1] += radii * np.sin(angles)


def _exact_repulsion(pos: np.ndarray, k: float) -> np.ndarray:
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    d2 = dx * dx + dy * dy
    np.fill_diagonal(d2, 1.0)
    d2 = np.maximum(d2, COINCIDENCE_EPS**2)
    w = (k * k) / d2
    np.fill_diagonal(w, 0.0)
    return np.column_stack([(dx * w).sum(axis=1), (dy * w).sum(axis=1)])


def repulsion_displacement(pos: np.ndarray, k: float, use_quadtree: bool) -> np.ndarray:
    if use_quadtree:
        return quadtree.repulsion_forces(pos, k, THETA, COINCIDENCE_EPS)
    return _exact_repulsion(pos, k)


def step(
    state: LayoutState,
    subgraph: Subgraph,
    batch: int,
    *,
    force_quadtree: bool | None = None,
) -> tuple[LayoutState, StepStats]:
    """Run ``batch`` layout iterations in place; returns (state, stats)."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    _check_consistent(state, subgraph)
    n = subgraph.node_count
    pos = state.positions
    edges = subgraph.edges
    use_qt = force_quadtree if force_quadtree is not None else n >= QUADTREE_MIN_NODES
    pinned_idx = (
        np.fromiter(state.pinned, dtype=np.int64, count=len(state.pinned))
        if state.pinned
        else None
    )
    max_disp = 0.0
    for _ in range(batch):
        _jitter_coincident(state)
        disp = repulsion_displacement(pos, state.k, use_qt)
        if edges.shape[0]:
            e0 = edges[:, 0].astype(np.int64)
            e1 = edges[:, 1].astype(np.int64)
            delta = pos[e0] - pos[e1]
            d = np.sqrt((delta**2).sum(axis=1))
            d = np.maximum(d, COINCIDENCE_EPS)
            s = d / state.k
            fx = delta[:, 0] * s
            fy = delta[:, 1] * s
            disp[:, 0] -= np.bincount(e0, weights=fx, minlength=n)
            disp[:, 1] -= np.bincount(e0, weights=fy, minlength=n)
            disp[:, 0] += np.bincount(e1, weights=fx, minlength=n)
            disp[:, 1] += np.bincount(e1, weights=fy, minlength=n)
        if pinned_idx is not None:
            disp[pinned_idx] = 0.0
        norm = np.sqrt((disp**2).sum(axis=1))
        scale = np.ones(n)
        moving = norm > state.temperature
        scale[moving] = state.temperature / norm[moving]
        pos += disp * scale[:, None]
        applied = norm * scale
        it_max = float(applied.max()) if n else 0.0
        if it_max > max_disp:
            max_disp = it_max
        state.temperature = max(state.temperature * COOLING, TEMP_FLOOR_FACTOR * state.k)
        state.iteration += 1
    stats = StepStats(
        iterations_run=batch,
        max_displacement=max_disp,
        temperature_after=state.temperature,
    )
    return state, stats


def _check_position(position) -> tuple[float, float]:
    x, y = float(position[0]), float(position[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError("position must be finite")
    return x, y


def _check_index(state: LayoutState, local_index: int) -> int:
    i = int(local_index)
    if not 0 <= i < len(state.positions):
        raise IndexError(f"local index {i} out of range [0, {len(state.positions)})")
    return i


def pin(state: LayoutState, local_index: int, position) -> None:
    """Pin a node and move it to ``position``."""
    i = _check_index(state, local_index)
    x, y = _check_position(position)
    state.pinned.add(i)
    state.positions[i, 0] = x
    state.positions[i, 1] = y


def unpin(state: LayoutState, local_index: int) -> None:
    state.pinned.discard(_check_index(state, local_index))


def set_position(state: LayoutState, local_index: int, position) -> None:
    """Move a node regardless of pin state."""
    i = _check_index(state, local_index)
    x, y = _check_position(position)
    state.positions[i, 0] = x
    state.positions[i, 1] = y
