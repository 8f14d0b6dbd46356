/** Scene data: typed-array mirrors of the session subgraph plus the
 * latest applied position frame. Buffers are sized to the subgraph and
 * re-allocated only when it changes (expand). */

import { PositionFrame } from "./frames";

export interface SubgraphNodePayload {
  id: number;
  external_id: string;
  label: string;
  degree: number;
  features: Record<string, number>;
}

export interface SubgraphPayload {
  nodes: SubgraphNodePayload[];
  edges: [number, number][];
  origin?: { store: string; selection: string };
}

export interface Scene {
  nodeCount: number;
  edgeCount: number;
  labels: string[];
  externalIds: string[];
  parentIds: Uint32Array;
  degrees: Float64Array;
  /** Interleaved x,y world coordinates of the latest frame. */
  positions: Float32Array;
  /** Local index pairs, interleaved, 2 * edgeCount. */
  edges: Uint32Array;
  frameNo: number;
  hasFrame: boolean;
}

export function sceneFromPayload(payload: SubgraphPayload): Scene {
  const n = payload.nodes.length;
  const scene: Scene = {
    nodeCount: n,
    edgeCount: payload.edges.length,
    labels: payload.nodes.map((nd) => nd.label),
    externalIds: payload.nodes.map((nd) => nd.external_id),
    parentIds: Uint32Array.from(payload.nodes, (nd) => nd.id),
    degrees: Float64Array.from(payload.nodes, (nd) => nd.degree),
    positions: new Float32Array(2 * n),
    edges: new Uint32Array(2 * payload.edges.length),
    frameNo: 0,
    hasFrame: false,
  };
  for (let e = 0; e < payload.edges.length; e++) {
    scene.edges[2 * e] = payload.edges[e][0];
    scene.edges[2 * e + 1] = payload.edges[e][1];
  }
  return scene;
}

/** Overwrite scene positions with one frame. Pure in the sense that the
 * resulting positions depend only on this frame, never on prior ones. */
export function applyFrame(scene: Scene, frame: PositionFrame): void {
  if (frame.nodeCount !== scene.nodeCount) {
    throw new Error(
      `frame carries ${frame.nodeCount} nodes, scene has ${scene.nodeCount}`,
    );
  }
  scene.positions.set(frame.xy);
  scene.frameNo = frame.frameNo;
  scene.hasFrame = true;
}

export function sceneBounds(scene: Scene): [number, number, number, number] {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (let i = 0; i < scene.nodeCount; i++) {
    const x = scene.positions[2 * i];
    const y = scene.positions[2 * i + 1];
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  if (!isFinite(minX)) return [0, 0, 1, 1];
  return [minX, minY, maxX, maxY];
}
