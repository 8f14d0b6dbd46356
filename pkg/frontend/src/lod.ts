/** Level-of-detail rules: sprite sizing, edge visibility, label culling.
 * All pure functions of (positions, camera, thresholds) so the visible
 * set is deterministic for a given view. */

import { Camera, worldToScreen } from "./camera";

export interface LodThresholds {
  labelMinPx: number;
  labelBudget: number;
  edgeMinZoom: number;
}

export const DEFAULT_LOD: LodThresholds = {
  labelMinPx: 8,
  labelBudget: 200,
  edgeMinZoom: 0.05,
};

export const SPRITE_MIN_PX = 2;
export const SPRITE_MAX_PX = 16;

/** Point sprite size: sqrt-of-degree scale, gently growing with zoom,
 * clamped to [2, 16] px. */
export function spriteSizePx(degree: number, zoom: number): number {
  const base = 2 + 2 * Math.sqrt(Math.max(degree, 0));
  const size = base * Math.sqrt(Math.max(zoom, 1e-4));
  return Math.min(SPRITE_MAX_PX, Math.max(SPRITE_MIN_PX, size));
}

export function edgesVisible(zoom: number, thresholds: LodThresholds = DEFAULT_LOD): boolean {
  return zoom >= thresholds.edgeMinZoom;
}

/** Indices of nodes whose labels are drawn: on-screen nodes with sprite
 * size >= labelMinPx, highest degree first (ties by index), capped at
 * labelBudget. Returned in that priority order. */
export function selectLabels(
  xy: Float32Array,
  degrees: ArrayLike<number>,
  cam: Camera,
  w: number,
  h: number,
  thresholds: LodThresholds = DEFAULT_LOD,
): number[] {
  const n = xy.length / 2;
  const eligible: number[] = [];
  for (let i = 0; i < n; i++) {
    if (spriteSizePx(degrees[i], cam.zoom) < thresholds.labelMinPx) continue;
    const [sx, sy] = worldToScreen(cam, w, h, xy[2 * i], xy[2 * i + 1]);
    if (sx < -20 || sx > w + 20 || sy < -20 || sy > h + 20) continue;
    eligible.push(i);
  }
  eligible.sort((a, b) => degrees[b] - degrees[a] || a - b);
  return eligible.slice(0, thresholds.labelBudget);
}
