/** CPU-side uniform-grid hit testing in screen space.
 *
 * Rebuilt from the current frame's projected positions; a query checks
 * the 3x3 cell neighborhood, accepts nodes within sprite radius + 3 px,
 * nearest center wins (ties: lowest index). */

import { Camera, worldToScreen } from "./camera";
import { spriteSizePx } from "./lod";

export const HIT_SLOP_PX = 3;

export class HitGrid {
  private cells = new Map<number, number[]>();
  private sx: Float32Array = new Float32Array(0);
  private sy: Float32Array = new Float32Array(0);
  private radius: Float32Array = new Float32Array(0);
  private count = 0;

  constructor(private cellPx: number = 32) {}

  private key(cxi: number, cyi: number): number {
    return cxi * 73856093 ^ cyi * 19349663;
  }

  build(
    xy: Float32Array,
    degrees: ArrayLike<number>,
    cam: Camera,
    w: number,
    h: number,
  ): void {
    const n = xy.length / 2;
    this.cells.clear();
    if (this.sx.length < n) {
      this.sx = new Float32Array(n);
      this.sy = new Float32Array(n);
      this.radius = new Float32Array(n);
    }
    this.count = n;
    const margin = 24;
    for (let i = 0; i < n; i++) {
      const [sx, sy] = worldToScreen(cam, w, h, xy[2 * i], xy[2 * i + 1]);
      this.sx[i] = sx;
      this.sy[i] = sy;
      this.radius[i] = spriteSizePx(degrees[i], cam.zoom) / 2 + HIT_SLOP_PX;
      if (sx < -margin || sx > w + margin || sy < -margin || sy > h + margin) continue;
      const k = this.key(Math.floor(sx / this.cellPx), Math.floor(sy / this.cellPx));
      const bucket = this.cells.get(k);
      if (bucket) bucket.push(i);
      else this.cells.set(k, [i]);
    }
  }

  /** Node index under the screen point, or -1. */
  hitTest(sx: number, sy: number): number {
    const cxi = Math.floor(sx / this.cellPx);
    const cyi = Math.floor(sy / this.cellPx);
    let best = -1;
    let bestD2 = Infinity;
    for (let dx = -1; dx <= 1; dx++) {
      for (let dy = -1; dy <= 1; dy++) {
        const bucket = this.cells.get(this.key(cxi + dx, cyi + dy));
        if (!bucket) continue;
        for (const i of bucket) {
          const ddx = this.sx[i] - sx;
          const ddy = this.sy[i] - sy;
          const d2 = ddx * ddx + ddy * ddy;
          const r = this.radius[i];
          if (d2 <= r * r && (d2 < bestD2 || (d2 === bestD2 && i < best))) {
            best = i;
            bestD2 = d2;
          }
        }
      }
    }
    return best;
  }

  get size(): number {
    return this.count;
  }
}
