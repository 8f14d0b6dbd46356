import { describe, expect, it } from "vitest";
import { worldToScreen } from "../src/camera";
import { HitGrid, HIT_SLOP_PX } from "../src/hitgrid";
import { spriteSizePx } from "../src/lod";

const W = 800;
const H = 600;
const cam = { cx: 0, cy: 0, zoom: 1 };

function gridOf(xy: number[], degrees: number[]): HitGrid {
  const grid = new HitGrid();
  grid.build(new Float32Array(xy), degrees, cam, W, H);
  return grid;
}

describe("hit grid", () => {
  it("misses empty space", () => {
    const grid = gridOf([0, 0], [4]);
    expect(grid.hitTest(50, 50)).toBe(-1);
  });

  it("hits a sprite dead center", () => {
    const grid = gridOf([0, 0], [4]);
    const [sx, sy] = worldToScreen(cam, W, H, 0, 0);
    expect(grid.hitTest(sx, sy)).toBe(0);
  });

  it("respects radius + 3px slop on the boundary", () => {
    const grid = gridOf([0, 0], [4]);
    const [sx, sy] = worldToScreen(cam, W, H, 0, 0);
    const r = spriteSizePx(4, cam.zoom) / 2 + HIT_SLOP_PX;
    expect(grid.hitTest(sx + r - 0.5, sy)).toBe(0);
    expect(grid.hitTest(sx + r + 1.5, sy)).toBe(-1);
  });

  it("nearest sprite wins", () => {
    // two nodes 6px apart in screen space
    const grid = gridOf([0, 0, 6, 0], [16, 16]);
    const [sx, sy] = worldToScreen(cam, W, H, 0, 0);
    expect(grid.hitTest(sx + 1, sy)).toBe(0);
    expect(grid.hitTest(sx + 5, sy)).toBe(1);
  });

  it("breaks exact ties by lower index", () => {
    const grid = gridOf([0, 0, 0, 0], [9, 9]);
    const [sx, sy] = worldToScreen(cam, W, H, 0, 0);
    expect(grid.hitTest(sx, sy)).toBe(0);
  });

  it("finds hits across cell boundaries", () => {
    // placed right at a 32px cell edge
    const grid = gridOf([31.5 - W / 2, 0 - H / 2 + 0], [25]);
    expect(grid.hitTest(33, 1)).toBe(0);
  });
});
