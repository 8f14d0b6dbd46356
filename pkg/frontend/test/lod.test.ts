import { describe, expect, it } from "vitest";
import { ZOOM_MAX } from "../src/camera";
import {
  DEFAULT_LOD,
  edgesVisible,
  selectLabels,
  spriteSizePx,
  SPRITE_MAX_PX,
  SPRITE_MIN_PX,
} from "../src/lod";

describe("sprite sizing", () => {
  it("scales with sqrt of degree, clamped to [2, 16] px", () => {
    expect(spriteSizePx(0, 1)).toBe(SPRITE_MIN_PX);
    expect(spriteSizePx(9, 1)).toBeCloseTo(8, 5);
    expect(spriteSizePx(10_000, 1)).toBe(SPRITE_MAX_PX);
  });

  it("grows with zoom but stays clamped", () => {
    expect(spriteSizePx(4, 4)).toBeGreaterThan(spriteSizePx(4, 1));
    expect(spriteSizePx(4, 1e6)).toBe(SPRITE_MAX_PX);
    expect(spriteSizePx(0, 1e-9)).toBe(SPRITE_MIN_PX);
  });
});

describe("edge visibility", () => {
  it("hides edges when zoomed out past the threshold", () => {
    expect(edgesVisible(0.049)).toBe(false);
    expect(edgesVisible(0.05)).toBe(true);
    expect(edgesVisible(3)).toBe(true);
  });
});

describe("label selection", () => {
  const cam = { cx: 0, cy: 0, zoom: 1 };

  it("one node fullscreen gets its label", () => {
    const xy = new Float32Array([0, 0]);
    const picked = selectLabels(xy, [0], { cx: 0, cy: 0, zoom: ZOOM_MAX }, 800, 600);
    expect(picked).toEqual([0]);
  });

  it("culls nodes below the pixel threshold", () => {
    const xy = new Float32Array([0, 0, 10, 10]);
    // degree 0 -> 2px sprite at zoom 1: below the 8px label floor
    const picked = selectLabels(xy, [0, 100], cam, 800, 600);
    expect(picked).toEqual([1]);
  });

  it("caps the label count at the budget, highest degree first", () => {
    const n = 500;
    const xy = new Float32Array(2 * n);
    const degrees = new Array(n);
    for (let i = 0; i < n; i++) {
      xy[2 * i] = (i % 25) * 10 - 125;
      xy[2 * i + 1] = Math.floor(i / 25) * 10 - 100;
      degrees[i] = 50 + i;
    }
    const picked = selectLabels(xy, degrees, cam, 800, 600);
    expect(picked.length).toBe(DEFAULT_LOD.labelBudget);
    expect(picked[0]).toBe(n - 1); // highest degree first
    expect(new Set(picked).size).toBe(picked.length);
  });

  it("is deterministic for identical inputs and skips off-screen nodes", () => {
    const xy = new Float32Array([0, 0, 100000, 100000]);
    const a = selectLabels(xy, [64, 64], cam, 800, 600);
    const b = selectLabels(xy, [64, 64], cam, 800, 600);
    expect(a).toEqual(b);
    expect(a).toEqual([0]);
  });

  it("breaks degree ties by ascending index", () => {
    const xy = new Float32Array([0, 0, 5, 5, -5, -5]);
    const picked = selectLabels(xy, [64, 64, 64], cam, 800, 600);
    expect(picked).toEqual([0, 1, 2]);
  });
});
