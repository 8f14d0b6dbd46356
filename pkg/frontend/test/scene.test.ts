import { describe, expect, it } from "vitest";
import { decodeFrame, encodeFrame } from "../src/frames";
import { applyFrame, sceneBounds, sceneFromPayload, SubgraphPayload } from "../src/scene";

const payload: SubgraphPayload = {
  nodes: [
    { id: 10, external_id: "a", label: "Alpha", degree: 2, features: { degree: 2 } },
    { id: 11, external_id: "b", label: "Beta", degree: 1, features: { degree: 1 } },
    { id: 15, external_id: "c", label: "Gamma", degree: 1, features: { degree: 1 } },
  ],
  edges: [
    [0, 1],
    [0, 2],
  ],
};

describe("scene", () => {
  it("mirrors the subgraph payload into typed arrays", () => {
    const scene = sceneFromPayload(payload);
    expect(scene.nodeCount).toBe(3);
    expect(scene.edgeCount).toBe(2);
    expect(Array.from(scene.parentIds)).toEqual([10, 11, 15]);
    expect(Array.from(scene.edges)).toEqual([0, 1, 0, 2]);
    expect(scene.labels).toEqual(["Alpha", "Beta", "Gamma"]);
    expect(scene.hasFrame).toBe(false);
  });

  it("applies frames as a pure overwrite", () => {
    const scene = sceneFromPayload(payload);
    applyFrame(scene, decodeFrame(encodeFrame(5, new Float32Array([1, 2, 3, 4, 5, 6]))));
    applyFrame(scene, decodeFrame(encodeFrame(9, new Float32Array([9, 9, 8, 8, 7, 7]))));
    expect(scene.frameNo).toBe(9);
    expect(Array.from(scene.positions)).toEqual([9, 9, 8, 8, 7, 7]);
    // re-applying an identical frame leaves identical state: no history
    applyFrame(scene, decodeFrame(encodeFrame(9, new Float32Array([9, 9, 8, 8, 7, 7]))));
    expect(Array.from(scene.positions)).toEqual([9, 9, 8, 8, 7, 7]);
  });

  it("rejects frames sized for another subgraph", () => {
    const scene = sceneFromPayload(payload);
    expect(() =>
      applyFrame(scene, decodeFrame(encodeFrame(1, new Float32Array([1, 2]))))
    ).toThrow(/scene has 3/);
  });

  it("computes bounds of the applied frame", () => {
    const scene = sceneFromPayload(payload);
    applyFrame(scene, decodeFrame(encodeFrame(1, new Float32Array([-5, 2, 10, 4, 0, -3]))));
    expect(sceneBounds(scene)).toEqual([-5, -3, 10, 4]);
  });
});
