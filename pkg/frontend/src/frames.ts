/** Binary position frames streamed by the session service.
 *
 * Layout (little-endian): u32 frame_no | u32 node_count | node_count x (f32 x, f32 y).
 */

export interface PositionFrame {
  frameNo: number;
  nodeCount: number;
  /** Interleaved x,y pairs, length 2 * nodeCount. */
  xy: Float32Array;
}

export function decodeFrame(buf: ArrayBuffer): PositionFrame {
  if (buf.byteLength < 8) {
    throw new Error(`frame too short: ${buf.byteLength} bytes`);
  }
  const dv = new DataView(buf);
  const frameNo = dv.getUint32(0, true);
  const nodeCount = dv.getUint32(4, true);
  if (buf.byteLength !== 8 + 8 * nodeCount) {
    throw new Error(
      `frame payload is ${buf.byteLength - 8} bytes, want ${8 * nodeCount}`,
    );
  }
  return { frameNo, nodeCount, xy: new Float32Array(buf, 8, nodeCount * 2) };
}

/** Test helper / protocol symmetry: encode a frame the way the server does. */
export function encodeFrame(frameNo: number, xy: Float32Array): ArrayBuffer {
  const buf = new ArrayBuffer(8 + 4 * xy.length);
  const dv = new DataView(buf);
  dv.setUint32(0, frameNo, true);
  dv.setUint32(4, xy.length / 2, true);
  new Float32Array(buf, 8).set(xy);
  return buf;
}
