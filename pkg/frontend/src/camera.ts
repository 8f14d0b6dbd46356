/** Pan/zoom camera: world -> screen is a similarity transform only; it
 * never mutates world coordinates. zoom is pixels per world unit. */

export const ZOOM_MIN = 0.01;
export const ZOOM_MAX = 100;

export interface Camera {
  cx: number;
  cy: number;
  zoom: number;
}

export function clampZoom(z: number): number {
  return Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, z));
}

export function worldToScreen(
  cam: Camera, w: number, h: number, x: number, y: number,
): [number, number] {
  return [(x - cam.cx) * cam.zoom + w / 2, (y - cam.cy) * cam.zoom + h / 2];
}

export function screenToWorld(
  cam: Camera, w: number, h: number, sx: number, sy: number,
): [number, number] {
  return [(sx - w / 2) / cam.zoom + cam.cx, (sy - h / 2) / cam.zoom + cam.cy];
}

/** Shift the view by a screen-space delta (drag-to-pan). */
export function pan(cam: Camera, dxPx: number, dyPx: number): Camera {
  return { cx: cam.cx - dxPx / cam.zoom, cy: cam.cy - dyPx / cam.zoom, zoom: cam.zoom };
}

/** Zoom by `factor` keeping the world point under (sx, sy) fixed. */
export function zoomAt(
  cam: Camera, w: number, h: number, sx: number, sy: number, factor: number,
): Camera {
  const zoom = clampZoom(cam.zoom * factor);
  if (zoom === cam.zoom) return cam;
  const [wx, wy] = screenToWorld(cam, w, h, sx, sy);
  return {
    cx: wx - (sx - w / 2) / zoom,
    cy: wy - (sy - h / 2) / zoom,
    zoom,
  };
}

/** Frame a bounding box with 10% margin (used on session start/expand). */
export function fitCamera(
  w: number, h: number,
  minX: number, minY: number, maxX: number, maxY: number,
): Camera {
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const zoom = clampZoom(Math.min(w / spanX, h / spanY) * 0.9);
  return { cx: (minX + maxX) / 2, cy: (minY + maxY) / 2, zoom };
}
