/** WebGL2 renderer: nodes as circular point sprites from one dynamic
 * position buffer, edges as an indexed line list over the same buffer.
 * Each frame costs a single bufferSubData upload; everything per-node is
 * drawn in two draw calls. Labels go on a 2D canvas overlay. */

import { Camera } from "./camera";
import { DEFAULT_LOD, edgesVisible, selectLabels, spriteSizePx, SPRITE_MAX_PX, SPRITE_MIN_PX } from "./lod";
import { Scene } from "./scene";

const POINT_VS = `#version 300 es
precision highp float;
layout(location=0) in vec2 a_pos;
layout(location=1) in float a_base;
uniform vec2 u_center;
uniform float u_zoom;
uniform vec2 u_viewport;
uniform float u_dpr;
uniform float u_sizeMin;
uniform float u_sizeMax;
uniform int u_selected;
out float v_selected;
void main() {
  vec2 screen = (a_pos - u_center) * u_zoom + u_viewport * 0.5;
  vec2 clip = screen / u_viewport * 2.0 - 1.0;
  gl_Position = vec4(clip.x, -clip.y, 0.0, 1.0);
  float px = clamp(a_base * sqrt(max(u_zoom, 1e-4)), u_sizeMin, u_sizeMax);
  v_selected = gl_VertexID == u_selected ? 1.0 : 0.0;
  gl_PointSize = (px + v_selected * 4.0) * u_dpr;
}`;

const POINT_FS = `#version 300 es
precision highp float;
in float v_selected;
uniform vec4 u_color;
uniform vec4 u_selColor;
out vec4 color;
void main() {
  vec2 d = gl_PointCoord - vec2(0.5);
  float r2 = dot(d, d);
  if (r2 > 0.25) discard;
  color = mix(u_color, u_selColor, v_selected);
  if (r2 > 0.16) color.rgb *= 0.72;
}`;

const LINE_VS = `#version 300 es
precision highp float;
layout(location=0) in vec2 a_pos;
uniform vec2 u_center;
uniform float u_zoom;
uniform vec2 u_viewport;
void main() {
  vec2 screen = (a_pos - u_center) * u_zoom + u_viewport * 0.5;
  vec2 clip = screen / u_viewport * 2.0 - 1.0;
  gl_Position = vec4(clip.x, -clip.y, 0.0, 1.0);
}`;

const LINE_FS = `#version 300 es
precision highp float;
uniform vec4 u_color;
out vec4 color;
void main() { color = u_color; }`;

function compile(gl: WebGL2RenderingContext, kind: number, src: string): WebGLShader {
  const sh = gl.createShader(kind)!;
  gl.shaderSource(sh, src);
  gl.compileShader(sh);
  if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS)) {
    throw new Error(`shader: ${gl.getShaderInfoLog(sh)}`);
  }
  return sh;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const prog = gl.createProgram()!;
  gl.attachShader(prog, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(prog, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(prog);
  if (!gl.getProgramParameter(prog, gl.LINK_STATUS)) {
    throw new Error(`program: ${gl.getProgramInfoLog(prog)}`);
  }
  return prog;
}

export class Renderer {
  private gl: WebGL2RenderingContext;
  private pointProg: WebGLProgram;
  private lineProg: WebGLProgram;
  private posBuf: WebGLBuffer;
  private baseBuf: WebGLBuffer;
  private edgeBuf: WebGLBuffer;
  private pointVao: WebGLVertexArrayObject;
  private lineVao: WebGLVertexArrayObject;
  private allocNodes = 0;
  private edgeCount = 0;
  public selected = -1;

  constructor(
    private canvas: HTMLCanvasElement,
    private labelCanvas: HTMLCanvasElement,
  ) {
    const gl = canvas.getContext("webgl2", { antialias: true });
    if (!gl) throw new Error("WebGL2 is required");
    this.gl = gl;
    this.pointProg = link(gl, POINT_VS, POINT_FS);
    this.lineProg = link(gl, LINE_VS, LINE_FS);
    this.posBuf = gl.createBuffer()!;
    this.baseBuf = gl.createBuffer()!;
    this.edgeBuf = gl.createBuffer()!;
    this.pointVao = gl.createVertexArray()!;
    this.lineVao = gl.createVertexArray()!;
    gl.enable(gl.BLEND);
    gl.blendFunc(gl.SRC_ALPHA, gl.ONE_MINUS_SRC_ALPHA);
  }

  /** (Re)allocate GPU buffers for a subgraph; called on start and expand. */
  rebuild(scene: Scene): void {
    const gl = this.gl;
    this.allocNodes = scene.nodeCount;
    this.edgeCount = scene.edgeCount;

    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.bufferData(gl.ARRAY_BUFFER, scene.positions.byteLength, gl.DYNAMIC_DRAW);

    const base = new Float32Array(scene.nodeCount);
    for (let i = 0; i < scene.nodeCount; i++) {
      base[i] = 2 + 2 * Math.sqrt(scene.degrees[i]);
    }
    gl.bindBuffer(gl.ARRAY_BUFFER, this.baseBuf);
    gl.bufferData(gl.ARRAY_BUFFER, base, gl.STATIC_DRAW);

    gl.bindVertexArray(this.pointVao);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 2, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.baseBuf);
    gl.enableVertexAttribArray(1);
    gl.vertexAttribPointer(1, 1, gl.FLOAT, false, 0, 0);

    gl.bindVertexArray(this.lineVao);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 2, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, this.edgeBuf);
    gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, scene.edges, gl.STATIC_DRAW);
    gl.bindVertexArray(null);
  }

  /** Push the latest frame's positions: one bulk upload. */
  uploadPositions(scene: Scene): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.posBuf);
    gl.bufferSubData(gl.ARRAY_BUFFER, 0, scene.positions);
  }

  draw(scene: Scene, cam: Camera): void {
    const gl = this.gl;
    const dpr = window.devicePixelRatio || 1;
    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    if (this.canvas.width !== w * dpr || this.canvas.height !== h * dpr) {
      this.canvas.width = w * dpr;
      this.canvas.height = h * dpr;
      this.labelCanvas.width = w * dpr;
      this.labelCanvas.height = h * dpr;
    }
    gl.viewport(0, 0, this.canvas.width, this.canvas.height);
    gl.clearColor(0.07, 0.08, 0.1, 1.0);
    gl.clear(gl.COLOR_BUFFER_BIT);
    if (this.allocNodes === 0) return;

    if (this.edgeCount > 0 && edgesVisible(cam.zoom)) {
      gl.useProgram(this.lineProg);
      gl.uniform2f(gl.getUniformLocation(this.lineProg, "u_center"), cam.cx, cam.cy);
      gl.uniform1f(gl.getUniformLocation(this.lineProg, "u_zoom"), cam.zoom);
      gl.uniform2f(gl.getUniformLocation(this.lineProg, "u_viewport"), w, h);
      gl.uniform4f(gl.getUniformLocation(this.lineProg, "u_color"), 0.42, 0.47, 0.58, 0.35);
      gl.bindVertexArray(this.lineVao);
      gl.drawElements(gl.LINES, this.edgeCount * 2, gl.UNSIGNED_INT, 0);
    }

    gl.useProgram(this.pointProg);
    gl.uniform2f(gl.getUniformLocation(this.pointProg, "u_center"), cam.cx, cam.cy);
    gl.uniform1f(gl.getUniformLocation(this.pointProg, "u_zoom"), cam.zoom);
    gl.uniform2f(gl.getUniformLocation(this.pointProg, "u_viewport"), w, h);
    gl.uniform1f(gl.getUniformLocation(this.pointProg, "u_dpr"), dpr);
    gl.uniform1f(gl.getUniformLocation(this.pointProg, "u_sizeMin"), SPRITE_MIN_PX);
    gl.uniform1f(gl.getUniformLocation(this.pointProg, "u_sizeMax"), SPRITE_MAX_PX);
    gl.uniform1i(gl.getUniformLocation(this.pointProg, "u_selected"), this.selected);
    gl.uniform4f(gl.getUniformLocation(this.pointProg, "u_color"), 0.55, 0.75, 1.0, 0.95);
    gl.uniform4f(gl.getUniformLocation(this.pointProg, "u_selColor"), 1.0, 0.72, 0.25, 1.0);
    gl.bindVertexArray(this.pointVao);
    gl.drawArrays(gl.POINTS, 0, this.allocNodes);
    gl.bindVertexArray(null);

    this.drawLabels(scene, cam, w, h, dpr);
  }

  private drawLabels(scene: Scene, cam: Camera, w: number, h: number, dpr: number): void {
    const ctx = this.labelCanvas.getContext("2d")!;
    ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
    ctx.clearRect(0, 0, w, h);
    const picked = selectLabels(scene.positions, scene.degrees, cam, w, h, DEFAULT_LOD);
    ctx.font = "11px system-ui, sans-serif";
    ctx.textBaseline = "middle";
    for (const i of picked) {
      const sx = (scene.positions[2 * i] - cam.cx) * cam.zoom + w / 2;
      const sy = (scene.positions[2 * i + 1] - cam.cy) * cam.zoom + h / 2;
      const off = spriteSizePx(scene.degrees[i], cam.zoom) / 2 + 4;
      const text = scene.labels[i];
      ctx.fillStyle = "rgba(8,10,14,0.75)";
      const tw = ctx.measureText(text).width;
      ctx.fillRect(sx + off - 2, sy - 8, tw + 4, 16);
      ctx.fillStyle = "#dbe4f0";
      ctx.fillText(text, sx + off, sy);
    }
  }
}
