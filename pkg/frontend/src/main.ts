/** Explorer app: dataset picker + search, live session canvas with
 * pan/zoom/drag/expand, streaming positions into the GPU buffer. */

import {
  ApiError,
  createSession,
  deleteSession,
  listDatasets,
  searchLabels,
  SearchHit,
  SessionInfo,
  Selection,
  streamUrl,
} from "./api";
import { Camera, fitCamera, pan, zoomAt } from "./camera";
import { FpsMeter } from "./fps";
import { HitGrid } from "./hitgrid";
import { applyFrame, Scene, sceneBounds, sceneFromPayload } from "./scene";
import { Renderer } from "./renderer";
import { SessionStream } from "./stream";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, cls = "", text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text) node.textContent = text;
  return node;
}

const root = document.getElementById("app")!;

function toast(message: string): void {
  const t = el("div", "toast", message);
  document.body.appendChild(t);
  setTimeout(() => t.remove(), 3500);
}

// ---------------------------------------------------------------------------
// dataset list view

async function renderHome(): Promise<void> {
  root.innerHTML = "";
  const header = el("header");
  header.append(el("h1", "", "graphdeck explorer"));
  root.append(header);
  const list = el("div", "dataset-list");
  root.append(list);
  try {
    const datasets = await listDatasets();
    if (!datasets.length) {
      list.append(el("p", "muted", "No datasets served. Start with: graphdeck serve <store.carn>"));
      return;
    }
    for (const ds of datasets) {
      const card = el("a", "dataset-card") as HTMLAnchorElement;
      card.href = `#/dataset/${encodeURIComponent(ds.dataset_id)}`;
      card.append(el("h2", "", ds.dataset_id));
      card.append(
        el("p", "muted",
          `${ds.node_count.toLocaleString()} nodes, ${ds.edge_count.toLocaleString()} edges`),
      );
      card.append(el("p", "muted", `features: ${ds.features.join(", ")}`));
      list.append(card);
    }
  } catch (e) {
    list.append(el("p", "error", `failed to load datasets: ${e}`));
  }
}

// ---------------------------------------------------------------------------
// dataset view: search + selection builder + live session

interface SessionUI {
  stream: SessionStream;
  scene: Scene;
  renderer: Renderer;
  camera: Camera;
  info: SessionInfo;
  grid: HitGrid;
  fps: FpsMeter;
  raf: number;
  paused: boolean;
  stayPinned: boolean;
  seq: number;
  dragging: number;
  lastDragSent: number;
  pendingFit: boolean;
}

let active: SessionUI | null = null;

function closeActive(): void {
  if (!active) return;
  cancelAnimationFrame(active.raf);
  active.stream.close();
  deleteSession(active.info.session_id).catch(() => {});
  active = null;
}

async function renderDataset(datasetId: string): Promise<void> {
  closeActive();
  root.innerHTML = "";
  const header = el("header");
  const back = el("a", "back", "← datasets") as HTMLAnchorElement;
  back.href = "#/";
  header.append(back, el("h1", "", datasetId));
  root.append(header);

  const controls = el("div", "controls");
  const searchBox = el("input") as HTMLInputElement;
  searchBox.placeholder = "search labels…";
  const results = el("div", "results");
  const seeds = el("div", "seeds");
  const seedIds: SearchHit[] = [];
  const hopsInput = el("input") as HTMLInputElement;
  hopsInput.type = "number";
  hopsInput.value = "1";
  hopsInput.min = "0";
  const capInput = el("input") as HTMLInputElement;
  capInput.type = "number";
  capInput.value = "500";
  capInput.min = "1";
  const goBtn = el("button", "", "visualize neighborhood");
  const topkFeature = el("input") as HTMLInputElement;
  topkFeature.value = "degree";
  const topkK = el("input") as HTMLInputElement;
  topkK.type = "number";
  topkK.value = "500";
  const topkBtn = el("button", "", "visualize top-k");

  const row1 = el("div", "row");
  row1.append(searchBox);
  const row2 = el("div", "row");
  row2.append(el("span", "lbl", "hops"), hopsInput, el("span", "lbl", "cap"), capInput, goBtn);
  const row3 = el("div", "row");
  row3.append(el("span", "lbl", "feature"), topkFeature, el("span", "lbl", "k"), topkK, topkBtn);
  controls.append(row1, results, seeds, row2, row3);
  root.append(controls);

  const stage = el("div", "stage");
  root.append(stage);

  const refreshSeeds = () => {
    seeds.innerHTML = "";
    for (const hit of seedIds) {
      const chip = el("span", "chip", `${hit.label} (#${hit.id})`);
      chip.onclick = () => {
        seedIds.splice(seedIds.indexOf(hit), 1);
        refreshSeeds();
      };
      seeds.append(chip);
    }
  };

  let searchTimer: ReturnType<typeof setTimeout> | null = null;
  searchBox.oninput = () => {
    if (searchTimer) clearTimeout(searchTimer);
    searchTimer = setTimeout(async () => {
      results.innerHTML = "";
      const q = searchBox.value;
      if (!q) return;
      try {
        const { results: hits } = await searchLabels(datasetId, q, 12);
        for (const hit of hits) {
          const row = el("div", "hit", `${hit.label}  ·  degree ${hit.degree}`);
          row.onclick = () => {
            if (!seedIds.some((s) => s.id === hit.id)) seedIds.push(hit);
            refreshSeeds();
          };
          results.append(row);
        }
      } catch (e) {
        toast(String(e));
      }
    }, 150);
  };

  const start = async (selection: Selection) => {
    try {
      const info = await createSession(datasetId, selection);
      startSession(stage, info);
    } catch (e) {
      toast(e instanceof ApiError ? `${e.code}: ${e.message}` : String(e));
    }
  };
  goBtn.onclick = () => {
    if (!seedIds.length) {
      toast("pick at least one search result as a seed");
      return;
    }
    start({
      expand: {
        seeds: seedIds.map((s) => s.id),
        hops: Number(hopsInput.value),
        cap: Number(capInput.value),
      },
    });
  };
  topkBtn.onclick = () =>
    start({ top_k: { feature: topkFeature.value, k: Number(topkK.value) } });
}

function startSession(stage: HTMLElement, info: SessionInfo): void {
  closeActive();
  stage.innerHTML = "";
  const wrap = el("div", "canvas-wrap");
  const canvas = el("canvas", "gl") as HTMLCanvasElement;
  const labels = el("canvas", "labels") as HTMLCanvasElement;
  const hud = el("div", "hud");
  const fpsBox = el("span", "fps", "– fps");
  const statBox = el("span", "stat", "");
  const pauseBtn = el("button", "", "pause");
  const pinToggle = el("label", "toggle") as HTMLLabelElement;
  const pinCheck = el("input") as HTMLInputElement;
  pinCheck.type = "checkbox";
  pinToggle.append(pinCheck, document.createTextNode(" stay pinned"));
  const closeBtn = el("button", "", "close");
  hud.append(fpsBox, statBox, pauseBtn, pinToggle, closeBtn);
  wrap.append(canvas, labels, hud);
  stage.append(wrap);

  const scene = sceneFromPayload(info.subgraph);
  const renderer = new Renderer(canvas, labels);
  renderer.rebuild(scene);
  const ui: SessionUI = {
    stream: new SessionStream(streamUrl(info.session_id), (s) => {
      statBox.textContent = `${s} · ${scene.nodeCount} nodes / ${scene.edgeCount} edges`;
    }),
    scene,
    renderer,
    camera: { cx: info.layout.area[0] / 2, cy: info.layout.area[1] / 2, zoom: 0.5 },
    info,
    grid: new HitGrid(),
    fps: new FpsMeter(),
    raf: 0,
    paused: false,
    stayPinned: false,
    seq: 1,
    dragging: -1,
    lastDragSent: 0,
    pendingFit: true,
  };
  active = ui;
  ui.stream.connect();

  pauseBtn.onclick = () => {
    ui.paused = !ui.paused;
    pauseBtn.textContent = ui.paused ? "resume" : "pause";
    ui.stream.send({ op: ui.paused ? "pause" : "resume", seq: ui.seq++ });
  };
  pinCheck.onchange = () => {
    ui.stayPinned = pinCheck.checked;
  };
  closeBtn.onclick = () => {
    ui.stream.send({ op: "close" });
    closeActive();
    wrap.remove();
  };

  bindInteractions(ui, canvas);

  const loop = (now: number) => {
    ui.raf = requestAnimationFrame(loop);
    const { frame, messages } = ui.stream.drain();
    for (const msg of messages) {
      handleMessage(ui, msg, statBox);
    }
    if (frame && frame.nodeCount === ui.scene.nodeCount) {
      applyFrame(ui.scene, frame);
      ui.renderer.uploadPositions(ui.scene);
      if (ui.pendingFit) {
        const [a, b, c, d] = sceneBounds(ui.scene);
        ui.camera = fitCamera(canvas.clientWidth, canvas.clientHeight, a, b, c, d);
        ui.pendingFit = false;
      }
    }
    ui.renderer.draw(ui.scene, ui.camera);
    ui.grid.build(
      ui.scene.positions, ui.scene.degrees, ui.camera,
      canvas.clientWidth, canvas.clientHeight,
    );
    ui.fps.tick(now);
    fpsBox.textContent = `${ui.fps.value().toFixed(0)} fps · frame ${ui.scene.frameNo}`;
  };
  ui.raf = requestAnimationFrame(loop);

  canvas.addEventListener("webglcontextlost", (ev) => {
    ev.preventDefault();
  });
  canvas.addEventListener("webglcontextrestored", () => {
    ui.renderer.rebuild(ui.scene);
  });
}

function handleMessage(ui: SessionUI, msg: any, statBox: HTMLElement): void {
  if (msg.type === "subgraph") {
    const fresh = sceneFromPayload(msg.subgraph);
    fresh.positions.set(
      ui.scene.positions.length <= fresh.positions.length
        ? ui.scene.positions
        : ui.scene.positions.subarray(0, fresh.positions.length),
    );
    ui.scene = fresh;
    ui.renderer.rebuild(ui.scene);
    statBox.textContent = `open · ${ui.scene.nodeCount} nodes / ${ui.scene.edgeCount} edges`;
  } else if (msg.type === "error") {
    toast(`${msg.code}: ${msg.message}`);
    if (ui.dragging >= 0) ui.dragging = -1;
  } else if (msg.type === "closed") {
    toast("session closed by server");
    ui.stream.close();
  }
}

function bindInteractions(ui: SessionUI, canvas: HTMLCanvasElement): void {
  let panning = false;
  let lastX = 0;
  let lastY = 0;

  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const hit = ui.grid.hitTest(ev.offsetX, ev.offsetY);
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    if (hit >= 0) {
      ui.dragging = hit;
      ui.renderer.selected = hit;
      const [wx, wy] = screenToWorldOf(ui, canvas, ev.offsetX, ev.offsetY);
      ui.stream.send({ op: "pin", index: hit, x: wx, y: wy, seq: ui.seq++ });
    } else {
      panning = true;
    }
  });

  canvas.addEventListener("pointermove", (ev) => {
    if (ui.dragging >= 0) {
      const now = performance.now();
      const minGap = 1000 / ui.info.frame_rate;
      if (now - ui.lastDragSent >= minGap) {
        const [wx, wy] = screenToWorldOf(ui, canvas, ev.offsetX, ev.offsetY);
        ui.stream.send({ op: "drag", index: ui.dragging, x: wx, y: wy, seq: ui.seq++ });
        ui.lastDragSent = now;
      }
    } else if (panning) {
      ui.camera = pan(ui.camera, ev.offsetX - lastX, ev.offsetY - lastY);
      lastX = ev.offsetX;
      lastY = ev.offsetY;
    }
  });

  const release = (ev: PointerEvent) => {
    if (ui.dragging >= 0) {
      const [wx, wy] = screenToWorldOf(ui, canvas, ev.offsetX, ev.offsetY);
      ui.stream.send({ op: "drag", index: ui.dragging, x: wx, y: wy, seq: ui.seq++ });
      if (!ui.stayPinned) {
        ui.stream.send({ op: "unpin", index: ui.dragging, seq: ui.seq++ });
      }
      ui.dragging = -1;
    }
    panning = false;
  };
  canvas.addEventListener("pointerup", release);
  canvas.addEventListener("pointercancel", release);

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const factor = Math.exp(-ev.deltaY * 0.0015);
    ui.camera = zoomAt(
      ui.camera, canvas.clientWidth, canvas.clientHeight,
      ev.offsetX, ev.offsetY, factor,
    );
  }, { passive: false });

  canvas.addEventListener("dblclick", (ev) => {
    const hit = ui.grid.hitTest(ev.offsetX, ev.offsetY);
    if (hit >= 0) {
      ui.stream.send({ op: "expand", index: hit, hops: 1, cap: 200, seq: ui.seq++ });
    }
  });
}

function screenToWorldOf(
  ui: SessionUI, canvas: HTMLCanvasElement, sx: number, sy: number,
): [number, number] {
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  return [
    (sx - w / 2) / ui.camera.zoom + ui.camera.cx,
    (sy - h / 2) / ui.camera.zoom + ui.camera.cy,
  ];
}

// ---------------------------------------------------------------------------
// routing: #/ and #/dataset/{id}

function route(): void {
  const hash = location.hash || "#/";
  const m = hash.match(/^#\/dataset\/(.+)$/);
  if (m) {
    renderDataset(decodeURIComponent(m[1]));
  } else {
    closeActive();
    renderHome();
  }
}

window.addEventListener("hashchange", route);
route();
