/** DOM wiring. All decisions live in the session on the server; this
 * file forwards controls, posts camera frames, and paints whatever the
 * view model says. Nothing here is load-bearing for correctness, which
 * is why the testable logic sits in the sibling modules.
 */

import { ApiClient, ApiError } from "./api.js";
import { FpsEstimator, FrameGate, rgbaToGray } from "./camera.js";
import { eventForControl, selectCategoryEvent, uploadModelEvent, markerUpdateEvent, CONTROL_EVENTS } from "./events.js";
import type { ControlId } from "./events.js";
import { buildScene } from "./render3d.js";
import type { Intrinsics } from "./render3d.js";
import { EventRecorder, downloadName, jsonObjectUrl } from "./recorder.js";
import type { DetectionDto, MeshDto, ReportDto, SessionStateDto } from "./types.js";
import { buildViewModel } from "./viewmodel.js";

const FRAME_W = 640;
const FRAME_H = 480;
const MARKER_SIDE_MM = 80;
const INTRINSICS: Intrinsics = { fx: 800, fy: 800, cx: FRAME_W / 2, cy: FRAME_H / 2 };

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient();
const recorder = new EventRecorder();
const gate = new FrameGate();
const fps = new FpsEstimator();

let sessionId = "";
let state: SessionStateDto | null = null;
let report: ReportDto | null = null;
let detection: DetectionDto | null = null;
let mesh: MeshDto | null = null;
let cameraStream: MediaStream | null = null;
let loopHandle = 0;

const video = $<HTMLVideoElement>("camera-video");
const overlay = $<HTMLCanvasElement>("ar-canvas");
const grabCanvas = document.createElement("canvas");
grabCanvas.width = FRAME_W;
grabCanvas.height = FRAME_H;

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("visible");
  window.setTimeout(() => el.classList.remove("visible"), 4000);
}

async function refreshMeshAndReport(): Promise<void> {
  if (!state || state.selected_index === null) {
    mesh = null;
    report = null;
    return;
  }
  const data = await api.getMesh(sessionId);
  mesh = data.mesh;
  report = data.report;
}

function render(): void {
  if (!state) return;
  const vm = buildViewModel(state, report, detection, fps.rate(performance.now()));

  for (const section of document.querySelectorAll<HTMLElement>("[data-screen]")) {
    section.hidden = section.dataset.screen !== vm.screen;
  }

  const list = $("catalog-list");
  list.replaceChildren(
    ...vm.catalog.map((name) => {
      const li = document.createElement("li");
      li.textContent = name;
      if (name === vm.selectedName) li.classList.add("selected");
      return li;
    }),
  );
  $("selected-name").textContent = vm.selectedName ?? "no model selected";
  $("zoom-level").textContent = vm.zoomText;
  $("scale-mode").textContent = vm.scaleModeText;
  $("session-note").textContent = vm.note ?? "";

  const badge = $("watertight-badge");
  badge.hidden = vm.watertightBadge === null;
  badge.textContent = vm.watertightBadge ?? "";
  badge.classList.toggle("good", vm.watertightBadge === "watertight");
  badge.classList.toggle("bad", vm.watertightBadge === "not watertight");
  $("report-lines").replaceChildren(
    ...vm.reportLines.map((line) => {
      const li = document.createElement("li");
      li.textContent = line;
      return li;
    }),
  );

  const indicator = $("marker-indicator");
  indicator.dataset.mode = vm.markerIndicator;
  indicator.textContent =
    vm.markerIndicator === "tracking" ? "marker locked"
      : vm.markerIndicator === "searching" ? "marker not found"
        : "";
  $("confidence").textContent = vm.confidenceText;
  $("fps").textContent = vm.fpsText;

  for (const btn of document.querySelectorAll<HTMLButtonElement>("[data-needs-model]")) {
    btn.disabled = !vm.canPose;
  }
  $<HTMLButtonElement>("btn-enter-ar").disabled = cameraStream === null;
}

async function dispatch(control: ControlId): Promise<void> {
  const event = eventForControl(control);
  const before = state?.selected_index ?? null;
  state = await api.sendEvent(sessionId, event);
  recorder.record(event);
  if (state.selected_index !== before) {
    detection = null;
    await refreshMeshAndReport();
  }
  render();
}

async function dispatchCategory(name: string): Promise<void> {
  const event = selectCategoryEvent(name);
  state = await api.sendEvent(sessionId, event);
  recorder.record(event);
  await refreshMeshAndReport();
  render();
}

async function uploadFile(file: File): Promise<void> {
  const name = file.name.replace(/\.stl$/i, "");
  try {
    const result = await api.uploadModel(sessionId, name, await file.arrayBuffer());
    recorder.record(uploadModelEvent(name));
    state = result.state;
    report = result.report;
    mesh = result.mesh;
    render();
  } catch (err) {
    // Parser message verbatim; the previous model stays selected.
    toast(err instanceof ApiError ? err.message : `upload failed: ${err}`);
  }
}

function drawOverlay(): void {
  const ctx = overlay.getContext("2d");
  if (!ctx) return;
  ctx.drawImage(video, 0, 0, FRAME_W, FRAME_H);
  if (!state || !mesh || !detection || !state.marker_visible) return;

  const scene = buildScene(mesh, state.transform, detection, INTRINSICS);
  for (let i = 0; i < scene.faceOrder.length; i++) {
    const [a, b, c] = mesh.faces[scene.faceOrder[i]];
    const shade = scene.faceShade[i];
    ctx.beginPath();
    ctx.moveTo(scene.uvz[a][0], scene.uvz[a][1]);
    ctx.lineTo(scene.uvz[b][0], scene.uvz[b][1]);
    ctx.lineTo(scene.uvz[c][0], scene.uvz[c][1]);
    ctx.closePath();
    ctx.fillStyle = `rgba(${Math.round(90 * shade)}, ${Math.round(160 * shade)}, ${Math.round(235 * shade)}, 0.85)`;
    ctx.fill();
  }
  ctx.strokeStyle = "rgba(255, 235, 80, 0.9)";
  ctx.lineWidth = 1;
  for (const [a, b] of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(scene.uvz[a][0], scene.uvz[a][1]);
    ctx.lineTo(scene.uvz[b][0], scene.uvz[b][1]);
    ctx.stroke();
  }
}

async function pumpFrame(): Promise<void> {
  if (!state || state.screen !== "ar_view" || !cameraStream) return;
  const grab = grabCanvas.getContext("2d", { willReadFrequently: true });
  if (!grab) return;
  grab.drawImage(video, 0, 0, FRAME_W, FRAME_H);
  const rgba = grab.getImageData(0, 0, FRAME_W, FRAME_H).data;
  const gray = rgbaToGray(rgba, FRAME_W, FRAME_H);

  // One frame in flight; extra frames are dropped, not queued.
  const result = await gate.run(() => api.postFrame(sessionId, gray, FRAME_W, FRAME_H));
  if (result === null) return;
  detection = result.detection;
  state = result.state;
  recorder.record(markerUpdateEvent(result.detection?.yaw_rad ?? null));
  fps.tick(performance.now());
  render();
}

function frameLoop(): void {
  loopHandle = window.requestAnimationFrame(() => {
    void pumpFrame();
    drawOverlay();
    frameLoop();
  });
}

async function startCamera(): Promise<boolean> {
  try {
    cameraStream = await navigator.mediaDevices.getUserMedia({
      video: { width: { ideal: FRAME_W }, height: { ideal: FRAME_H } },
      audio: false,
    });
    video.srcObject = cameraStream;
    await video.play();
    return true;
  } catch {
    cameraStream = null;
    return false;
  }
}

async function grantFlow(withCamera: boolean): Promise<void> {
  if (withCamera) {
    const ok = await startCamera();
    if (!ok) {
      $("camera-banner").hidden = false;
      return; // stay on the gate with the banner and retry button
    }
  }
  await dispatch("grant-camera");
}

async function downloadScript(): Promise<void> {
  const script = await api.getScript(sessionId);
  triggerDownload(jsonObjectUrl(JSON.stringify(script, null, 1)), downloadName("script", sessionId));
}

function downloadReport(): void {
  if (!report) return;
  triggerDownload(jsonObjectUrl(JSON.stringify(report, null, 1)), downloadName("report", sessionId));
}

function triggerDownload(url: string, name: string): void {
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

function wireControls(): void {
  for (const control of Object.keys(CONTROL_EVENTS) as ControlId[]) {
    for (const btn of document.querySelectorAll<HTMLButtonElement>(`[data-control="${control}"]`)) {
      btn.addEventListener("click", () => void dispatch(control).catch((e) => toast(String(e))));
    }
  }
  for (const chip of document.querySelectorAll<HTMLButtonElement>("[data-category]")) {
    chip.addEventListener("click", () =>
      void dispatchCategory(chip.dataset.category ?? "").catch((e) => toast(String(e))));
  }
  $("btn-grant").addEventListener("click", () => void grantFlow(true));
  $("btn-skip-camera").addEventListener("click", () => void grantFlow(false));
  $<HTMLInputElement>("file-input").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void uploadFile(file);
    input.value = "";
  });
  $("btn-download-script").addEventListener("click", () => void downloadScript());
  $("btn-download-report").addEventListener("click", downloadReport);
  $<HTMLImageElement>("marker-preview").src = api.markerUrl(256);
}

async function boot(): Promise<void> {
  const created = await api.createSession({
    marker_side: MARKER_SIDE_MM,
    fx: INTRINSICS.fx,
    fy: INTRINSICS.fy,
    cx: INTRINSICS.cx,
    cy: INTRINSICS.cy,
    include_demo_catalog: true,
  });
  sessionId = created.session_id;
  state = created.state;
  await refreshMeshAndReport();
  wireControls();
  render();
  frameLoop();
}

void boot().catch((err) => {
  document.body.innerHTML = `<p class="fatal">cannot reach the meshlens service: ${err}</p>`;
});

export { loopHandle };
