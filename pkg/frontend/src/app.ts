/**
 * DOM wiring for the annotator: one canvas, a class picker and
 * commit/undo/export controls on top of the annotation service API.
 *
 * Interactions: click adds a foreground point, Shift+click a background
 * point, dragging draws a box prompt; every edit resends the full
 * prompt set for the active class (the service is stateless per call).
 * Masks are never computed locally; the export download is byte for
 * byte what GET /export returned.
 */

import { AnnotationClient, ApiError, base64ToBytes, type FetchLike } from "./api.js";
import { composeFrame } from "./overlay.js";
import { decodeRle } from "./rle.js";
import { AnnotatorState } from "./state.js";
import {
  FEATURE_CLASSES,
  type BoxPayload,
  type FeatureClass,
  type PredictRequest,
  type RawImage,
} from "./types.js";

const DRAG_THRESHOLD_PX = 4;
const TOAST_MS = 4000;

export interface AppDeps {
  baseUrl: string;
  fetchImpl?: FetchLike;
  decodeImage?: (bytes: Uint8Array) => Promise<RawImage>;
  saveFile?: (name: string, bytes: Uint8Array) => void;
  debounceMs?: number;
}

interface PressState {
  cx: number;
  cy: number;
  shift: boolean;
}

async function decodeImageDefault(bytes: Uint8Array): Promise<RawImage> {
  const bitmap = await createImageBitmap(new Blob([bytes.slice().buffer], { type: "image/png" }));
  const off = document.createElement("canvas");
  off.width = bitmap.width;
  off.height = bitmap.height;
  const ctx = off.getContext("2d");
  if (!ctx) throw new Error("2d canvas is unavailable");
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { width: bitmap.width, height: bitmap.height, data: data.data };
}

function saveFileDefault(name: string, bytes: Uint8Array): void {
  const url = URL.createObjectURL(new Blob([bytes.slice().buffer]));
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = name;
  anchor.click();
  URL.revokeObjectURL(url);
}

/** Blits composed frames; tolerates environments without a 2D context. */
class CanvasRenderer {
  private ctx: CanvasRenderingContext2D | null;
  private buffer: HTMLCanvasElement;

  constructor(private canvas: HTMLCanvasElement) {
    this.ctx = canvas.getContext("2d");
    this.buffer = document.createElement("canvas");
  }

  draw(frame: RawImage, zoom: number, panX: number, panY: number): void {
    if (!this.ctx) return;
    this.buffer.width = frame.width;
    this.buffer.height = frame.height;
    const bctx = this.buffer.getContext("2d");
    if (!bctx) return;
    bctx.putImageData(
      new ImageData(new Uint8ClampedArray(frame.data), frame.width, frame.height),
      0,
      0,
    );
    this.ctx.setTransform(1, 0, 0, 1, 0, 0);
    this.ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    this.ctx.setTransform(zoom, 0, 0, zoom, panX, panY);
    this.ctx.imageSmoothingEnabled = false;
    this.ctx.drawImage(this.buffer, 0, 0);
  }
}

export class AnnotatorApp {
  readonly client: AnnotationClient;
  state: AnnotatorState | null = null;
  sessionId: string | null = null;
  itemId: string | null = null;

  private baseImage: RawImage | null = null;
  private frame: RawImage | null = null;
  private renderer: CanvasRenderer;
  private press: PressState | null = null;
  private dragBox: BoxPayload | null = null;
  private panning: { cx: number; cy: number } | null = null;

  private predictTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> | null = null;
  private dirty = false;

  private decodeImage: (bytes: Uint8Array) => Promise<RawImage>;
  private saveFile: (name: string, bytes: Uint8Array) => void;
  private debounceMs: number;

  readonly canvas: HTMLCanvasElement;
  private itemSelect: HTMLSelectElement;
  private scoreEl: HTMLElement;
  private toastHost: HTMLElement;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.client = new AnnotationClient(deps.baseUrl, deps.fetchImpl);
    this.decodeImage = deps.decodeImage ?? decodeImageDefault;
    this.saveFile = deps.saveFile ?? saveFileDefault;
    this.debounceMs = deps.debounceMs ?? 150;

    root.innerHTML = `
      <div class="toolbar">
        <select data-role="item"></select>
        <button data-role="open">Open</button>
        <span data-role="classes"></span>
        <button data-role="commit">Commit</button>
        <button data-role="undo">Undo</button>
        <button data-role="export">Export</button>
        <span data-role="score"></span>
      </div>
      <canvas data-role="canvas" tabindex="0"></canvas>
      <div data-role="toasts"></div>
    `;
    this.canvas = root.querySelector<HTMLCanvasElement>('[data-role="canvas"]')!;
    this.itemSelect = root.querySelector<HTMLSelectElement>('[data-role="item"]')!;
    this.scoreEl = root.querySelector<HTMLElement>('[data-role="score"]')!;
    this.toastHost = root.querySelector<HTMLElement>('[data-role="toasts"]')!;
    this.renderer = new CanvasRenderer(this.canvas);

    const classHost = root.querySelector<HTMLElement>('[data-role="classes"]')!;
    for (const cls of FEATURE_CLASSES) {
      const label = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "feature-class";
      radio.value = cls;
      radio.checked = cls === "pupil";
      radio.addEventListener("change", () => this.setActiveClass(cls));
      label.appendChild(radio);
      label.appendChild(document.createTextNode(cls));
      classHost.appendChild(label);
    }

    root.querySelector('[data-role="open"]')!.addEventListener("click", () => {
      const id = this.itemSelect.value;
      if (id) void this.openItem(id);
    });
    root.querySelector('[data-role="commit"]')!.addEventListener("click", () => void this.commit());
    root.querySelector('[data-role="undo"]')!.addEventListener("click", () => void this.undo());
    root.querySelector('[data-role="export"]')!.addEventListener("click", () => void this.exportLabels());

    this.canvas.addEventListener("mousedown", (e) => this.onMouseDown(e));
    this.canvas.addEventListener("mousemove", (e) => this.onMouseMove(e));
    this.canvas.addEventListener("mouseup", (e) => this.onMouseUp(e));
    this.canvas.addEventListener("wheel", (e) => this.onWheel(e));
  }

  async loadItemList(): Promise<string[]> {
    const items = await this.client.listItems();
    this.itemSelect.innerHTML = "";
    for (const id of items) {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      this.itemSelect.appendChild(option);
    }
    return items;
  }

  async openItem(itemId: string): Promise<void> {
    const info = await this.client.createSession({ item_id: itemId });
    const bytes = await this.client.sessionImage(info.session_id);
    this.baseImage = await this.decodeImage(bytes);
    this.sessionId = info.session_id;
    this.itemId = itemId;
    this.state = new AnnotatorState(info.width, info.height);
    this.canvas.width = info.width;
    this.canvas.height = info.height;
    this.scoreEl.textContent = "";
    this.render();
  }

  setActiveClass(cls: FeatureClass): void {
    if (!this.state) return;
    this.state.activeClass = cls;
    this.render();
  }

  /** The most recently composed frame, for assertions and debugging. */
  lastFrame(): RawImage | null {
    return this.frame;
  }

  render(): void {
    if (!this.state || !this.baseImage) return;
    const prompts = this.state.activePrompts();
    const box = this.dragBox ?? prompts.box;
    this.frame = composeFrame(this.baseImage, this.state.overlayLayers(), prompts.points, box);
    this.renderer.draw(this.frame, this.state.zoom, this.state.panX, this.state.panY);
  }

  // ---- pointer interactions ----

  private canvasPoint(e: MouseEvent): { cx: number; cy: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { cx: e.clientX - rect.left, cy: e.clientY - rect.top };
  }

  private onMouseDown(e: MouseEvent): void {
    if (!this.state) return;
    const { cx, cy } = this.canvasPoint(e);
    if (e.button === 1) {
      this.panning = { cx, cy };
      e.preventDefault();
      return;
    }
    if (e.button !== 0) return;
    this.press = { cx, cy, shift: e.shiftKey };
    this.dragBox = null;
  }

  private onMouseMove(e: MouseEvent): void {
    if (!this.state) return;
    const { cx, cy } = this.canvasPoint(e);
    if (this.panning) {
      this.state.panBy(cx - this.panning.cx, cy - this.panning.cy);
      this.panning = { cx, cy };
      this.render();
      return;
    }
    if (!this.press) return;
    if (
      Math.abs(cx - this.press.cx) <= DRAG_THRESHOLD_PX &&
      Math.abs(cy - this.press.cy) <= DRAG_THRESHOLD_PX &&
      this.dragBox === null
    ) {
      return;
    }
    const a = this.state.canvasToImage(this.press.cx, this.press.cy);
    const b = this.state.canvasToImage(cx, cy);
    if (a && b) {
      this.dragBox = {
        x_min: Math.min(a.x, b.x),
        y_min: Math.min(a.y, b.y),
        x_max: Math.max(a.x, b.x),
        y_max: Math.max(a.y, b.y),
      };
      this.render();
    }
  }

  private onMouseUp(e: MouseEvent): void {
    if (!this.state) return;
    if (this.panning && e.button === 1) {
      this.panning = null;
      return;
    }
    if (!this.press || e.button !== 0) return;
    const press = this.press;
    this.press = null;
    if (this.dragBox) {
      this.state.setBox(this.dragBox);
      this.dragBox = null;
      this.schedulePredict();
      this.render();
      return;
    }
    const img = this.state.canvasToImage(press.cx, press.cy);
    if (!img) return;
    this.state.addPoint(img.x, img.y, press.shift ? 0 : 1);
    this.schedulePredict();
    this.render();
  }

  private onWheel(e: WheelEvent): void {
    if (!this.state) return;
    e.preventDefault();
    const { cx, cy } = this.canvasPoint(e);
    this.state.zoomBy(e.deltaY < 0 ? 1.25 : 0.8, cx, cy);
    this.render();
  }

  // ---- service round trips ----

  schedulePredict(): void {
    if (this.predictTimer !== null) clearTimeout(this.predictTimer);
    this.predictTimer = setTimeout(() => {
      this.predictTimer = null;
      void this.runPredict();
    }, this.debounceMs);
  }

  private async runPredict(): Promise<void> {
    if (!this.state || !this.sessionId) return;
    if (this.inflight) {
      this.dirty = true; // single active request; last edit wins
      return;
    }
    const request = this.state.predictRequest();
    if (!request) return;
    const sessionId = this.sessionId;
    this.inflight = (async () => {
      try {
        const reply = await this.client.predict(sessionId, request);
        this.state!.setPrediction(request.class, {
          payload: reply.mask,
          decoded: decodeRle(reply.mask),
          score: reply.score,
        });
        this.scoreEl.textContent = `score ${reply.score.toFixed(3)}`;
        this.render();
      } catch (err) {
        this.toast(`predict failed: ${describe(err)}`); // pending edits stay put
      } finally {
        this.inflight = null;
        if (this.dirty) {
          this.dirty = false;
          void this.runPredict();
        }
      }
    })();
    await this.inflight;
  }

  /** Settle all debounced and in-flight predict work (used by tests). */
  async flush(): Promise<void> {
    while (this.predictTimer !== null || this.inflight !== null || this.dirty) {
      await new Promise((resolve) => setTimeout(resolve, Math.max(1, this.debounceMs)));
    }
  }

  async commit(): Promise<void> {
    if (!this.state || !this.sessionId) return;
    const cls = this.state.activeClass;
    const prediction = this.state.predictionFor(cls);
    if (!prediction) {
      this.toast("nothing to commit: predict a mask first");
      return;
    }
    const prompts: PredictRequest | null = this.state.predictRequest();
    try {
      await this.client.commit(this.sessionId, cls, prediction.payload, prompts);
      this.state.recordCommit(cls, prediction.decoded);
      this.render();
    } catch (err) {
      this.toast(`commit failed: ${describe(err)}`);
    }
  }

  async undo(): Promise<void> {
    if (!this.state || !this.sessionId) return;
    try {
      await this.client.undo(this.sessionId);
      this.state.popCommit();
      this.render();
    } catch (err) {
      this.toast(`undo failed: ${describe(err)}`);
    }
  }

  /** Download the label image + provenance sidecar; returns the PNG bytes. */
  async exportLabels(): Promise<Uint8Array | null> {
    if (!this.sessionId) return null;
    try {
      const reply = await this.client.exportLabels(this.sessionId);
      const bytes = base64ToBytes(reply.label_image_b64);
      const stem = (this.itemId ?? "session").replace(/\//g, "_");
      this.saveFile(`${stem}_labels.png`, bytes);
      this.saveFile(
        `${stem}_provenance.json`,
        new TextEncoder().encode(JSON.stringify(reply.provenance, null, 2)),
      );
      return bytes;
    } catch (err) {
      this.toast(`export failed: ${describe(err)}`);
      return null;
    }
  }

  toast(message: string): void {
    const el = document.createElement("div");
    el.className = "toast";
    el.textContent = message;
    this.toastHost.appendChild(el);
    setTimeout(() => el.remove(), TOAST_MS);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status} ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

export async function createApp(root: HTMLElement, deps: AppDeps): Promise<AnnotatorApp> {
  const app = new AnnotatorApp(root, deps);
  try {
    await app.loadItemList();
  } catch {
    app.toast("no dataset attached; item list unavailable");
  }
  return app;
}
