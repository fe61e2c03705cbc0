/**
 * Canvas-independent annotation state: pending prompts per class, live
 * predictions, a local mirror of the server's commit history, and the
 * zoom/pan transform. Rendering consumes this read-only; event handlers
 * mutate it and trigger re-render + re-predict.
 */

import { CLASS_COLORS, OVERLAY_ALPHA } from "./colors.js";
import type { MaskLayer } from "./overlay.js";
import type {
  BoxPayload,
  FeatureClass,
  PredictRequest,
  PromptPoint,
  RlePayload,
} from "./types.js";

export interface Prediction {
  payload: RlePayload; // exactly as received; resent verbatim on commit
  decoded: Uint8Array;
  score: number;
}

export interface PendingPrompts {
  points: PromptPoint[];
  box: BoxPayload | null;
}

interface CommitEntry {
  cls: FeatureClass;
  decoded: Uint8Array;
}

const MIN_ZOOM = 0.25;
const MAX_ZOOM = 8;

export class AnnotatorState {
  readonly width: number;
  readonly height: number;
  activeClass: FeatureClass = "pupil";
  zoom = 1;
  panX = 0;
  panY = 0;

  private pending = new Map<FeatureClass, PendingPrompts>();
  private predictions = new Map<FeatureClass, Prediction>();
  private commits: CommitEntry[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  /** Canvas pixel to image pixel; null when outside the image. */
  canvasToImage(cx: number, cy: number): { x: number; y: number } | null {
    const x = Math.floor((cx - this.panX) / this.zoom);
    const y = Math.floor((cy - this.panY) / this.zoom);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return null;
    return { x, y };
  }

  zoomBy(factor: number, centerX: number, centerY: number): void {
    const next = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, this.zoom * factor));
    // keep the canvas point under the cursor fixed while zooming
    this.panX = centerX - ((centerX - this.panX) / this.zoom) * next;
    this.panY = centerY - ((centerY - this.panY) / this.zoom) * next;
    this.zoom = next;
  }

  panBy(dx: number, dy: number): void {
    this.panX += dx;
    this.panY += dy;
  }

  pendingFor(cls: FeatureClass): PendingPrompts {
    let entry = this.pending.get(cls);
    if (!entry) {
      entry = { points: [], box: null };
      this.pending.set(cls, entry);
    }
    return entry;
  }

  addPoint(x: number, y: number, label: 0 | 1): void {
    this.pendingFor(this.activeClass).points.push({ x, y, label });
  }

  setBox(box: BoxPayload): void {
    this.pendingFor(this.activeClass).box = box;
  }

  clearPending(cls: FeatureClass): void {
    this.pending.delete(cls);
    this.predictions.delete(cls);
  }

  /** The full prompt set for the active class, resent on every predict. */
  predictRequest(): PredictRequest | null {
    const entry = this.pendingFor(this.activeClass);
    if (entry.points.length === 0 && entry.box === null) return null;
    return { points: [...entry.points], box: entry.box, class: this.activeClass };
  }

  setPrediction(cls: FeatureClass, prediction: Prediction): void {
    this.predictions.set(cls, prediction);
  }

  predictionFor(cls: FeatureClass): Prediction | undefined {
    return this.predictions.get(cls);
  }

  recordCommit(cls: FeatureClass, decoded: Uint8Array): void {
    this.commits.push({ cls, decoded });
    this.clearPending(cls);
  }

  /** Mirror of a successful server-side undo. */
  popCommit(): void {
    this.commits.pop();
  }

  get commitDepth(): number {
    return this.commits.length;
  }

  /**
   * Overlay stack for rendering: the latest committed mask per class
   * (the server's slot rule), then the live prediction of the active
   * class on top.
   */
  overlayLayers(): MaskLayer[] {
    const slots = new Map<FeatureClass, Uint8Array>();
    for (const commit of this.commits) slots.set(commit.cls, commit.decoded);
    const layers: MaskLayer[] = [];
    for (const [cls, mask] of slots) {
      layers.push({ mask, color: CLASS_COLORS[cls], alpha: OVERLAY_ALPHA });
    }
    const live = this.predictions.get(this.activeClass);
    if (live) {
      layers.push({
        mask: live.decoded,
        color: CLASS_COLORS[this.activeClass],
        alpha: OVERLAY_ALPHA,
      });
    }
    return layers;
  }

  /** Markers and box to draw: only the active class's pending prompts. */
  activePrompts(): PendingPrompts {
    const entry = this.pendingFor(this.activeClass);
    return { points: [...entry.points], box: entry.box };
  }
}
