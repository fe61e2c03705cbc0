/**
 * Pure pixel compositing in image space. The canvas layer only blits
 * frames produced here, which keeps every visual testable without a
 * real 2D context.
 */

import {
  BACKGROUND_MARKER,
  BOX_COLOR,
  FOREGROUND_MARKER,
  type Rgb,
} from "./colors.js";
import type { BoxPayload, PromptPoint, RawImage } from "./types.js";

export interface MaskLayer {
  mask: Uint8Array; // one byte per pixel, row-major, same size as the base
  color: Rgb;
  alpha: number;
}

export const MARKER_RADIUS = 3;

function blend(data: Uint8ClampedArray, idx: number, color: Rgb, alpha: number): void {
  data[idx] = (1 - alpha) * data[idx] + alpha * color[0];
  data[idx + 1] = (1 - alpha) * data[idx + 1] + alpha * color[1];
  data[idx + 2] = (1 - alpha) * data[idx + 2] + alpha * color[2];
  data[idx + 3] = 255;
}

function stamp(frame: RawImage, x: number, y: number, color: Rgb): void {
  // diamond marker of MARKER_RADIUS; alpha 1 so tests can assert exact color
  for (let dy = -MARKER_RADIUS; dy <= MARKER_RADIUS; dy++) {
    for (let dx = -MARKER_RADIUS; dx <= MARKER_RADIUS; dx++) {
      if (Math.abs(dx) + Math.abs(dy) > MARKER_RADIUS) continue;
      const px = x + dx;
      const py = y + dy;
      if (px < 0 || py < 0 || px >= frame.width || py >= frame.height) continue;
      blend(frame.data, 4 * (py * frame.width + px), color, 1.0);
    }
  }
}

function drawBox(frame: RawImage, box: BoxPayload): void {
  const x0 = Math.max(0, Math.min(box.x_min, frame.width - 1));
  const x1 = Math.max(0, Math.min(box.x_max, frame.width - 1));
  const y0 = Math.max(0, Math.min(box.y_min, frame.height - 1));
  const y1 = Math.max(0, Math.min(box.y_max, frame.height - 1));
  for (let x = x0; x <= x1; x++) {
    blend(frame.data, 4 * (y0 * frame.width + x), BOX_COLOR, 1.0);
    blend(frame.data, 4 * (y1 * frame.width + x), BOX_COLOR, 1.0);
  }
  for (let y = y0; y <= y1; y++) {
    blend(frame.data, 4 * (y * frame.width + x0), BOX_COLOR, 1.0);
    blend(frame.data, 4 * (y * frame.width + x1), BOX_COLOR, 1.0);
  }
}

/**
 * Compose base image, mask overlays, pending prompt markers and box
 * into a fresh RGBA frame. The base image is never mutated.
 */
export function composeFrame(
  base: RawImage,
  layers: MaskLayer[],
  points: PromptPoint[],
  box: BoxPayload | null,
): RawImage {
  const frame: RawImage = {
    width: base.width,
    height: base.height,
    data: new Uint8ClampedArray(base.data),
  };
  for (const layer of layers) {
    if (layer.mask.length !== frame.width * frame.height) {
      throw new Error("mask layer size does not match the image");
    }
    for (let i = 0; i < layer.mask.length; i++) {
      if (layer.mask[i]) blend(frame.data, 4 * i, layer.color, layer.alpha);
    }
  }
  if (box) drawBox(frame, box);
  for (const p of points) {
    stamp(frame, p.x, p.y, p.label === 0 ? BACKGROUND_MARKER : FOREGROUND_MARKER);
  }
  return frame;
}

/** Read one pixel of a frame as [r, g, b, a]; handy in tests. */
export function pixelAt(frame: RawImage, x: number, y: number): [number, number, number, number] {
  const i = 4 * (y * frame.width + x);
  return [frame.data[i], frame.data[i + 1], frame.data[i + 2], frame.data[i + 3]];
}
