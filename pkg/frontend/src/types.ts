/** Wire types shared with the annotation service. */

export type FeatureClass = "pupil" | "iris" | "sclera";

export const FEATURE_CLASSES: FeatureClass[] = ["pupil", "iris", "sclera"];

/** 1 = foreground, 0 = background; matches the service convention. */
export interface PromptPoint {
  x: number;
  y: number;
  label: 0 | 1;
}

/** Inclusive pixel corners, top-left and bottom-right. */
export interface BoxPayload {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
}

/**
 * Row-major run lengths alternating background/foreground, starting
 * with background; sum(counts) === width * height.
 */
export interface RlePayload {
  width: number;
  height: number;
  counts: number[];
}

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
}

export interface PredictRequest {
  points: PromptPoint[];
  box?: BoxPayload | null;
  class: FeatureClass;
}

export interface PredictResponse {
  mask: RlePayload;
  score: number;
}

export interface ExportResponse {
  label_image_b64: string;
  provenance: unknown[];
  width: number;
  height: number;
}

/** Decoded RGBA pixels, independent of any canvas implementation. */
export interface RawImage {
  width: number;
  height: number;
  data: Uint8ClampedArray;
}
