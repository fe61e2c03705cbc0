import type { FeatureClass } from "./types.js";

export type Rgb = readonly [number, number, number];

// marker conventions: green = foreground point, red = background point,
// light blue = box prompt
export const FOREGROUND_MARKER: Rgb = [0, 255, 0];
export const BACKGROUND_MARKER: Rgb = [255, 40, 40];
export const BOX_COLOR: Rgb = [120, 200, 255];

// one distinct overlay color per class
export const CLASS_COLORS: Record<FeatureClass, Rgb> = {
  pupil: [255, 159, 28],
  iris: [155, 93, 229],
  sclera: [0, 245, 212],
};

export const OVERLAY_ALPHA = 0.45;
