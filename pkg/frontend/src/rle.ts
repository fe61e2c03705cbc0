import type { RlePayload } from "./types.js";

/** Decode a run-length payload to one byte per pixel (0 or 1), row-major. */
export function decodeRle(payload: RlePayload): Uint8Array {
  const { width, height, counts } = payload;
  const total = counts.reduce((a, b) => a + b, 0);
  if (total !== width * height) {
    throw new Error(`run lengths sum to ${total}, expected ${width * height}`);
  }
  const out = new Uint8Array(width * height);
  let pos = 0;
  let value = 0;
  for (const count of counts) {
    if (count < 0) throw new Error("run lengths must be non-negative");
    if (value) out.fill(1, pos, pos + count);
    pos += count;
    value ^= 1;
  }
  return out;
}

/** Inverse of decodeRle; used by tests and the in-memory dev service. */
export function encodeRle(mask: Uint8Array, width: number, height: number): RlePayload {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} != ${width * height}`);
  }
  const counts: number[] = [];
  let value = 0;
  let run = 0;
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 1 : 0;
    if (v === value) {
      run++;
    } else {
      counts.push(run);
      value = v;
      run = 1;
    }
  }
  counts.push(run);
  return { width, height, counts };
}
