import { describe, expect, it } from "vitest";

import { decodeRle, encodeRle } from "../src/rle.js";

describe("run-length codec", () => {
  it("decodes an all-background payload", () => {
    const mask = decodeRle({ width: 4, height: 3, counts: [12] });
    expect(mask).toHaveLength(12);
    expect(mask.every((v) => v === 0)).toBe(true);
  });

  it("starts with background: leading zero for foreground-first masks", () => {
    const payload = encodeRle(new Uint8Array([1, 1, 0, 0]), 2, 2);
    expect(payload.counts).toEqual([0, 2, 2]);
  });

  it("round-trips arbitrary masks", () => {
    for (let seed = 1; seed <= 50; seed++) {
      const w = 1 + (seed * 7) % 23;
      const h = 1 + (seed * 13) % 17;
      const mask = new Uint8Array(w * h);
      let s = seed;
      for (let i = 0; i < mask.length; i++) {
        s = (s * 1103515245 + 12345) & 0x7fffffff;
        mask[i] = s % 3 === 0 ? 1 : 0;
      }
      const back = decodeRle(encodeRle(mask, w, h));
      expect(back).toEqual(mask);
    }
  });

  it("rejects payloads whose runs do not cover the image", () => {
    expect(() => decodeRle({ width: 2, height: 2, counts: [3] })).toThrow(/sum/);
  });

  it("rejects negative runs", () => {
    expect(() => decodeRle({ width: 2, height: 2, counts: [5, -1] })).toThrow(/negative/);
  });
});
