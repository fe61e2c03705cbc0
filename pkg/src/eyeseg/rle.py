"""Run-length wire encoding for binary masks.

A mask travels as ``{"width": w, "height": h, "counts": [...]}`` where
``counts`` are run lengths of the row-major flattened mask, alternating
background/foreground and always starting with background (a leading 0
when the first pixel is foreground). ``sum(counts) == width * height``.
"""

from __future__ import annotations

import numpy as np

from .masks import as_mask


def encode_mask(mask: np.ndarray) -> dict:
    m = as_mask(mask)
    h, w = m.shape
    flat = m.ravel()
    if flat.size == 0:
        return {"width": w, "height": h, "counts": []}
    changes = np.nonzero(np.diff(flat))[0] + 1
    boundaries = np.concatenate([[0], changes, [flat.size]])
    counts = np.diff(boundaries).tolist()
    if flat[0]:
        counts = [0] + counts
    return {"width": w, "height": h, "counts": [int(c) for c in counts]}


def decode_mask(payload: dict) -> np.ndarray:
    w, h = int(payload["width"]), int(payload["height"])
    counts = payload["counts"]
    total = sum(counts)
    if total != w * h:
        raise ValueError(f"run lengths sum to {total}, expected {w * h}")
    if any(c < 0 for c in counts):
        raise ValueError("run lengths must be non-negative")
    flat = np.zeros(w * h, dtype=bool)
    pos = 0
    value = False
    for count in counts:
        if value:
            flat[pos : pos + count] = True
        pos += count
        value = not value
    return flat.reshape(h, w)
