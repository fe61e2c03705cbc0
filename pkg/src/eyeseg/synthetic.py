"""Synthetic eye-like images with exact labels, for tests and demos.

Each frame nests the three features the way a real eye does: a pupil
disk inside an iris disk inside an elliptical eye opening (the visible
sclera region). Frames are deterministic functions of their seed.
Partially occluded eyes are simulated by dropping inner features, which
exercises the skip paths (feature absent, hole absent) downstream.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .datasets import CLASS_CODES
from .masks import make_rng

MODES = ("full", "no_pupil", "sclera_only")
_MODE_WEIGHTS = (0.70, 0.15, 0.15)

_INTENSITY = {"background": 40, "sclera": 190, "iris": 110, "pupil": 15}


def synthetic_labels(
    seed: int,
    width: int = 160,
    height: int = 100,
    mode: str | None = None,
) -> np.ndarray:
    """Label map of one synthetic eye; ``mode`` overrides the seeded mix."""
    rng = make_rng(seed)
    drawn_mode = MODES[rng.choice(len(MODES), p=_MODE_WEIGHTS)]
    if mode is None:
        mode = drawn_mode
    elif mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")

    cx = width / 2 + rng.uniform(-0.05, 0.05) * width
    cy = height / 2 + rng.uniform(-0.05, 0.05) * height
    rx = rng.uniform(0.32, 0.42) * width
    ry = rng.uniform(0.26, 0.34) * height
    iris_r = rng.uniform(0.20, 0.28) * height
    pupil_r = rng.uniform(0.35, 0.55) * iris_r
    icx = cx + rng.uniform(-0.04, 0.04) * width
    icy = cy + rng.uniform(-0.04, 0.04) * height

    yy, xx = np.mgrid[:height, :width]
    opening = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    iris = ((xx - icx) ** 2 + (yy - icy) ** 2 <= iris_r**2) & opening
    pupil = ((xx - icx) ** 2 + (yy - icy) ** 2 <= pupil_r**2) & opening

    labels = np.zeros((height, width), dtype=np.uint8)
    labels[opening] = CLASS_CODES["sclera"]
    if mode != "sclera_only":
        labels[iris] = CLASS_CODES["iris"]
        if mode != "no_pupil":
            labels[pupil] = CLASS_CODES["pupil"]
    return labels


def synthetic_image(labels: np.ndarray, seed: int) -> np.ndarray:
    """Grayscale rendering of a label map with seeded sensor noise."""
    rng = make_rng(seed)
    image = np.full(labels.shape, _INTENSITY["background"], dtype=float)
    for name, code in CLASS_CODES.items():
        if name != "background":
            image[labels == code] = _INTENSITY[name]
    image += rng.normal(0.0, 6.0, size=labels.shape)
    return np.clip(image, 0, 255).astype(np.uint8)


def synthetic_item(
    seed: int, width: int = 160, height: int = 100, mode: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(image, labels) pair for one seed."""
    labels = synthetic_labels(seed, width=width, height=height, mode=mode)
    return synthetic_image(labels, seed=seed + 1), labels


def write_synthetic_dataset(
    root: Path | str,
    count: int,
    seed: int = 0,
    width: int = 160,
    height: int = 100,
) -> Path:
    """Materialize ``count`` frames in the generic-folder layout.

    Images land in ``root/images/eye_<i>.png`` and labels as 8-bit
    single-channel images in ``root/labels/eye_<i>.png``.
    """
    root = Path(root)
    image_dir = root / "images"
    label_dir = root / "labels"
    image_dir.mkdir(parents=True, exist_ok=True)
    label_dir.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        image, labels = synthetic_item(seed + i, width=width, height=height)
        stem = f"eye_{i:04d}"
        Image.fromarray(image, mode="L").save(image_dir / f"{stem}.png")
        Image.fromarray(labels, mode="L").save(label_dir / f"{stem}.png")
    return root
