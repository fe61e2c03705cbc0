"""Pixel-grid geometry on binary masks and boxes.

Conventions used throughout the package:

* A binary mask is a boolean numpy array of shape ``(height, width)``;
  ``mask[y, x]`` is True where column ``x``, row ``y`` is foreground.
  The origin is the top-left pixel.
* Boxes store inclusive pixel coordinates for both corners, so a
  one-pixel box has ``x_min == x_max``.
* Randomness always flows through an explicit ``numpy.random.Generator``
  (PCG64, see :func:`make_rng`), so the same seed reproduces the same
  draws on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyMaskError,
    InvalidFactorError,
    InvalidFractionError,
    NoBackgroundError,
)

FOREGROUND = 1
BACKGROUND = 0


class Point(NamedTuple):
    """A labeled prompt point at pixel column ``x``, row ``y``."""

    x: int
    y: int
    label: int  # FOREGROUND or BACKGROUND


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with inclusive integer corners."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order: {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains(self, x: int, y: int) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def clamped(self, bounds: tuple[int, int]) -> "Box":
        """Clamp corners into an image of size ``(width, height)``."""
        w, h = bounds
        return Box(
            min(max(self.x_min, 0), w - 1),
            min(max(self.y_min, 0), h - 1),
            min(max(self.x_max, 0), w - 1),
            min(max(self.y_max, 0), h - 1),
        )

    def as_xyxy(self) -> tuple[int, int, int, int]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator (PCG64) for the given 64-bit seed."""
    return np.random.default_rng(seed)


def as_mask(mask: np.ndarray) -> np.ndarray:
    """Coerce to a 2-D boolean array without copying when already one."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    return arr if arr.dtype == bool else arr.astype(bool)


def bounding_box(mask: np.ndarray) -> Box:
    """Tight axis-aligned box around all foreground pixels.

    Raises:
        EmptyMaskError: the mask has no foreground.
    """
    m = as_mask(mask)
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        raise EmptyMaskError("cannot bound an empty mask")
    return Box(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


def _round_min(v: float) -> int:
    # ties round away from the center, i.e. down for the min edge
    return math.ceil(v - 0.5)


def _round_max(v: float) -> int:
    return math.floor(v + 0.5)


def scale_box(box: Box, factor: float, bounds: tuple[int, int]) -> Box:
    """Scale a box about its center, then clamp to image bounds.

    Each side's extent (``max - min``) is multiplied by ``factor`` while
    the center stays fixed; fractional corners round half away from the
    center so growth is symmetric.

    Raises:
        InvalidFactorError: ``factor <= 0``.
    """
    if factor <= 0:
        raise InvalidFactorError(f"scale factor must be > 0, got {factor}")
    cx = (box.x_min + box.x_max) / 2.0
    cy = (box.y_min + box.y_max) / 2.0
    half_w = (box.x_max - box.x_min) * factor / 2.0
    half_h = (box.y_max - box.y_min) * factor / 2.0
    scaled = Box(
        _round_min(cx - half_w),
        _round_min(cy - half_h),
        _round_max(cx + half_w),
        _round_max(cy + half_h),
    )
    return scaled.clamped(bounds)


def perturb_box(
    box: Box, fraction: float, rng: np.random.Generator, bounds: tuple[int, int]
) -> Box:
    """Displace each box edge independently by a bounded uniform draw.

    Each of the four edges moves by ``round(u)`` pixels where ``u`` is
    uniform in ``[-fraction * s, +fraction * s]`` and ``s`` is the side
    length along that edge's axis (box width for the x edges, height for
    the y edges). Edges are drawn in the order x_min, x_max, y_min,
    y_max. The result is re-ordered so min <= max and clamped to the
    image, which keeps it at least one pixel in each dimension.

    ``fraction == 0`` returns the input box unchanged (no draws consumed).

    Raises:
        InvalidFractionError: ``fraction`` outside ``[0, 1)``.
    """
    if not 0.0 <= fraction < 1.0:
        raise InvalidFractionError(f"fraction must be in [0, 1), got {fraction}")
    if fraction == 0.0:
        return box
    limits = np.array(
        [fraction * box.width, fraction * box.width,
         fraction * box.height, fraction * box.height]
    )
    deltas = np.rint(rng.uniform(-1.0, 1.0, size=4) * limits).astype(int)
    x0 = box.x_min + int(deltas[0])
    x1 = box.x_max + int(deltas[1])
    y0 = box.y_min + int(deltas[2])
    y1 = box.y_max + int(deltas[3])
    reordered = Box(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
    return reordered.clamped(bounds)


def sample_points_in_mask(
    mask: np.ndarray, n: int, rng: np.random.Generator
) -> list[Point]:
    """Draw ``n`` foreground points uniformly, with replacement.

    With-replacement sampling means masks smaller than ``n`` pixels are
    still valid inputs.

    Raises:
        EmptyMaskError: the mask has no foreground.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    m = as_mask(mask)
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        raise EmptyMaskError("cannot sample from an empty mask")
    idx = rng.integers(0, xs.size, size=n)
    return [Point(int(xs[i]), int(ys[i]), FOREGROUND) for i in idx]


def sample_points_outside_mask_in_box(
    mask: np.ndarray, box: Box, n: int, rng: np.random.Generator
) -> list[Point]:
    """Draw ``n`` background-labeled points inside ``box`` but off ``mask``.

    Uniform with replacement over the candidate set
    (pixels of ``box``) minus (foreground of ``mask``).

    Raises:
        NoBackgroundError: the box is fully covered by the mask.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    m = as_mask(mask)
    h, w = m.shape
    clipped = box.clamped((w, h))
    window = m[clipped.y_min : clipped.y_max + 1, clipped.x_min : clipped.x_max + 1]
    ys, xs = np.nonzero(~window)
    if xs.size == 0:
        raise NoBackgroundError("box contains no pixels outside the mask")
    idx = rng.integers(0, xs.size, size=n)
    return [
        Point(int(xs[i]) + clipped.x_min, int(ys[i]) + clipped.y_min, BACKGROUND)
        for i in idx
    ]


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with a 4-neighbor that is background or off-image.

    Returns an ``(n, 2)`` integer array of ``(x, y)`` coordinates in
    row-major scan order (no duplicates). An empty mask yields an empty
    array. 4-connectivity is used so boundary-based distances are
    reproducible bit-exactly.
    """
    m = as_mask(mask)
    if not m.any():
        return np.empty((0, 2), dtype=int)
    padded = np.pad(m, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1]
        & padded[2:, 1:-1]
        & padded[1:-1, :-2]
        & padded[1:-1, 2:]
    )
    ys, xs = np.nonzero(m & ~interior)
    return np.column_stack([xs, ys])
