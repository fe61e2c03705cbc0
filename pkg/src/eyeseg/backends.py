"""Backend-neutral segmenter contract plus deterministic test backends.

A backend turns (image, prompts) into candidate masks with quality
scores. All backends are deterministic in evaluation mode: identical
inputs produce identical outputs. Masks returned by ``predict`` and
``segment_everything`` always have the source image's resolution, no
matter what the backend does internally.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datasets import CLASS_CODES, FEATURES, feature_mask, validate_label_map
from .errors import (
    CapabilityError,
    DecodeError,
    EmptyPromptError,
    InvalidHandleError,
)
from .masks import Box, as_mask
from .prompts import PromptSet


def to_rgb_uint8(image: np.ndarray) -> np.ndarray:
    """Normalize to three channels, intensity range [0, 255], uint8.

    Grayscale input is replicated into three identical channels.
    """
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.stack([arr, arr, arr], axis=-1)
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise DecodeError(f"expected HxW or HxWx{{1,3}} image, got shape {arr.shape}")
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    if arr.dtype != np.uint8:
        arr = np.clip(arr, 0, 255).astype(np.uint8)
    return arr


def image_digest(image: np.ndarray) -> str:
    """Content digest of a decoded image, used to key embedding caches."""
    arr = np.ascontiguousarray(np.asarray(image))
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(str(arr.dtype).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class EmbeddingHandle:
    """Opaque token for one image's cached encoder state."""

    backend_id: str
    digest: str
    width: int
    height: int


@dataclass(frozen=True)
class PredictionSet:
    """Candidate masks with predicted quality scores, parallel lists."""

    masks: tuple[np.ndarray, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.masks) != len(self.scores):
            raise ValueError("masks and scores must be the same length")
        if not self.masks:
            raise ValueError("a PredictionSet holds at least one mask")
        shape = self.masks[0].shape
        if any(m.shape != shape for m in self.masks):
            raise ValueError("all masks in a PredictionSet share one shape")

    def __len__(self) -> int:
        return len(self.masks)


def select_prompted_mask(preds: PredictionSet) -> np.ndarray:
    """Mask with the highest predicted score; ties break to lowest index."""
    return preds.masks[int(np.argmax(preds.scores))]


def average_mask(preds: PredictionSet) -> np.ndarray:
    """Single mask averaged over all candidates (pixel mean >= 0.5)."""
    stack = np.stack([as_mask(m) for m in preds.masks]).astype(float)
    return stack.mean(axis=0) >= 0.5


MULTIMASK_POLICIES = ("best", "average")


def combine_predictions(preds: PredictionSet, policy: str = "best") -> np.ndarray:
    """Reduce a multimask output to one mask per the configured policy."""
    if policy == "best":
        return select_prompted_mask(preds)
    if policy == "average":
        return average_mask(preds)
    raise ValueError(f"unknown multimask policy {policy!r}")


class SegmenterBackend(ABC):
    """Contract every segmenter implementation fulfils."""

    name: str = "backend"
    version: str = "0"
    supports_everything_mode: bool = False
    supports_multimask: bool = False

    @property
    def identity(self) -> str:
        return f"{self.name}:{self.version}"

    @abstractmethod
    def embed(self, image: np.ndarray) -> EmbeddingHandle:
        """Prepare an image for repeated prompting; reusable across calls."""

    @abstractmethod
    def predict(self, handle: EmbeddingHandle, prompts: PromptSet) -> PredictionSet:
        """Segment whatever the prompts indicate. Prompts must be nonempty."""

    def segment_everything(self, image: np.ndarray) -> PredictionSet:
        """All discovered region masks; only when the capability flag is set."""
        raise CapabilityError(f"{self.identity} does not support everything mode")

    def _handle_for(self, image: np.ndarray) -> EmbeddingHandle:
        arr = to_rgb_uint8(image)
        h, w = arr.shape[:2]
        return EmbeddingHandle(
            backend_id=self.identity, digest=image_digest(image), width=w, height=h
        )

    def _check(self, handle: EmbeddingHandle, prompts: PromptSet) -> None:
        if handle.backend_id != self.identity:
            raise InvalidHandleError(
                f"handle from {handle.backend_id} used with {self.identity}"
            )
        if prompts.empty:
            raise EmptyPromptError("predict() needs at least one point or a box")


class OracleBackend(SegmenterBackend):
    """Test oracle that answers with the ground-truth mask.

    The harness primes it with the current item's label map (and the
    feature under evaluation) before each call; the oracle then returns
    that feature's ground-truth mask with score 1.0, closing the
    evaluation loop exactly. Outside a harness, call :meth:`prime`
    yourself before ``predict`` / ``segment_everything``.
    """

    name = "oracle"
    version = "1"
    supports_everything_mode = True

    def __init__(self):
        self._labels: Optional[np.ndarray] = None
        self._feature: Optional[str] = None

    def prime(self, labels: np.ndarray, feature: Optional[str] = None) -> None:
        self._labels = validate_label_map(labels)
        self._feature = feature

    def embed(self, image: np.ndarray) -> EmbeddingHandle:
        return self._handle_for(image)

    def _primed_labels(self, shape: tuple[int, int]) -> np.ndarray:
        if self._labels is None:
            raise InvalidHandleError("oracle backend was not primed with labels")
        if self._labels.shape != shape:
            raise InvalidHandleError(
                f"primed labels {self._labels.shape} do not match image {shape}"
            )
        return self._labels

    def predict(self, handle: EmbeddingHandle, prompts: PromptSet) -> PredictionSet:
        self._check(handle, prompts)
        labels = self._primed_labels((handle.height, handle.width))
        feature = self._feature or self._infer_feature(labels, prompts)
        if feature is None:
            empty = np.zeros(labels.shape, dtype=bool)
            return PredictionSet(masks=(empty,), scores=(0.0,))
        return PredictionSet(masks=(feature_mask(labels, feature),), scores=(1.0,))

    @staticmethod
    def _infer_feature(labels: np.ndarray, prompts: PromptSet) -> Optional[str]:
        # class codes partition the image, so foreground points pin down
        # exactly one feature; box-only prompts fall back to box overlap
        fg = prompts.foreground_points()
        if fg:
            for feature in FEATURES:
                m = feature_mask(labels, feature)
                if all(m[p.y, p.x] for p in fg):
                    return feature
            return None
        if prompts.box is not None:
            return _best_box_feature(labels, prompts.box)
        return None

    def segment_everything(self, image: np.ndarray) -> PredictionSet:
        labels = self._primed_labels(np.asarray(image).shape[:2])
        masks = [
            feature_mask(labels, f)
            for f in sorted(FEATURES, key=CLASS_CODES.get)
            if feature_mask(labels, f).any()
        ]
        if not masks:
            masks = [np.zeros(labels.shape, dtype=bool)]
            return PredictionSet(masks=tuple(masks), scores=(0.0,))
        return PredictionSet(masks=tuple(masks), scores=tuple(1.0 for _ in masks))


def _box_iou(a: Box, b: Box) -> float:
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min) + 1
    inter = max(ix, 0) * max(iy, 0)
    union = a.area + b.area - inter
    return inter / union if union else 0.0


def _best_box_feature(labels: np.ndarray, box: Box) -> Optional[str]:
    from .masks import bounding_box  # local import to avoid cycle at module load

    best, best_iou = None, 0.0
    for feature in FEATURES:
        m = feature_mask(labels, feature)
        if not m.any():
            continue
        overlap = _box_iou(bounding_box(m), box)
        if overlap > best_iou:
            best, best_iou = feature, overlap
    return best


class MockBackend(SegmenterBackend):
    """Deterministic geometric backend for tests and frontend dev mode.

    ``predict`` draws a filled disk of ``radius`` around the first
    foreground point; with no foreground points it fills the prompt box.
    ``segment_everything`` tiles the image into a fixed ``grid`` of
    rectangles with deterministically decreasing scores.
    """

    name = "mock"
    version = "1"
    supports_everything_mode = True

    def __init__(self, radius: int = 12, grid: tuple[int, int] = (4, 4)):
        self.radius = radius
        self.grid = tuple(grid)

    def embed(self, image: np.ndarray) -> EmbeddingHandle:
        return self._handle_for(image)

    def predict(self, handle: EmbeddingHandle, prompts: PromptSet) -> PredictionSet:
        self._check(handle, prompts)
        h, w = handle.height, handle.width
        mask = np.zeros((h, w), dtype=bool)
        fg = prompts.foreground_points()
        if fg:
            cx, cy = fg[0].x, fg[0].y
            yy, xx = np.ogrid[:h, :w]
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= self.radius**2
        elif prompts.box is not None:
            b = prompts.box.clamped((w, h))
            mask[b.y_min : b.y_max + 1, b.x_min : b.x_max + 1] = True
        return PredictionSet(masks=(mask,), scores=(0.75,))

    def segment_everything(self, image: np.ndarray) -> PredictionSet:
        arr = to_rgb_uint8(image)
        h, w = arr.shape[:2]
        rows, cols = self.grid
        ys = np.linspace(0, h, rows + 1).astype(int)
        xs = np.linspace(0, w, cols + 1).astype(int)
        masks, scores = [], []
        n = rows * cols
        for r in range(rows):
            for c in range(cols):
                m = np.zeros((h, w), dtype=bool)
                m[ys[r] : ys[r + 1], xs[c] : xs[c + 1]] = True
                masks.append(m)
                scores.append(1.0 - (r * cols + c) / n)
        return PredictionSet(masks=tuple(masks), scores=tuple(scores))


def build_backend(spec: dict) -> SegmenterBackend:
    """Construct a backend from a config mapping, e.g. ``{"name": "mock"}``.

    Known names: ``oracle``, ``mock`` (options ``radius``, ``grid``) and
    ``sam`` (options ``checkpoint``, ``variant``, ``device``).
    """
    spec = dict(spec)
    kind = spec.pop("name", None)
    if kind == "oracle":
        return OracleBackend()
    if kind == "mock":
        return MockBackend(**spec)
    if kind == "sam":
        from .sam_backend import SamBackend

        return SamBackend(**spec)
    raise ValueError(f"unknown backend name {kind!r}")
