"""Segment Anything backend (optional; needs the ``sam`` extra + a checkpoint).

Wraps the published ``segment_anything`` predictor behind the
:class:`~eyeseg.backends.SegmenterBackend` contract. The encoder runs
once per image (cached by content digest); each predict call reuses the
cached state. Grayscale inputs are replicated to three channels in the
[0, 255] range before encoding; the library resizes and pads to its
native 1024x1024 square internally and maps masks back to the original
resolution.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .backends import EmbeddingHandle, PredictionSet, SegmenterBackend, to_rgb_uint8
from .errors import CapabilityError
from .masks import BACKGROUND
from .prompts import PromptSet

VARIANTS = ("vit_b", "vit_l", "vit_h")
NATIVE_INPUT_SIZE = 1024


def _import_sam():
    try:
        from segment_anything import (  # type: ignore
            SamAutomaticMaskGenerator,
            SamPredictor,
            sam_model_registry,
        )
    except ImportError as exc:
        raise CapabilityError(
            "segment-anything is not installed; install the 'sam' extra "
            "and download a checkpoint to use this backend"
        ) from exc
    return sam_model_registry, SamPredictor, SamAutomaticMaskGenerator


class SamBackend(SegmenterBackend):
    """Real promptable segmenter loaded from an official checkpoint file."""

    name = "sam"
    supports_everything_mode = True
    supports_multimask = True

    def __init__(
        self,
        checkpoint: str,
        variant: str = "vit_b",
        device: str = "cpu",
        points_per_side: int = 32,
    ):
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        registry, predictor_cls, generator_cls = _import_sam()
        model = registry[variant](checkpoint=checkpoint)
        model.to(device=device)
        model.eval()
        self.version = variant
        self.points_per_side = points_per_side
        self._predictor = predictor_cls(model)
        self._generator = generator_cls(model, points_per_side=points_per_side)
        self._current_digest: Optional[str] = None

    def embed(self, image: np.ndarray) -> EmbeddingHandle:
        handle = self._handle_for(image)
        self._set_image(image, handle)
        return handle

    def _set_image(self, image: np.ndarray, handle: EmbeddingHandle) -> None:
        # the predictor holds one encoded image at a time; skip the
        # (expensive) encoder pass when the same image is already set
        if self._current_digest == handle.digest:
            return
        self._predictor.set_image(to_rgb_uint8(image))
        self._current_digest = handle.digest

    def predict(self, handle: EmbeddingHandle, prompts: PromptSet) -> PredictionSet:
        self._check(handle, prompts)
        if self._current_digest != handle.digest:
            raise RuntimeError(
                "embedding for this image is no longer resident; call embed() again"
            )
        coords = labels = box = None
        if prompts.points:
            coords = np.array([[p.x, p.y] for p in prompts.points], dtype=np.float32)
            labels = np.array(
                [0 if p.label == BACKGROUND else 1 for p in prompts.points],
                dtype=np.int32,
            )
        if prompts.box is not None:
            box = np.array(prompts.box.as_xyxy(), dtype=np.float32)
        masks, scores, _ = self._predictor.predict(
            point_coords=coords,
            point_labels=labels,
            box=box,
            multimask_output=True,
        )
        return PredictionSet(
            masks=tuple(m.astype(bool) for m in masks),
            scores=tuple(float(s) for s in scores),
        )

    def segment_everything(self, image: np.ndarray) -> PredictionSet:
        results = self._generator.generate(to_rgb_uint8(image))
        if not results:
            empty = np.zeros(np.asarray(image).shape[:2], dtype=bool)
            return PredictionSet(masks=(empty,), scores=(0.0,))
        return PredictionSet(
            masks=tuple(np.asarray(r["segmentation"], dtype=bool) for r in results),
            scores=tuple(float(r["predicted_iou"]) for r in results),
        )
