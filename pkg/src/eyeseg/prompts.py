"""Prompt synthesis from ground-truth label maps.

Nine strategies are supported, identified by these canonical names
(used verbatim in configs, CSV output and CLI flags):

    E          everything mode, no prompts
    P1, P4     1 or 4 foreground points on the target mask
    P4_4       4 foreground points, plus 4 background points outside the
               mask but inside its tight bounding box doubled in size
    BBOX       tight bounding box (optionally perturbed, e.g. BBOX@0.05)
    BBOXP1, BBOXP4
               tight box plus 1 or 4 foreground points
    BBOXP1_1, BBOXP4_4
               tight box, k foreground points, and k negative points
               placed on the nested inner feature's mask (iris when
               segmenting sclera, pupil when segmenting iris); never
               applicable to the pupil

Skip rules: a strategy yields no prompts when the target feature is
absent from the image, when the required inner "hole" feature is absent
(BBOXP1_1/BBOXP4_4), or when the strategy does not apply to the feature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datasets import feature_mask, validate_label_map
from .masks import (
    BACKGROUND,
    Box,
    Point,
    bounding_box,
    perturb_box,
    sample_points_in_mask,
    sample_points_outside_mask_in_box,
    scale_box,
)

STRATEGY_KINDS = (
    "E",
    "P1",
    "P4",
    "P4_4",
    "BBOX",
    "BBOXP1",
    "BBOXP4",
    "BBOXP1_1",
    "BBOXP4_4",
)
_BOX_KINDS = frozenset(k for k in STRATEGY_KINDS if k.startswith("BBOX"))
_FOREGROUND_COUNT = {
    "E": 0, "P1": 1, "P4": 4, "P4_4": 4,
    "BBOX": 0, "BBOXP1": 1, "BBOXP4": 4, "BBOXP1_1": 1, "BBOXP4_4": 4,
}
_NEGATIVE_COUNT = {"P4_4": 4, "BBOXP1_1": 1, "BBOXP4_4": 4}

# nested anatomy: the feature whose mask provides negative "hole" points
INNER_FEATURE = {"sclera": "iris", "iris": "pupil"}

SKIP_FEATURE_ABSENT = "feature_absent"
SKIP_HOLE_ABSENT = "hole_absent"
SKIP_STRATEGY_INAPPLICABLE = "strategy_inapplicable"
SKIP_REASONS = (SKIP_FEATURE_ABSENT, SKIP_HOLE_ABSENT, SKIP_STRATEGY_INAPPLICABLE)

PERTURBATION_FRACTIONS = (0.05, 0.10, 0.20)


@dataclass(frozen=True)
class StrategySpec:
    """One prompting strategy, optionally with a box perturbation fraction."""

    kind: str
    box_perturbation: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if not 0.0 <= self.box_perturbation < 1.0:
            raise ValueError(f"box_perturbation must be in [0, 1), got {self.box_perturbation}")
        if self.box_perturbation > 0 and self.kind not in _BOX_KINDS:
            raise ValueError(f"{self.kind} has no box to perturb")

    @property
    def name(self) -> str:
        if self.box_perturbation > 0:
            return f"{self.kind}@{self.box_perturbation:g}"
        return self.kind

    @property
    def uses_box(self) -> bool:
        return self.kind in _BOX_KINDS

    @property
    def n_foreground(self) -> int:
        return _FOREGROUND_COUNT[self.kind]

    @property
    def n_negative(self) -> int:
        return _NEGATIVE_COUNT.get(self.kind, 0)

    @classmethod
    def parse(cls, name: str) -> "StrategySpec":
        """Parse a canonical name, e.g. ``"BBOXP4"`` or ``"BBOX@0.05"``."""
        kind, _, frac = name.partition("@")
        return cls(kind=kind, box_perturbation=float(frac) if frac else 0.0)


@dataclass(frozen=True)
class PromptSet:
    """The exact payload handed to a segmenter: points plus optional box."""

    points: tuple[Point, ...] = ()
    box: Optional[Box] = None

    @property
    def empty(self) -> bool:
        return not self.points and self.box is None

    def foreground_points(self) -> tuple[Point, ...]:
        return tuple(p for p in self.points if p.label != BACKGROUND)

    def background_points(self) -> tuple[Point, ...]:
        return tuple(p for p in self.points if p.label == BACKGROUND)


@dataclass(frozen=True)
class PromptOutcome:
    """Either a prompt set, or the reason the cell is skipped."""

    prompt_set: Optional[PromptSet] = None
    skip_reason: Optional[str] = None

    def __post_init__(self):
        if (self.prompt_set is None) == (self.skip_reason is None):
            raise ValueError("exactly one of prompt_set / skip_reason must be set")
        if self.skip_reason is not None and self.skip_reason not in SKIP_REASONS:
            raise ValueError(f"unknown skip reason {self.skip_reason!r}")

    @property
    def skipped(self) -> bool:
        return self.skip_reason is not None


def _skip(reason: str) -> PromptOutcome:
    return PromptOutcome(skip_reason=reason)


def build_prompts(
    strategy: StrategySpec,
    feature: str,
    labels: np.ndarray,
    rng: np.random.Generator,
) -> PromptOutcome:
    """Synthesize the strategy's prompts for one feature of one label map.

    Deterministic given (strategy, feature, labels, seed). Draw order:
    foreground points first, then negative points, then any box
    perturbation.
    """
    labels = validate_label_map(labels)
    if strategy.kind in ("BBOXP1_1", "BBOXP4_4") and feature == "pupil":
        return _skip(SKIP_STRATEGY_INAPPLICABLE)

    target = feature_mask(labels, feature)
    if not target.any():
        return _skip(SKIP_FEATURE_ABSENT)

    if strategy.kind == "E":
        return PromptOutcome(prompt_set=PromptSet())

    h, w = labels.shape
    bounds = (w, h)
    points: list[Point] = []
    if strategy.n_foreground:
        points.extend(sample_points_in_mask(target, strategy.n_foreground, rng))

    if strategy.kind == "P4_4":
        doubled = scale_box(bounding_box(target), 2.0, bounds)
        points.extend(
            sample_points_outside_mask_in_box(target, doubled, strategy.n_negative, rng)
        )
        return PromptOutcome(prompt_set=PromptSet(points=tuple(points)))

    if strategy.kind in ("P1", "P4"):
        return PromptOutcome(prompt_set=PromptSet(points=tuple(points)))

    if strategy.kind in ("BBOXP1_1", "BBOXP4_4"):
        inner = feature_mask(labels, INNER_FEATURE[feature])
        if not inner.any():
            return _skip(SKIP_HOLE_ABSENT)
        negatives = sample_points_in_mask(inner, strategy.n_negative, rng)
        points.extend(Point(p.x, p.y, BACKGROUND) for p in negatives)

    box = bounding_box(target)
    if strategy.box_perturbation > 0:
        box = perturb_box(box, strategy.box_perturbation, rng, bounds)
    return PromptOutcome(prompt_set=PromptSet(points=tuple(points), box=box))


def strategy_catalog() -> list[StrategySpec]:
    """The full benchmark grid: 9 base strategies plus perturbed boxes.

    Order is fixed: E, P1, P4, P4_4, BBOX, BBOXP1, BBOXP4, BBOXP1_1,
    BBOXP4_4, then BBOX at fractions 0.05, 0.10, 0.20.
    """
    catalog = [StrategySpec(kind=k) for k in STRATEGY_KINDS]
    catalog.extend(
        StrategySpec(kind="BBOX", box_perturbation=f) for f in PERTURBATION_FRACTIONS
    )
    return catalog
