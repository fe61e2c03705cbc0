"""Overlap and boundary metrics for binary masks.

Dice and IoU are computed on pixel sets; the Hausdorff distance is
computed on mask boundaries (4-connected, pixel centers, Euclidean),
because it scores shape alignment rather than filled area.

Degenerate-input policy, applied consistently and flagged by callers:

* both masks empty: dice = iou = 1.0 (vacuous agreement), hausdorff = 0.0
* exactly one mask empty: hausdorff = image diagonal (sentinel)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoDataError, ShapeMismatchError
from .masks import as_mask, boundary_pixels


@dataclass(frozen=True)
class MetricTriple:
    """One scored comparison: overlap (dice, iou) and alignment (hausdorff)."""

    dice: float
    iou: float
    hausdorff: float


def _paired(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ma, mb = as_mask(a), as_mask(b)
    if ma.shape != mb.shape:
        raise ShapeMismatchError(f"mask shapes differ: {ma.shape} vs {mb.shape}")
    return ma, mb


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """2|A∩B| / (|A| + |B|); 1.0 when both masks are empty."""
    ma, mb = _paired(a, b)
    na, nb = int(ma.sum()), int(mb.sum())
    if na + nb == 0:
        return 1.0
    inter = int((ma & mb).sum())
    return 2.0 * inter / (na + nb)


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """|A∩B| / |A∪B|; 1.0 when both masks are empty."""
    ma, mb = _paired(a, b)
    union = int((ma | mb).sum())
    if union == 0:
        return 1.0
    inter = int((ma & mb).sum())
    return inter / union


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between mask boundaries, in pixels.

    max(h(A,B), h(B,A)) where h is the directed farthest
    nearest-boundary-point Euclidean distance. Empty-input policy:
    both empty -> 0.0; one empty -> image diagonal sentinel.
    """
    ma, mb = _paired(a, b)
    ea, eb = not ma.any(), not mb.any()
    if ea and eb:
        return 0.0
    if ea or eb:
        h, w = ma.shape
        return math.hypot(w, h)
    pa = boundary_pixels(ma).astype(float)
    pb = boundary_pixels(mb).astype(float)
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


def metric_triple(a: np.ndarray, b: np.ndarray) -> MetricTriple:
    """All three metrics for one mask pair."""
    return MetricTriple(dice=dice(a, b), iou=iou(a, b), hausdorff=hausdorff(a, b))


def mean_iou(records: Iterable, features: Sequence[str]) -> float:
    """Unweighted mean of per-feature mean IoU over the selected features.

    ``records`` is any iterable of objects with ``feature``, ``iou`` and
    ``skipped`` attributes (skipped records are ignored). Features with
    no usable records do not contribute to the mean.

    Raises:
        NoDataError: no records survive the filtering.
    """
    per_feature: dict[str, list[float]] = {f: [] for f in features}
    for r in records:
        if getattr(r, "skipped", False):
            continue
        if r.feature in per_feature:
            per_feature[r.feature].append(r.iou)
    means = [float(np.mean(v)) for v in per_feature.values() if v]
    if not means:
        raise NoDataError(f"no usable records for features {tuple(features)}")
    return float(np.mean(means))
