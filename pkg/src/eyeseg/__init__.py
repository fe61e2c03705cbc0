"""Prompt-driven eye-feature segmentation: geometry, metrics, benchmark, annotation.

The package is organized as small composable layers:

* :mod:`eyeseg.masks` - binary-mask and box geometry, seeded sampling
* :mod:`eyeseg.metrics` - Dice, IoU, boundary Hausdorff, mean IoU
* :mod:`eyeseg.datasets` - eye-dataset ingestion (label maps, manifests)
* :mod:`eyeseg.prompts` - prompt strategies synthesized from ground truth
* :mod:`eyeseg.backends` - segmenter contract, oracle and mock backends
* :mod:`eyeseg.sam_backend` - optional Segment Anything backend
* :mod:`eyeseg.harness` - the (image, feature, strategy) sweep runner
* :mod:`eyeseg.reporting` - tables, plots and qualitative overlays
* :mod:`eyeseg.service` - HTTP annotation service
* :mod:`eyeseg.synthetic` - deterministic synthetic eyes for tests/demos
"""

from .backends import (
    MockBackend,
    OracleBackend,
    PredictionSet,
    SegmenterBackend,
    build_backend,
    combine_predictions,
    select_prompted_mask,
)
from .datasets import (
    CLASS_CODES,
    FEATURES,
    DatasetItem,
    DatasetManifest,
    feature_mask,
    load_dataset,
)
from .harness import (
    EvalRecord,
    ExperimentConfig,
    derive_seed,
    evaluate_item,
    match_best_mask,
    run_experiment,
)
from .masks import (
    BACKGROUND,
    FOREGROUND,
    Box,
    Point,
    bounding_box,
    boundary_pixels,
    make_rng,
    perturb_box,
    sample_points_in_mask,
    sample_points_outside_mask_in_box,
    scale_box,
)
from .metrics import MetricTriple, dice, hausdorff, iou, mean_iou, metric_triple
from .prompts import (
    PromptOutcome,
    PromptSet,
    StrategySpec,
    build_prompts,
    strategy_catalog,
)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND",
    "Box",
    "CLASS_CODES",
    "DatasetItem",
    "DatasetManifest",
    "EvalRecord",
    "ExperimentConfig",
    "FEATURES",
    "FOREGROUND",
    "MetricTriple",
    "MockBackend",
    "OracleBackend",
    "Point",
    "PredictionSet",
    "PromptOutcome",
    "PromptSet",
    "SegmenterBackend",
    "StrategySpec",
    "boundary_pixels",
    "bounding_box",
    "build_backend",
    "build_prompts",
    "combine_predictions",
    "derive_seed",
    "dice",
    "evaluate_item",
    "feature_mask",
    "hausdorff",
    "iou",
    "load_dataset",
    "make_rng",
    "match_best_mask",
    "mean_iou",
    "metric_triple",
    "perturb_box",
    "run_experiment",
    "sample_points_in_mask",
    "sample_points_outside_mask_in_box",
    "scale_box",
    "select_prompted_mask",
    "strategy_catalog",
]
