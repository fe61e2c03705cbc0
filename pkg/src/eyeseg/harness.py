"""Experiment runner: sweep (image, feature, strategy) cells and record scores.

Every cell gets its own seed derived by hashing (global seed, image id,
feature, strategy name), so results do not depend on evaluation order
and reruns with the same config are byte-identical. Backend failures
become failed records rather than aborting a long sweep.
"""

from __future__ import annotations

import csv
import hashlib
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .backends import (
    PredictionSet,
    SegmenterBackend,
    build_backend,
    combine_predictions,
)
from .datasets import FEATURES, DatasetItem, DatasetManifest, feature_mask, load_dataset
from .errors import NoDataError
from .masks import make_rng
from .metrics import dice, mean_iou, metric_triple
from .prompts import StrategySpec, build_prompts, strategy_catalog

RECORDS_FILENAME = "records.csv"
SUMMARY_FILENAME = "summary.json"

_METRIC_NAMES = ("dice", "iou", "hausdorff")


@dataclass(frozen=True)
class EvalRecord:
    """One measured (image, feature, strategy) cell."""

    dataset: str
    image_id: str
    feature: str
    strategy: str
    perturbation: float
    seed: int
    dice: Optional[float]
    iou: Optional[float]
    hausdorff: Optional[float]
    skipped: bool
    skip_reason: str
    degenerate: bool
    backend: str

    FIELDS = (
        "dataset", "image_id", "feature", "strategy", "perturbation", "seed",
        "dice", "iou", "hausdorff", "skipped", "skip_reason", "degenerate",
        "backend",
    )

    def __post_init__(self):
        metrics_absent = self.dice is None and self.iou is None and self.hausdorff is None
        if self.skipped and not metrics_absent:
            raise ValueError("skipped records carry no metric values")
        if not self.skipped and metrics_absent:
            raise ValueError("scored records carry all metric values")

    def to_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            return repr(v) if isinstance(v, float) else str(v)

        return [fmt(getattr(self, f)) for f in self.FIELDS]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "EvalRecord":
        def opt_float(v):
            return float(v) if v else None

        return cls(
            dataset=row["dataset"],
            image_id=row["image_id"],
            feature=row["feature"],
            strategy=row["strategy"],
            perturbation=float(row["perturbation"]),
            seed=int(row["seed"]),
            dice=opt_float(row["dice"]),
            iou=opt_float(row["iou"]),
            hausdorff=opt_float(row["hausdorff"]),
            skipped=row["skipped"] == "true",
            skip_reason=row["skip_reason"],
            degenerate=row["degenerate"] == "true",
            backend=row["backend"],
        )


def derive_seed(global_seed: int, *parts: object) -> int:
    """Stable 63-bit per-cell seed from the global seed and cell identity."""
    h = hashlib.sha256()
    h.update(str(int(global_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big") & (2**63 - 1)


def match_best_mask(candidates: PredictionSet, gt: np.ndarray) -> np.ndarray:
    """Candidate with maximal Dice against ``gt``; ties break to lowest index."""
    scores = [dice(m, gt) for m in candidates.masks]
    return candidates.masks[int(np.argmax(scores))]


def _prime(backend: SegmenterBackend, labels: np.ndarray, feature: str) -> None:
    # ground-truth side channel for the oracle backend; real backends
    # have no prime() and never see labels
    prime = getattr(backend, "prime", None)
    if prime is not None:
        prime(labels, feature)


def evaluate_item(
    item: DatasetItem,
    feature: str,
    strategy: StrategySpec,
    backend: SegmenterBackend,
    seed: int,
    multimask_policy: str = "best",
    dataset_name: str = "",
) -> EvalRecord:
    """Score one cell; failures come back as records, not exceptions."""

    def record(**kw) -> EvalRecord:
        base = dict(
            dataset=dataset_name,
            image_id=item.id,
            feature=feature,
            strategy=strategy.name,
            perturbation=strategy.box_perturbation,
            seed=seed,
            dice=None,
            iou=None,
            hausdorff=None,
            skipped=False,
            skip_reason="",
            degenerate=False,
            backend=backend.identity,
        )
        base.update(kw)
        return EvalRecord(**base)

    try:
        rng = make_rng(seed)
        labels = item.load_labels()
        gt = feature_mask(labels, feature)
        if strategy.kind == "E":
            if not gt.any():
                return record(skipped=True, skip_reason="feature_absent")
            image = item.load_image()
            _prime(backend, labels, feature)
            preds = backend.segment_everything(image)
            pred = match_best_mask(preds, gt)
        else:
            outcome = build_prompts(strategy, feature, labels, rng)
            if outcome.skipped:
                return record(skipped=True, skip_reason=outcome.skip_reason)
            image = item.load_image()
            _prime(backend, labels, feature)
            handle = backend.embed(image)
            preds = backend.predict(handle, outcome.prompt_set)
            pred = combine_predictions(preds, multimask_policy)
        triple = metric_triple(pred, gt)
        return record(
            dice=triple.dice,
            iou=triple.iou,
            hausdorff=triple.hausdorff,
            degenerate=bool(not pred.any() or not gt.any()),
        )
    except Exception as exc:  # long sweeps must survive single bad cells
        return record(skipped=True, skip_reason=f"error:{type(exc).__name__}: {exc}")


@dataclass
class ExperimentConfig:
    """Everything a sweep needs; ``seed`` has no default on purpose."""

    dataset_root: Path
    seed: int
    out_dir: Path
    dataset_layout: str = "generic-folder"
    dataset_name: Optional[str] = None
    backend: dict = field(default_factory=lambda: {"name": "oracle"})
    strategies: list[StrategySpec] = field(default_factory=strategy_catalog)
    features: Sequence[str] = FEATURES
    workers: int = 1
    multimask_policy: str = "best"

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("config needs at least one strategy")
        if not self.features:
            raise ValueError("config needs at least one feature")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.dataset_root = Path(self.dataset_root)
        self.out_dir = Path(self.out_dir)

    def to_json_dict(self) -> dict:
        return {
            "dataset": {
                "root": str(self.dataset_root),
                "layout": self.dataset_layout,
                "name": self.dataset_name,
            },
            "backend": self.backend,
            "strategies": [s.name for s in self.strategies],
            "features": list(self.features),
            "seed": self.seed,
            "workers": self.workers,
            "multimask_policy": self.multimask_policy,
            "out_dir": str(self.out_dir),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        ds = data.get("dataset", {})
        return cls(
            dataset_root=Path(ds["root"]),
            dataset_layout=ds.get("layout", "generic-folder"),
            dataset_name=ds.get("name"),
            backend=data.get("backend", {"name": "oracle"}),
            strategies=[StrategySpec.parse(s) for s in data["strategies"]]
            if "strategies" in data
            else strategy_catalog(),
            features=tuple(data.get("features", FEATURES)),
            seed=data["seed"],
            workers=data.get("workers", 1),
            multimask_policy=data.get("multimask_policy", "best"),
            out_dir=Path(data["out_dir"]),
        )


def _evaluate_one_image(
    item: DatasetItem,
    config: ExperimentConfig,
    backend: SegmenterBackend,
    dataset_name: str,
) -> list[EvalRecord]:
    records = []
    for feature in config.features:
        for strategy in config.strategies:
            seed = derive_seed(config.seed, item.id, feature, strategy.name)
            records.append(
                evaluate_item(
                    item,
                    feature,
                    strategy,
                    backend,
                    seed=seed,
                    multimask_policy=config.multimask_policy,
                    dataset_name=dataset_name,
                )
            )
    return records


def run_experiment(
    config: ExperimentConfig,
    manifest: Optional[DatasetManifest] = None,
    backend_factory: Optional[Callable[[], SegmenterBackend]] = None,
) -> Path:
    """Run the full sweep and write ``records.csv`` + ``summary.json``.

    Records are sorted by (image id, feature, strategy) before writing,
    so output bytes do not depend on worker scheduling.
    """
    if manifest is None:
        manifest = load_dataset(
            config.dataset_root, config.dataset_layout, name=config.dataset_name
        )
    dataset_name = config.dataset_name or manifest.name
    items = manifest.labeled_items()
    if not items:
        raise NoDataError(f"dataset {dataset_name} has no labeled items")
    factory = backend_factory or (lambda: build_backend(config.backend))

    if config.workers == 1:
        backend = factory()
        nested = [_evaluate_one_image(it, config, backend, dataset_name) for it in items]
    else:
        local = threading.local()

        def job(item: DatasetItem) -> list[EvalRecord]:
            if not hasattr(local, "backend"):
                local.backend = factory()
            return _evaluate_one_image(item, config, local.backend, dataset_name)

        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            nested = list(pool.map(job, items))

    records = [r for group in nested for r in group]
    records.sort(key=lambda r: (r.image_id, r.feature, r.strategy))

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    save_records(records, out_dir / RECORDS_FILENAME)
    summary = summarize(records, features=config.features)
    summary["config"] = config.to_json_dict()
    with open(out_dir / SUMMARY_FILENAME, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return out_dir


def save_records(records: Sequence[EvalRecord], path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(EvalRecord.FIELDS)
        for r in records:
            writer.writerow(r.to_row())
    return path


def load_records(path: Path) -> list[EvalRecord]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [EvalRecord.from_row(row) for row in csv.DictReader(f)]


def _stats(values: list[float]) -> Optional[dict]:
    if not values:
        return None
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "std": float(arr.std()),
    }


def summarize(records: Sequence[EvalRecord], features: Sequence[str] = FEATURES) -> dict:
    """Aggregate records per (feature, strategy); pure function of records."""
    cells: dict[str, dict[str, dict]] = {}
    n_errors = 0
    for r in records:
        if r.skipped and r.skip_reason.startswith("error:"):
            n_errors += 1
        cell = cells.setdefault(r.feature, {}).setdefault(
            r.strategy,
            {"n": 0, "n_scored": 0, "n_skipped": 0, "n_degenerate": 0,
             "skip_reasons": {}, "values": {m: [] for m in _METRIC_NAMES}},
        )
        cell["n"] += 1
        if r.skipped:
            cell["n_skipped"] += 1
            reasons = cell["skip_reasons"]
            reasons[r.skip_reason] = reasons.get(r.skip_reason, 0) + 1
        else:
            cell["n_scored"] += 1
            cell["n_degenerate"] += int(r.degenerate)
            for m in _METRIC_NAMES:
                cell["values"][m].append(getattr(r, m))

    for by_strategy in cells.values():
        for cell in by_strategy.values():
            values = cell.pop("values")
            for m in _METRIC_NAMES:
                cell[m] = _stats(values[m])

    strategies = sorted({r.strategy for r in records})
    miou_by_strategy = {}
    for strat in strategies:
        subset = [r for r in records if r.strategy == strat]
        try:
            miou_by_strategy[strat] = mean_iou(subset, features)
        except NoDataError:
            miou_by_strategy[strat] = None

    return {
        "n_records": len(records),
        "n_errors": n_errors,
        "cells": cells,
        "mean_iou_by_strategy": miou_by_strategy,
    }
