"""Report emitters: perturbation table, strategy plots, qualitative overlays."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .backends import SegmenterBackend, combine_predictions, to_rgb_uint8
from .datasets import FEATURES, DatasetManifest, feature_mask
from .harness import (
    RECORDS_FILENAME,
    EvalRecord,
    derive_seed,
    load_records,
    match_best_mask,
    _prime,
)
from .masks import BACKGROUND, Box, boundary_pixels, make_rng
from .prompts import PromptSet, StrategySpec, build_prompts

_TABLE_METRICS = ("dice", "iou", "hausdorff")

# overlay palette: green/red point markers, light blue box, as in the
# annotation UI
_COLOR_PRED = np.array([0, 190, 80], dtype=float)
_COLOR_GT_EDGE = np.array([255, 220, 0], dtype=float)
_COLOR_FG_POINT = np.array([0, 255, 0], dtype=float)
_COLOR_BG_POINT = np.array([255, 40, 40], dtype=float)
_COLOR_BOX = np.array([120, 200, 255], dtype=float)


def perturbation_table(
    records: Sequence[EvalRecord], features: Sequence[str] = FEATURES
) -> dict:
    """Mean metric per (feature, perturbation fraction) for perturbed-box cells.

    Cells with no scored records are None; ``missing_cells`` counts them.
    """
    perturbed = [r for r in records if r.perturbation > 0]
    fractions = sorted({r.perturbation for r in perturbed})
    table: dict[str, dict] = {m: {} for m in _TABLE_METRICS}
    missing = 0
    for feature in features:
        for metric in _TABLE_METRICS:
            table[metric][feature] = {}
        for fraction in fractions:
            scored = [
                r
                for r in perturbed
                if r.feature == feature and r.perturbation == fraction and not r.skipped
            ]
            if not scored:
                missing += 1
            for metric in _TABLE_METRICS:
                value = (
                    float(np.mean([getattr(r, metric) for r in scored]))
                    if scored
                    else None
                )
                table[metric][feature][f"{fraction:g}"] = value
    return {
        "fractions": [f"{f:g}" for f in fractions],
        "features": list(features),
        "metrics": table,
        "missing_cells": missing,
    }


def write_perturbation_csv(table: dict, path: Path) -> Path:
    """Table-1-style layout: metric rows, feature x fraction columns."""
    headers = ["metric"] + [
        f"{feat}@{float(frac) * 100:g}%"
        for feat in table["features"]
        for frac in table["fractions"]
    ]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(headers)
        for metric in _TABLE_METRICS:
            row = [metric]
            for feat in table["features"]:
                for frac in table["fractions"]:
                    value = table["metrics"][metric][feat].get(frac)
                    row.append("" if value is None else f"{value:.4f}")
            writer.writerow(row)
        writer.writerow(["missing_cells", table["missing_cells"]])
    return path


def strategy_figures(
    records: Sequence[EvalRecord],
    out_dir: Path,
    features: Sequence[str] = FEATURES,
) -> list[Path]:
    """One figure per metric: per-feature value distributions by strategy.

    The best strategy in each panel (highest mean dice/iou, lowest mean
    hausdorff) is drawn in red.
    """
    base_records = [r for r in records if r.perturbation == 0 and not r.skipped]
    strategies = sorted({r.strategy for r in base_records})
    if not strategies:
        return []
    paths = []
    for metric in _TABLE_METRICS:
        fig, axes = plt.subplots(
            1, len(features), figsize=(4.2 * len(features), 3.6), squeeze=False
        )
        for ax, feature in zip(axes[0], features):
            groups = []
            for strat in strategies:
                vals = [
                    getattr(r, metric)
                    for r in base_records
                    if r.feature == feature and r.strategy == strat
                ]
                groups.append(vals)
            means = [np.mean(v) if v else np.nan for v in groups]
            if all(np.isnan(m) for m in means):
                best = None
            elif metric == "hausdorff":
                best = int(np.nanargmin(means))
            else:
                best = int(np.nanargmax(means))
            boxes = ax.boxplot(
                [v if v else [np.nan] for v in groups],
                tick_labels=strategies,
                patch_artist=True,
            )
            for i, patch in enumerate(boxes["boxes"]):
                patch.set_facecolor("tab:red" if i == best else "lightgray")
            ax.set_title(feature)
            ax.set_ylabel(metric)
            ax.tick_params(axis="x", rotation=60, labelsize=7)
        fig.tight_layout()
        path = out_dir / f"{metric}_by_strategy.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        paths.append(path)
    return paths


def emit_reports(
    results_dir: Path | str,
    out_dir: Optional[Path | str] = None,
    formats: Sequence[str] = ("csv", "json", "png"),
    features: Sequence[str] = FEATURES,
) -> list[Path]:
    """Render tables and plots from a results directory's records file."""
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir else results_dir / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    records = load_records(results_dir / RECORDS_FILENAME)

    written = []
    table = perturbation_table(records, features=features)
    if "csv" in formats:
        written.append(write_perturbation_csv(table, out_dir / "perturbation_table.csv"))
        written.append(_write_strategy_csv(records, features, out_dir / "strategy_summary.csv"))
    if "json" in formats:
        path = out_dir / "perturbation_table.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(table, f, indent=2, sort_keys=True)
            f.write("\n")
        written.append(path)
    if "png" in formats:
        written.extend(strategy_figures(records, out_dir, features=features))
    return written


def _write_strategy_csv(
    records: Sequence[EvalRecord], features: Sequence[str], path: Path
) -> Path:
    strategies = sorted({r.strategy for r in records})
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["feature", "strategy", "n", "n_scored", "n_skipped"]
            + [f"{m}_{s}" for m in _TABLE_METRICS for s in ("mean", "median", "std")]
        )
        for feature in features:
            for strat in strategies:
                subset = [r for r in records if r.feature == feature and r.strategy == strat]
                scored = [r for r in subset if not r.skipped]
                row = [feature, strat, len(subset), len(scored), len(subset) - len(scored)]
                for metric in _TABLE_METRICS:
                    vals = np.array([getattr(r, metric) for r in scored], dtype=float)
                    if vals.size:
                        row += [f"{vals.mean():.6f}", f"{np.median(vals):.6f}", f"{vals.std():.6f}"]
                    else:
                        row += ["", "", ""]
                writer.writerow(row)
    return path


def _stamp(canvas: np.ndarray, x: int, y: int, color: np.ndarray, size: int = 2) -> None:
    h, w = canvas.shape[:2]
    for dx in range(-size, size + 1):
        for dy in range(-size, size + 1):
            if abs(dx) + abs(dy) <= size and 0 <= x + dx < w and 0 <= y + dy < h:
                canvas[y + dy, x + dx] = color


def _draw_box(canvas: np.ndarray, box: Box, color: np.ndarray) -> None:
    h, w = canvas.shape[:2]
    b = box.clamped((w, h))
    canvas[b.y_min, b.x_min : b.x_max + 1] = color
    canvas[b.y_max, b.x_min : b.x_max + 1] = color
    canvas[b.y_min : b.y_max + 1, b.x_min] = color
    canvas[b.y_min : b.y_max + 1, b.x_max] = color


def render_overlay(
    image: np.ndarray,
    gt_mask: Optional[np.ndarray] = None,
    pred_mask: Optional[np.ndarray] = None,
    prompts: Optional[PromptSet] = None,
    alpha: float = 0.45,
) -> np.ndarray:
    """Compose prediction fill, ground-truth outline and prompt markers.

    Returns an RGB uint8 array: predicted mask blended in green, ground
    truth drawn as a yellow outline, foreground points as green diamonds,
    background points red, and any box as a light blue rectangle.
    """
    canvas = to_rgb_uint8(image).astype(float)
    if pred_mask is not None:
        m = np.asarray(pred_mask, dtype=bool)
        canvas[m] = (1 - alpha) * canvas[m] + alpha * _COLOR_PRED
    if gt_mask is not None:
        edge = boundary_pixels(gt_mask)
        for x, y in edge:
            canvas[y, x] = _COLOR_GT_EDGE
    if prompts is not None:
        if prompts.box is not None:
            _draw_box(canvas, prompts.box, _COLOR_BOX)
        for p in prompts.points:
            color = _COLOR_BG_POINT if p.label == BACKGROUND else _COLOR_FG_POINT
            _stamp(canvas, p.x, p.y, color)
    return canvas.astype(np.uint8)


def generate_overlays(
    manifest: DatasetManifest,
    backend: SegmenterBackend,
    strategies: Sequence[StrategySpec],
    features: Sequence[str],
    seed: int,
    out_dir: Path | str,
    limit: int = 4,
    multimask_policy: str = "best",
) -> list[Path]:
    """Re-run a few cells and save qualitative overlay images."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for item in manifest.labeled_items()[:limit]:
        labels = item.load_labels()
        image = item.load_image()
        for feature in features:
            gt = feature_mask(labels, feature)
            for strategy in strategies:
                cell_seed = derive_seed(seed, item.id, feature, strategy.name)
                rng = make_rng(cell_seed)
                if strategy.kind == "E":
                    if not gt.any():
                        continue
                    _prime(backend, labels, feature)
                    preds = backend.segment_everything(image)
                    pred, prompt_set = match_best_mask(preds, gt), None
                else:
                    outcome = build_prompts(strategy, feature, labels, rng)
                    if outcome.skipped:
                        continue
                    _prime(backend, labels, feature)
                    handle = backend.embed(image)
                    preds = backend.predict(handle, outcome.prompt_set)
                    pred = combine_predictions(preds, multimask_policy)
                    prompt_set = outcome.prompt_set
                overlay = render_overlay(image, gt, pred, prompt_set)
                stem = f"{item.id.replace('/', '_')}_{feature}_{strategy.name.replace('@', '_')}"
                path = out_dir / f"{stem}.png"
                plt.imsave(path, overlay)
                paths.append(path)
    return paths
