"""
Prompt strategy gallery
=======================

Builds every catalog strategy for each feature of one synthetic eye and
saves an overlay image per cell: green markers are foreground points,
red markers background points, the light blue rectangle is the box
prompt, yellow is the ground-truth outline.

Output lands in demos/output/strategies/.
"""

from pathlib import Path

import matplotlib.pyplot as plt

from eyeseg import make_rng, strategy_catalog
from eyeseg.datasets import FEATURES, feature_mask
from eyeseg.prompts import build_prompts
from eyeseg.reporting import render_overlay
from eyeseg.synthetic import synthetic_item

out_dir = Path(__file__).parent / "output" / "strategies"
out_dir.mkdir(parents=True, exist_ok=True)

image, labels = synthetic_item(seed=27, mode="full")

for feature in FEATURES:
    gt = feature_mask(labels, feature)
    for strategy in strategy_catalog():
        outcome = build_prompts(strategy, feature, labels, make_rng(5))
        if outcome.skipped:
            print(f"{feature:7s} {strategy.name:10s} skipped: {outcome.skip_reason}")
            continue
        overlay = render_overlay(image, gt_mask=gt, prompts=outcome.prompt_set)
        name = f"{feature}_{strategy.name.replace('@', '_')}.png"
        plt.imsave(out_dir / name, overlay)
        ps = outcome.prompt_set
        print(
            f"{feature:7s} {strategy.name:10s} "
            f"{len(ps.foreground_points())}+ / {len(ps.background_points())}- points, "
            f"box={'yes' if ps.box else 'no '}  -> {name}"
        )

print(f"\nwrote gallery to {out_dir}")
