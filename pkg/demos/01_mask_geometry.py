"""
Binary-mask geometry
====================

Boxes, box scaling and perturbation, seeded point sampling and boundary
extraction, on a synthetic eye. All randomness goes through explicit
seeded generators, so rerunning this script prints identical numbers.
"""

import numpy as np

from eyeseg import (
    Box,
    bounding_box,
    boundary_pixels,
    make_rng,
    perturb_box,
    sample_points_in_mask,
    sample_points_outside_mask_in_box,
    scale_box,
)
from eyeseg.datasets import feature_mask
from eyeseg.synthetic import synthetic_labels

labels = synthetic_labels(seed=42, mode="full")
height, width = labels.shape
bounds = (width, height)

# Tight bounding boxes around each feature. The nesting mirrors the
# anatomy: the pupil box sits inside the iris box.
for feature in ("pupil", "iris", "sclera"):
    mask = feature_mask(labels, feature)
    print(f"{feature:7s} area={int(mask.sum()):5d}  bbox={bounding_box(mask)}")

# Doubling a box keeps its center fixed and clamps to the image.
pupil = feature_mask(labels, "pupil")
tight = bounding_box(pupil)
doubled = scale_box(tight, 2.0, bounds)
print(f"\ntight  {tight}\ndoubled {doubled}")

# Perturbation displaces each edge by at most fraction x side length.
# The same seed always produces the same jittered box.
rng = make_rng(7)
for fraction in (0.05, 0.10, 0.20):
    jittered = perturb_box(tight, fraction, make_rng(7), bounds)
    print(f"perturbed {fraction:.0%}: {jittered}")

# Seeded sampling: foreground clicks on the mask, background clicks
# outside the mask but inside the doubled box.
fg = sample_points_in_mask(pupil, 4, make_rng(1))
bg = sample_points_outside_mask_in_box(pupil, doubled, 4, make_rng(2))
print("\nforeground points:", [(p.x, p.y) for p in fg])
print("background points:", [(p.x, p.y) for p in bg])

# The boundary is every foreground pixel touching background (4-neighbor).
edge = boundary_pixels(pupil)
print(f"\npupil boundary: {len(edge)} pixels, e.g. {edge[:3].tolist()}")
assert all(pupil[y, x] for x, y in edge)

# A degenerate one-pixel mask still has a box and a boundary.
dot = np.zeros((8, 8), dtype=bool)
dot[3, 5] = True
print("\none-pixel mask:", bounding_box(dot), "boundary", boundary_pixels(dot).tolist())
assert bounding_box(dot) == Box(5, 3, 5, 3)
