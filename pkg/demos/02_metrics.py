"""
Segmentation metrics
====================

Dice, IoU and boundary Hausdorff distance on masks where the right
answers are easy to see by eye, then on a synthetic eye where a
prediction is degraded step by step.
"""

import numpy as np

from eyeseg import dice, hausdorff, iou, metric_triple
from eyeseg.datasets import feature_mask
from eyeseg.synthetic import synthetic_labels


def block(coords, size=6):
    m = np.zeros((size, size), dtype=bool)
    for x, y in coords:
        m[y, x] = True
    return m


# Two 2x2 blocks offset by one column share half their pixels:
# Dice = 2*2/(4+4) = 0.5, IoU = 2/6.
a = block([(0, 0), (1, 0), (0, 1), (1, 1)])
b = block([(1, 0), (2, 0), (1, 1), (2, 1)])
print(f"offset blocks: dice={dice(a, b):.4f} iou={iou(a, b):.4f}")

# Hausdorff between two single pixels is their Euclidean distance:
# (0,0) to (3,4) is a 3-4-5 triangle.
print("single pixels:", hausdorff(block([(0, 0)], 8), block([(3, 4)], 8)))

# Dice and IoU always satisfy dice = 2*iou/(1+iou).
d, i = dice(a, b), iou(a, b)
print(f"identity check: {d:.12f} == {2 * i / (1 + i):.12f}")

# Now degrade a perfect iris prediction by eroding rows off the top.
labels = synthetic_labels(seed=9, mode="full")
gt = feature_mask(labels, "iris")
print("\nrows removed   dice     iou      hausdorff")
pred = gt.copy()
top = np.nonzero(gt.any(axis=1))[0][0]
for rows in (0, 2, 5, 10):
    clipped = gt.copy()
    clipped[: top + rows, :] = False
    t = metric_triple(clipped, gt)
    print(f"{rows:12d}   {t.dice:.4f}   {t.iou:.4f}   {t.hausdorff:8.4f}")

# Overlap metrics fall while the boundary distance grows: the two views
# are complementary, which is why all three are recorded per cell.
