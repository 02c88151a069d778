"""Fusing anchor-box proposals instead of suppressing them.

A detector fires many overlapping anchor boxes per object.  The usual move
is greedy NMS: keep the single most confident box, throw the rest away.
Fusion keeps the whole cloud: the boxes are averaged with weights given by
each proposal's confidence in the object's class, and the spread of the
cloud becomes an explicit measurement covariance.  That covariance is the
quantity NMS throws away, and it is exactly what a Kalman filter wants.
"""

import numpy as np

from classtrack import (
    BoundingBox,
    FrameDetections,
    FusionConfig,
    Proposal,
    fuse,
    fusion_weights,
    nms_baseline,
    validate_pmf,
)

rng = np.random.default_rng(0)

# One object near (200, 150), viewed through 8 noisy anchor boxes.
# Classes: 1 and 2, background last.
true_box = np.array([200.0, 150.0, 80.0, 60.0])
proposals = []
for _ in range(8):
    coords = true_box + rng.normal(scale=[6.0, 6.0, 4.0, 4.0])
    conf = validate_pmf(rng.dirichlet([30, 2, 3]), normalize=True)  # confident in class 1
    proposals.append(Proposal(box=BoundingBox.from_array(coords), confidence=conf))

frame = FrameDetections(frame_index=0, proposals=tuple(proposals))
cfg = FusionConfig()

# What NMS would hand the tracker: one box, no uncertainty attached.
survivor = nms_baseline(frame, iou_gate=0.5, conf_gate=0.2)[0]
print("NMS keeps a single box:", np.round(survivor.box.as_array(), 1))

# Fusion keeps them all, weighted by confidence in the winning class.
label, weights = fusion_weights(list(proposals))
print(f"\nfusion weights for class {label} (sum {weights.sum():.12f}):")
print(np.round(weights, 3))

measurement = fuse(list(proposals), cfg)
print("\nfused box:    ", np.round(measurement.box.as_array(), 1))
print("true box:     ", true_box)
print("support:      ", measurement.support, "proposals")

# The covariance diagonal reflects how much the anchors disagreed per
# coordinate; off-diagonals capture correlated jitter.
print("\nmeasurement covariance (px^2):")
print(np.round(measurement.box_cov, 1))
std = np.sqrt(np.diag(measurement.box_cov))
print("per-coordinate std dev (px):", np.round(std, 2))

# A tight cloud produces a small covariance; a sloppy one a large one.
for scale in (1.0, 5.0, 15.0):
    cloud = []
    for _ in range(8):
        coords = true_box + rng.normal(scale=scale, size=4)
        cloud.append(Proposal(box=BoundingBox.from_array(coords), confidence=proposals[0].confidence))
    m = fuse(cloud, cfg)
    print(f"jitter {scale:5.1f} px -> mean variance {np.trace(m.box_cov) / 4.0:8.2f} px^2")
