"""Turn a frame's anchor-box proposals into per-object measurements.

Instead of keeping only the single best detection per object (greedy NMS),
overlapping proposals are grouped around the most confident one and fused
into a weighted mean box, a fused class PMF and, crucially, an explicit
measurement covariance computed from the scatter of the group.  The
covariance feeds the Kalman filter directly, so no hand-tuned measurement
noise is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BoundingBox,
    ClassPmf,
    ClasstrackError,
    FrameDetections,
    Proposal,
    psd_project,
)

__all__ = [
    "AllZeroWeights",
    "FusionConfig",
    "FusedMeasurement",
    "iou",
    "top_class",
    "max_object_conf",
    "cluster_proposals",
    "fusion_weights",
    "fuse",
    "measurements_from_frame",
    "nms_baseline",
]


class AllZeroWeights(ClasstrackError):
    """Every proposal in a group has zero confidence in the group's top class.

    This signals an upstream inconsistency (the group's best proposal claims
    a class nobody believes in); falling back to uniform weights would mask it.
    """


@dataclass(frozen=True)
class FusionConfig:
    """Knobs for grouping and fusing proposals.

    max_fuse:        cap on proposals fused per object.
    cluster_gate:    min IoU with the seed proposal to join its group.
    min_object_conf: min max-non-background confidence for a proposal to
                     seed a new object.
    cov_floor:       eigenvalue floor applied to the fused covariance, px^2.
    """

    max_fuse: int = 10
    cluster_gate: float = 0.5
    min_object_conf: float = 0.2
    cov_floor: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_fuse < 1:
            raise ValueError(f"max_fuse must be >= 1, got {self.max_fuse}")
        if not 0.0 <= self.cluster_gate <= 1.0:
            raise ValueError(f"cluster_gate must be in [0, 1], got {self.cluster_gate}")
        if not 0.0 <= self.min_object_conf <= 1.0:
            raise ValueError(f"min_object_conf must be in [0, 1], got {self.min_object_conf}")
        if self.cov_floor < 0.0:
            raise ValueError(f"cov_floor must be >= 0, got {self.cov_floor}")


@dataclass(frozen=True)
class FusedMeasurement:
    """One object's measurement for the tracker: box, class PMF and box covariance."""

    box: BoundingBox
    class_pmf: ClassPmf
    box_cov: np.ndarray
    top_class: int
    support: int


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # areas from the same corner arithmetic, so identical boxes give exactly 1
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b - inter
    return inter / union


def top_class(p: ClassPmf) -> int:
    """Most probable object class (1-based label; background excluded).

    Ties break toward the lowest label.
    """
    return int(np.argmax(p.object_probs())) + 1


def max_object_conf(p: ClassPmf) -> float:
    """Highest non-background confidence; the proposal's 'objectness'."""
    return float(np.max(p.object_probs()))


def cluster_proposals(frame: FrameDetections, cfg: FusionConfig) -> list[list[Proposal]]:
    """Group a frame's proposals into per-object clusters by IoU with a seed.

    Repeatedly seeds on the not-yet-grouped proposal with the highest
    max-non-background confidence (>= ``min_object_conf``); all ungrouped
    proposals whose IoU with the seed reaches ``cluster_gate`` join it.
    Groups are truncated to the ``max_fuse`` most confident members (the
    seed always stays).  Low-confidence proposals that join no group are
    dropped.
    """
    remaining = list(range(len(frame.proposals)))
    confs = [max_object_conf(p.confidence) for p in frame.proposals]
    groups: list[list[Proposal]] = []

    while remaining:
        seed = max(remaining, key=lambda i: (confs[i], -i))
        if confs[seed] < cfg.min_object_conf:
            break  # everything left is too weak to seed an object
        seed_box = frame.proposals[seed].box
        members = [i for i in remaining if iou(seed_box, frame.proposals[i].box) >= cfg.cluster_gate]
        remaining = [i for i in remaining if i not in members]

        if len(members) > cfg.max_fuse:
            others = sorted((i for i in members if i != seed), key=lambda i: (-confs[i], i))
            members = sorted([seed] + others[: cfg.max_fuse - 1])
        groups.append([frame.proposals[i] for i in members])

    return groups


def fusion_weights(group: list[Proposal]) -> tuple[int, np.ndarray]:
    """Class label and normalized per-proposal weights for fusing a group.

    The group's best proposal (highest max-non-background confidence) fixes
    the object's class; each proposal is then weighted by its own confidence
    in that class, normalized over the group.
    """
    if not group:
        raise ValueError("cannot fuse an empty group")
    n = len(group[0].confidence)
    if any(len(p.confidence) != n for p in group):
        raise ValueError("confidence vectors in a group must share one length")

    best = max(range(len(group)), key=lambda i: (max_object_conf(group[i].confidence), -i))
    label = top_class(group[best].confidence)

    raw_w = np.array([p.confidence.prob_of(label) for p in group], dtype=np.float64)
    total = raw_w.sum()
    if total <= 0.0:
        raise AllZeroWeights(f"no proposal in the group gives class {label} positive confidence")
    return label, raw_w / total


def fuse(group: list[Proposal], cfg: FusionConfig) -> FusedMeasurement:
    """Fuse one group of proposals into a single measurement.

    The box and PMF are the weighted means under :func:`fusion_weights`;
    the covariance is the weighted scatter of the boxes around the mean,
    floored at ``cov_floor`` so a single proposal never yields a zero
    covariance.
    """
    label, w = fusion_weights(group)

    boxes = np.stack([p.box.as_array() for p in group])
    pmfs = np.stack([p.confidence.probs for p in group])
    z_box = w @ boxes
    z_pmf = w @ pmfs

    diffs = boxes - z_box
    scatter = (w[:, None] * diffs).T @ diffs
    cov = psd_project(scatter, floor=cfg.cov_floor)

    return FusedMeasurement(
        box=BoundingBox.from_array(z_box),
        class_pmf=ClassPmf.from_probs(z_pmf),
        box_cov=cov,
        top_class=label,
        support=len(group),
    )


def measurements_from_frame(frame: FrameDetections, cfg: FusionConfig) -> list[FusedMeasurement]:
    """Cluster a frame's proposals and fuse each group."""
    return [fuse(g, cfg) for g in cluster_proposals(frame, cfg)]


def nms_baseline(frame: FrameDetections, iou_gate: float, conf_gate: float) -> list[Proposal]:
    """Greedy non-maximum suppression over a frame's proposals.

    The conventional alternative to fusion: sort by max non-background
    confidence, keep a proposal only if it clears ``conf_gate`` and overlaps
    every already-kept proposal with IoU below ``iou_gate``.
    """
    if not 0.0 <= iou_gate <= 1.0 or not 0.0 <= conf_gate <= 1.0:
        raise ValueError("nms gates must be in [0, 1]")
    order = sorted(
        range(len(frame.proposals)),
        key=lambda i: (-max_object_conf(frame.proposals[i].confidence), i),
    )
    kept: list[Proposal] = []
    for i in order:
        p = frame.proposals[i]
        if max_object_conf(p.confidence) < conf_gate:
            continue
        if all(iou(p.box, q.box) < iou_gate for q in kept):
            kept.append(p)
    return kept
