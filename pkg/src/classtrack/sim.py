"""Seeded synthetic detection sequences for benchmarking the tracker.

Each frame carries a cloud of proposals jittered around a ground-truth box,
with class confidences perturbed around a template that concentrates mass
on the true class.  A corruption can replace one frame's proposals with an
exact copy of the previous frame's where the true-class and a wrong-class
confidence entries are swapped, which is the classic way a detector's
misclassification enters an otherwise clean sequence.  Everything is
deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import BoundingBox, ClasstrackError, FrameDetections, Proposal, validate_pmf

__all__ = [
    "InvalidConfig",
    "Corruption",
    "ScenarioConfig",
    "GroundTruth",
    "generate",
    "make_corruption_suite",
]


class InvalidConfig(ClasstrackError):
    """Scenario configuration is inconsistent."""


@dataclass(frozen=True)
class Corruption:
    """Swap the true class's confidence with ``wrong_class`` at frame ``frame`` (0-based)."""

    frame: int
    wrong_class: int


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    num_frames: int = 3
    num_classes: int = 4
    true_class: int = 1
    image_size: tuple[int, int] = (640, 480)
    true_box: BoundingBox = field(default_factory=lambda: BoundingBox(320.0, 240.0, 160.0, 120.0))
    walk_sigma: float = 0.0
    proposals_per_frame: int = 8
    box_jitter_sigma: float = 4.0
    correct_conf: float = 0.9
    conf_jitter: float = 0.03
    corruption: Corruption | None = None
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_frames < 1:
            raise InvalidConfig(f"num_frames must be >= 1, got {self.num_frames}")
        if self.num_classes < 1:
            raise InvalidConfig(f"num_classes must be >= 1, got {self.num_classes}")
        if not 1 <= self.true_class <= self.num_classes:
            raise InvalidConfig(f"true_class {self.true_class} outside 1..{self.num_classes}")
        if self.proposals_per_frame < 1:
            raise InvalidConfig(f"proposals_per_frame must be >= 1, got {self.proposals_per_frame}")
        if min(self.walk_sigma, self.box_jitter_sigma, self.conf_jitter) < 0:
            raise InvalidConfig("sigmas must be non-negative")
        if not 0.0 < self.correct_conf <= 1.0:
            raise InvalidConfig(f"correct_conf must be in (0, 1], got {self.correct_conf}")
        w, h = self.image_size
        if self.true_box.l > w or self.true_box.h > h:
            raise InvalidConfig("true_box does not fit in the image")
        if self.corruption is not None:
            c = self.corruption
            if not 1 <= c.frame < self.num_frames:
                raise InvalidConfig(
                    f"corruption frame {c.frame} needs a predecessor and must be < {self.num_frames}"
                )
            if not 1 <= c.wrong_class <= self.num_classes or c.wrong_class == self.true_class:
                raise InvalidConfig(f"wrong_class {c.wrong_class} invalid for true_class {self.true_class}")
        if self.class_names is not None and len(self.class_names) != self.num_classes:
            raise InvalidConfig(
                f"need {self.num_classes} class names, got {len(self.class_names)}"
            )

    def resolved_class_names(self) -> tuple[str, ...]:
        if self.class_names is not None:
            return tuple(self.class_names)
        return tuple(f"class{i}" for i in range(1, self.num_classes + 1))


@dataclass(frozen=True)
class GroundTruth:
    """Per-frame true box and class label."""

    boxes: tuple[BoundingBox, ...]
    labels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.boxes)


def _confidence_template(cfg: ScenarioConfig) -> np.ndarray:
    """correct_conf on the true class, remainder uniform over the rest (incl. background)."""
    n = cfg.num_classes + 1
    t = np.full(n, (1.0 - cfg.correct_conf) / (n - 1), dtype=np.float64)
    t[cfg.true_class - 1] = cfg.correct_conf
    return t


def _clamp_center(c: float, size: float, limit: float) -> float:
    lo, hi = size / 2.0, limit - size / 2.0
    return min(max(c, lo), hi)


def generate(cfg: ScenarioConfig) -> tuple[list[FrameDetections], GroundTruth]:
    """Produce the detection sequence and its ground truth for one scenario."""
    rng = np.random.default_rng(cfg.seed)
    template = _confidence_template(cfg)
    w, h = cfg.image_size

    frames: list[FrameDetections] = []
    truth_boxes: list[BoundingBox] = []
    box = cfg.true_box

    for t in range(cfg.num_frames):
        if cfg.corruption is not None and t == cfg.corruption.frame:
            prev = frames[-1]
            i, j = cfg.true_class - 1, cfg.corruption.wrong_class - 1
            proposals = []
            for p in prev.proposals:
                conf = p.confidence.probs.copy()
                conf[i], conf[j] = conf[j], conf[i]
                proposals.append(Proposal(box=p.box, confidence=validate_pmf(conf)))
            frames.append(FrameDetections(frame_index=t, proposals=tuple(proposals)))
            truth_boxes.append(truth_boxes[-1])  # same image re-presented
            continue

        if t > 0:
            dx, dy = rng.normal(0.0, 1.0, size=2) * cfg.walk_sigma
            box = BoundingBox(
                _clamp_center(box.px + dx, box.l, w),
                _clamp_center(box.py + dy, box.h, h),
                box.l,
                box.h,
            )
        truth_boxes.append(box)

        proposals = []
        for _ in range(cfg.proposals_per_frame):
            jitter = rng.normal(0.0, 1.0, size=4) * cfg.box_jitter_sigma
            coords = box.as_array() + jitter
            coords[2:] = np.maximum(coords[2:], 1.0)  # sizes stay positive
            noise = rng.normal(0.0, 1.0, size=template.size) * cfg.conf_jitter
            conf = np.maximum(template + noise, 0.0)
            proposals.append(
                Proposal(
                    box=BoundingBox.from_array(coords),
                    confidence=validate_pmf(conf, normalize=True),
                )
            )
        frames.append(FrameDetections(frame_index=t, proposals=tuple(proposals)))

    labels = tuple(cfg.true_class for _ in range(cfg.num_frames))
    return frames, GroundTruth(boxes=tuple(truth_boxes), labels=labels)


def make_corruption_suite(base: ScenarioConfig, n: int) -> list[ScenarioConfig]:
    """n three-frame scenarios: two clean frames, then a class-swapped copy.

    Seeds run consecutively from the base seed; the wrong class cycles
    round-robin over the non-true classes.
    """
    if n < 1:
        raise InvalidConfig(f"suite size must be >= 1, got {n}")
    if base.num_classes < 2:
        raise InvalidConfig("corruption needs at least two object classes")
    wrong = [c for c in range(1, base.num_classes + 1) if c != base.true_class]
    return [
        replace(
            base,
            seed=base.seed + i,
            num_frames=3,
            corruption=Corruption(frame=2, wrong_class=wrong[i % len(wrong)]),
        )
        for i in range(n)
    ]
