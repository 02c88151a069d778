"""Turn an image folder into a classtrack detections file.

Images are processed in filename order; each becomes one frame record.
Per frame the detector's raw anchors are filtered by a score floor on the
most confident non-background class, the top scorers are kept, boxes are
converted to the center format and every class vector is renormalized in
float64 so it sums to 1 exactly.  The output follows the classtrack
detections JSONL schema (header record, then one record per frame,
background class last).
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .detectors import RawProposals, build_detector

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tiff", ".webp")


@dataclass(frozen=True)
class ExportConfig:
    model: str
    image_dir: Path
    class_names: tuple[str, ...]
    out_path: Path
    score_floor: float = 0.2
    max_proposals: int = 32
    weights_path: str | None = None
    image_size: tuple[int, int] | None = None  # (W, H) for the header; first image if None

    def __post_init__(self) -> None:
        if not 0.0 <= self.score_floor <= 1.0:
            raise ValueError(f"score_floor must be in [0, 1], got {self.score_floor}")
        if self.max_proposals < 1:
            raise ValueError(f"max_proposals must be >= 1, got {self.max_proposals}")
        if not self.class_names:
            raise ValueError("need at least one class name")


def list_images(image_dir: Path) -> list[Path]:
    return sorted(p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _select_proposals(raw: RawProposals, cfg: ExportConfig) -> list[dict]:
    scores = raw.class_probs[:, :-1].max(axis=1)  # best non-background confidence
    keep = np.flatnonzero(scores >= cfg.score_floor)
    keep = keep[np.argsort(-scores[keep], kind="stable")][: cfg.max_proposals]

    records = []
    for i in keep:
        x1, y1, x2, y2 = raw.boxes_xyxy[i]
        l, h = x2 - x1, y2 - y1
        if l <= 0.0 or h <= 0.0:
            continue  # degenerate anchors (possible with random weights)
        conf = raw.class_probs[i]
        conf = conf / math.fsum(conf)  # exact simplex in float64
        r = math.fsum(conf) - 1.0
        if r != 0.0:
            conf = conf.copy()
            conf[int(np.argmax(conf))] -= r
        records.append(
            {
                "box": [float((x1 + x2) / 2.0), float((y1 + y2) / 2.0), float(l), float(h)],
                "conf": [float(v) for v in conf],
            }
        )
    return records


def export(cfg: ExportConfig) -> Path:
    """Run the detector over the folder and write the detections file."""
    detector = build_detector(cfg.model, len(cfg.class_names), cfg.weights_path)
    images = list_images(cfg.image_dir)

    frames: list[tuple[int, list[dict]]] = []
    header_size = cfg.image_size
    for t, path in enumerate(images):
        try:
            with Image.open(path) as img:
                rgb = np.array(img.convert("RGB"))  # writable copy for torch
        except (OSError, UnidentifiedImageError) as exc:
            print(f"warning: skipping unreadable image {path.name}: {exc}", file=sys.stderr)
            continue  # the frame index stays consumed
        if header_size is None:
            header_size = (rgb.shape[1], rgb.shape[0])
        raw = detector.detect(rgb)
        frames.append((t, _select_proposals(raw, cfg)))

    if header_size is None:
        header_size = (1, 1)  # header-only file for an empty folder

    with open(cfg.out_path, "w") as fh:
        fh.write(
            json.dumps(
                {
                    "type": "header",
                    "classes": list(cfg.class_names),
                    "background_last": True,
                    "image_size": [int(header_size[0]), int(header_size[1])],
                },
                separators=(", ", ": "),
            )
            + "\n"
        )
        for t, proposals in frames:
            fh.write(
                json.dumps({"type": "frame", "t": t, "proposals": proposals}, separators=(", ", ": "))
                + "\n"
            )
    return cfg.out_path
