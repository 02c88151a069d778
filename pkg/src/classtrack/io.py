"""Canonical file formats and configuration loading.

Detections travel as JSONL: a header record first, then one record per
frame.  Track output is JSONL with one record per live track per frame.
Covariances are serialized as the upper triangle (row-major, 10 floats) so
symmetry is exact by construction.  All floats are written with ``repr``,
which round-trips bit-exactly through JSON.

Config files are plain JSON whose keys mirror the config dataclasses; see
the README for the documented key set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .class_filter import GainPolicy
from .core import (
    BoundingBox,
    ClasstrackError,
    FrameDetections,
    Proposal,
    validate_pmf,
)
from .fusion import FusionConfig
from .kalman import MotionModel, default_process_noise
from .sim import Corruption, GroundTruth, InvalidConfig, ScenarioConfig
from .tracker import FrameReport, TrackerConfig

__all__ = [
    "SchemaError",
    "DetectionsData",
    "write_detections",
    "read_detections",
    "write_truth",
    "read_truth",
    "write_tracks",
    "pack_sym4",
    "unpack_sym4",
    "load_scenario_config",
    "load_tracker_config",
]

_TRIU = [(i, j) for i in range(4) for j in range(i, 4)]


class SchemaError(ClasstrackError):
    """A file violates its schema; carries the offending line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def pack_sym4(m: np.ndarray) -> list[float]:
    """Upper triangle of a symmetric 4x4, row-major (10 floats)."""
    return [float(m[i, j]) for i, j in _TRIU]


def unpack_sym4(values: Iterable[float]) -> np.ndarray:
    vals = list(values)
    if len(vals) != 10:
        raise ValueError(f"expected 10 upper-triangular entries, got {len(vals)}")
    m = np.zeros((4, 4), dtype=np.float64)
    for (i, j), v in zip(_TRIU, vals):
        m[i, j] = v
        m[j, i] = v
    return m


@dataclass(frozen=True)
class DetectionsData:
    """Parsed detections file: class names, image size and the frame sequence."""

    class_names: tuple[str, ...]
    image_size: tuple[int, int]
    frames: tuple[FrameDetections, ...]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


def _dump(record: dict) -> str:
    return json.dumps(record, separators=(", ", ": "))


def write_detections(
    path: str | Path,
    class_names: Iterable[str],
    image_size: tuple[int, int],
    frames: Iterable[FrameDetections],
) -> None:
    class_names = list(class_names)
    with open(path, "w") as fh:
        fh.write(
            _dump(
                {
                    "type": "header",
                    "classes": class_names,
                    "background_last": True,
                    "image_size": [int(image_size[0]), int(image_size[1])],
                }
            )
            + "\n"
        )
        for frame in frames:
            fh.write(
                _dump(
                    {
                        "type": "frame",
                        "t": frame.frame_index,
                        "proposals": [
                            {
                                "box": [p.box.px, p.box.py, p.box.l, p.box.h],
                                "conf": [float(v) for v in p.confidence.probs],
                            }
                            for p in frame.proposals
                        ],
                    }
                )
                + "\n"
            )


def _require(cond: bool, line: int, msg: str) -> None:
    if not cond:
        raise SchemaError(line, msg)


def read_detections(path: str | Path, *, normalize_conf: bool = False) -> DetectionsData:
    """Parse and schema-check a detections file.

    Every violation is reported with its line number.  With
    ``normalize_conf`` confidence vectors only need to be nonnegative with
    a positive sum; otherwise they must sum to 1 within the ingest
    tolerance.
    """
    frames: list[FrameDetections] = []
    header: dict | None = None
    last_t = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                _require(False, lineno, "blank line")
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            _require(isinstance(rec, dict), lineno, "record must be a JSON object")

            if lineno == 1:
                _require(rec.get("type") == "header", lineno, "first record must be the header")
                _require(
                    isinstance(rec.get("classes"), list)
                    and rec["classes"]
                    and all(isinstance(c, str) for c in rec["classes"]),
                    lineno,
                    "header needs a non-empty 'classes' list of strings",
                )
                _require(rec.get("background_last") is True, lineno, "header must set background_last true")
                size = rec.get("image_size")
                _require(
                    isinstance(size, list) and len(size) == 2 and all(isinstance(v, int) and v > 0 for v in size),
                    lineno,
                    "header needs image_size [W, H] of positive integers",
                )
                header = rec
                continue

            _require(header is not None, lineno, "missing header")
            _require(rec.get("type") == "frame", lineno, "expected a frame record")
            t = rec.get("t")
            _require(isinstance(t, int) and t >= 0, lineno, "frame needs a non-negative integer 't'")
            _require(t > last_t, lineno, f"frame index {t} not greater than previous {last_t}")
            last_t = t

            raw_props = rec.get("proposals")
            _require(isinstance(raw_props, list), lineno, "frame needs a 'proposals' list")
            n_conf = len(header["classes"]) + 1
            proposals = []
            for k, pr in enumerate(raw_props):
                where = f"proposal {k}"
                _require(isinstance(pr, dict), lineno, f"{where}: must be an object")
                box = pr.get("box")
                _require(
                    isinstance(box, list) and len(box) == 4 and all(isinstance(v, (int, float)) for v in box),
                    lineno,
                    f"{where}: box must be [px, py, l, h]",
                )
                _require(all(math.isfinite(v) for v in box), lineno, f"{where}: box entries must be finite")
                _require(box[2] > 0 and box[3] > 0, lineno, f"{where}: box size must be positive")
                conf = pr.get("conf")
                _require(
                    isinstance(conf, list) and all(isinstance(v, (int, float)) for v in conf),
                    lineno,
                    f"{where}: conf must be a list of numbers",
                )
                _require(all(math.isfinite(v) for v in conf), lineno, f"{where}: conf entries must be finite")
                try:
                    pmf = validate_pmf(conf, normalize=normalize_conf, expected_len=n_conf)
                except ClasstrackError as exc:
                    raise SchemaError(lineno, f"{where}: {exc}") from exc
                proposals.append(Proposal(box=BoundingBox.from_array(box), confidence=pmf))
            frames.append(FrameDetections(frame_index=t, proposals=tuple(proposals)))

    _require(header is not None, 1, "empty file: missing header")
    return DetectionsData(
        class_names=tuple(header["classes"]),
        image_size=(header["image_size"][0], header["image_size"][1]),
        frames=tuple(frames),
    )


def write_truth(path: str | Path, truth: GroundTruth) -> None:
    with open(path, "w") as fh:
        for t, (box, label) in enumerate(zip(truth.boxes, truth.labels)):
            fh.write(_dump({"t": t, "box": [box.px, box.py, box.l, box.h], "label": label}) + "\n")


def read_truth(path: str | Path) -> GroundTruth:
    boxes: list[BoundingBox] = []
    labels: list[int] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            _require(isinstance(rec, dict) and "box" in rec and "label" in rec, lineno, "bad truth record")
            boxes.append(BoundingBox.from_array(rec["box"]))
            labels.append(int(rec["label"]))
    return GroundTruth(boxes=tuple(boxes), labels=tuple(labels))


def write_tracks(path: str | Path, reports: Iterable[FrameReport]) -> None:
    """One record per live track per frame: state mean, covariance, PMF, status."""
    with open(path, "w") as fh:
        for rep in reports:
            for snap in rep.tracks:
                fh.write(
                    _dump(
                        {
                            "t": rep.frame_index,
                            "id": snap.id,
                            "box": [snap.box.px, snap.box.py, snap.box.l, snap.box.h],
                            "box_cov": pack_sym4(snap.box_cov),
                            "pmf": [float(v) for v in snap.pmf.probs],
                            "top": snap.top,
                            "status": snap.status.value,
                            "reason": snap.reason,
                        }
                    )
                    + "\n"
                )


# -- configuration files ----------------------------------------------------


def _load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: config must be a JSON object")
    return data


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise InvalidConfig(f"{where}: unknown keys {sorted(unknown)}")


def load_scenario_config(path: str | Path) -> ScenarioConfig:
    """Scenario config JSON; keys mirror ScenarioConfig (see README)."""
    data = _load_json(path)
    allowed = {
        "seed",
        "num_frames",
        "num_classes",
        "true_class",
        "image_size",
        "true_box",
        "walk_sigma",
        "proposals_per_frame",
        "box_jitter_sigma",
        "correct_conf",
        "conf_jitter",
        "corruption",
        "class_names",
    }
    _reject_unknown(data, allowed, str(path))
    kwargs: dict[str, Any] = {k: v for k, v in data.items() if k in allowed}
    try:
        if "image_size" in kwargs:
            kwargs["image_size"] = tuple(int(v) for v in kwargs["image_size"])
        if "true_box" in kwargs:
            kwargs["true_box"] = BoundingBox.from_array(kwargs["true_box"])
        if "class_names" in kwargs and kwargs["class_names"] is not None:
            kwargs["class_names"] = tuple(str(s) for s in kwargs["class_names"])
        if kwargs.get("corruption") is not None:
            c = kwargs["corruption"]
            kwargs["corruption"] = Corruption(frame=int(c["frame"]), wrong_class=int(c["wrong_class"]))
        return ScenarioConfig(**kwargs)
    except (TypeError, KeyError, ValueError) as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc


def load_tracker_config(path: str | Path | None = None, mode: str | None = None) -> TrackerConfig:
    """Tracker config JSON; any omitted key keeps its default."""
    data = _load_json(path) if path is not None else {}
    allowed = {
        "fusion",
        "motion",
        "gain",
        "assoc_gate",
        "kill_threshold",
        "birth_threshold",
        "max_misses",
        "mode",
        "kill_max_includes_background",
        "confirmation",
    }
    _reject_unknown(data, allowed, str(path))
    try:
        kwargs: dict[str, Any] = {}
        if "fusion" in data:
            _reject_unknown(data["fusion"], {"max_fuse", "cluster_gate", "min_object_conf", "cov_floor"}, "fusion")
            kwargs["fusion"] = FusionConfig(**data["fusion"])
        if "motion" in data:
            m = dict(data["motion"])
            _reject_unknown(m, {"sigma_center", "sigma_size", "q_diag", "per_class_q_diag"}, "motion")
            if "q_diag" in m:
                q = np.diag([float(v) for v in m["q_diag"]])
            else:
                q = default_process_noise(
                    sigma_center=float(m.get("sigma_center", 10.0)),
                    sigma_size=float(m.get("sigma_size", 5.0)),
                )
            per_class = None
            if m.get("per_class_q_diag"):
                per_class = {int(k): np.diag([float(v) for v in diag]) for k, diag in m["per_class_q_diag"].items()}
            kwargs["motion"] = MotionModel(q=q, per_class_q=per_class)
        if "gain" in data:
            g = dict(data["gain"])
            _reject_unknown(g, {"kind", "lam"}, "gain")
            kwargs["gain"] = GainPolicy(**g)
        for key in ("assoc_gate", "kill_threshold", "birth_threshold", "max_misses", "kill_max_includes_background"):
            if key in data:
                kwargs[key] = data[key]
        if data.get("confirmation") is not None:
            kwargs["confirmation"] = tuple(int(v) for v in data["confirmation"])
        if "mode" in data:
            kwargs["mode"] = data["mode"]
        if mode is not None:
            kwargs["mode"] = mode
        return TrackerConfig(**kwargs)
    except (TypeError, KeyError, ValueError) as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
