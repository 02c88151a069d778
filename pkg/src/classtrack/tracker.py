"""Multi-object track management over fused measurements.

Per frame: predict every active track, fuse the frame's proposals into
measurements, associate measurements to tracks greedily by IoU, then run
the Kalman and class-filter updates on matches.  Unmatched measurements
can give birth to tracks (flat class prior); unmatched tracks accumulate
misses and die after too many.  A track whose class decision fails the
lost rule is flagged lost and killed on that same frame.

Two modes differ only in the class decision: ``robust`` runs the recursive
PMF filter, ``standard`` takes each frame's fused class PMF at face value.
Everything else (fusion, association, Kalman filtering) is shared, so the
modes isolate the effect of the class recursion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .class_filter import ClassTrackState, GainPolicy, is_lost, update_class
from .core import BoundingBox, ClassPmf, ClasstrackError, FrameDetections
from .fusion import (
    FusedMeasurement,
    FusionConfig,
    iou,
    max_object_conf,
    measurements_from_frame,
    top_class,
)
from .kalman import BoxState, MotionModel
from .kalman import predict as kf_predict
from .kalman import update as kf_update

__all__ = [
    "NonMonotonicFrameIndex",
    "TrackStatus",
    "Track",
    "TrackerConfig",
    "TrackSnapshot",
    "FrameReport",
    "Tracker",
    "associate",
]


class NonMonotonicFrameIndex(ClasstrackError):
    """Frames must be fed with strictly increasing frame indices."""


class TrackStatus(str, enum.Enum):
    ACTIVE = "active"
    LOST = "lost"
    DEAD = "dead"


@dataclass
class Track:
    """Estimated history of one object."""

    id: int
    box: BoxState
    cls: ClassTrackState
    top: int
    born_at: int
    last_seen: int
    misses: int = 0
    hits: int = 0
    status: TrackStatus = TrackStatus.ACTIVE


@dataclass(frozen=True)
class TrackerConfig:
    """All tracker knobs in one place.

    mode is "robust" (recursive class filter) or "standard" (per-frame
    class decision).  ``confirmation`` optionally requires n associated
    updates within the first m frames of a track's life; tracks failing it
    are dropped quietly (off by default: a single confident frame births).
    """

    fusion: FusionConfig = field(default_factory=FusionConfig)
    motion: MotionModel = field(default_factory=MotionModel)
    gain: GainPolicy = field(default_factory=GainPolicy.reciprocal)
    assoc_gate: float = 0.3
    kill_threshold: float = 0.4
    birth_threshold: float = 0.4
    max_misses: int = 3
    mode: str = "robust"
    kill_max_includes_background: bool = False
    confirmation: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.kill_threshold < 1.0:
            raise ValueError(f"kill_threshold must be in (0, 1), got {self.kill_threshold}")
        if not 0.0 < self.birth_threshold < 1.0:
            raise ValueError(f"birth_threshold must be in (0, 1), got {self.birth_threshold}")
        if not 0.0 <= self.assoc_gate <= 1.0:
            raise ValueError(f"assoc_gate must be in [0, 1], got {self.assoc_gate}")
        if self.max_misses < 0:
            raise ValueError(f"max_misses must be >= 0, got {self.max_misses}")
        if self.mode not in ("robust", "standard"):
            raise ValueError(f"mode must be 'robust' or 'standard', got {self.mode!r}")
        if self.confirmation is not None:
            n, m = self.confirmation
            if not 1 <= n <= m:
                raise ValueError(f"confirmation must satisfy 1 <= n <= m, got {self.confirmation}")


@dataclass(frozen=True)
class TrackSnapshot:
    """Per-frame view of one track for reports and serialization."""

    id: int
    box: BoundingBox
    box_cov: np.ndarray
    pmf: ClassPmf
    meas_pmf: ClassPmf | None
    meas_box: BoundingBox | None
    top: int
    status: TrackStatus
    reason: str | None


@dataclass(frozen=True)
class FrameReport:
    """What happened in one tracker step."""

    frame_index: int
    births: tuple[int, ...]
    deaths: tuple[int, ...]
    lost: tuple[tuple[int, str], ...]
    tracks: tuple[TrackSnapshot, ...]


def associate(
    tracks: list[Track],
    measurements: list[FusedMeasurement],
    gate: float,
) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """Greedy IoU matching between predicted track boxes and measurements.

    Returns (matches as (track_idx, measurement_idx) pairs, unmatched track
    indices, unmatched measurement indices).  Pairs are taken highest IoU
    first, at or above ``gate``; ties break on (track id, measurement order).
    """
    pairs = []
    for ti, trk in enumerate(tracks):
        for mi, meas in enumerate(measurements):
            overlap = iou(trk.box.mean, meas.box)
            if overlap >= gate:
                pairs.append((-overlap, trk.id, mi, ti))
    pairs.sort()

    matches: list[tuple[int, int]] = []
    used_t: set[int] = set()
    used_m: set[int] = set()
    for _, _, mi, ti in pairs:
        if ti in used_t or mi in used_m:
            continue
        matches.append((ti, mi))
        used_t.add(ti)
        used_m.add(mi)

    unmatched_tracks = [i for i in range(len(tracks)) if i not in used_t]
    unmatched_meas = [i for i in range(len(measurements)) if i not in used_m]
    return matches, unmatched_tracks, unmatched_meas


class Tracker:
    """Stateful per-sequence track manager; feed frames in order via :meth:`step`."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.tracks: list[Track] = []
        self._next_id = 1
        self._last_frame: int | None = None

    def step(self, frame: FrameDetections) -> FrameReport:
        """Advance the tracker by one frame and report what happened."""
        cfg = self.config
        if self._last_frame is not None and frame.frame_index <= self._last_frame:
            raise NonMonotonicFrameIndex(
                f"frame index {frame.frame_index} after {self._last_frame}"
            )
        self._last_frame = frame.frame_index

        for trk in self.tracks:
            trk.box = kf_predict(trk.box, cfg.motion, class_label=trk.top)

        measurements = measurements_from_frame(frame, cfg.fusion)
        matches, unmatched_t, unmatched_m = associate(self.tracks, measurements, cfg.assoc_gate)

        births: list[int] = []
        deaths: list[int] = []
        lost_events: list[tuple[int, str]] = []
        snapshots: list[TrackSnapshot] = []

        for ti, mi in matches:
            trk = self.tracks[ti]
            meas = measurements[mi]
            trk.box = kf_update(trk.box, meas)
            trk.misses = 0
            trk.hits += 1
            trk.last_seen = frame.frame_index
            reason = self._apply_class_update(trk, meas)
            if reason is not None:
                lost_events.append((trk.id, reason))
            self._check_confirmation(trk, frame.frame_index)
            snapshots.append(self._snapshot(trk, meas, reason))

        for ti in unmatched_t:
            trk = self.tracks[ti]
            trk.misses += 1
            if trk.misses > cfg.max_misses:
                trk.status = TrackStatus.DEAD
            self._check_confirmation(trk, frame.frame_index)
            snapshots.append(self._snapshot(trk, None, None))

        for mi in unmatched_m:
            meas = measurements[mi]
            if max_object_conf(meas.class_pmf) < cfg.birth_threshold:
                continue
            trk = self._birth(meas, frame.frame_index)
            births.append(trk.id)
            reason = self._apply_class_update(trk, meas)
            if reason is not None:
                lost_events.append((trk.id, reason))
            snapshots.append(self._snapshot(trk, meas, reason))

        deaths = sorted(
            t.id for t in self.tracks if t.status in (TrackStatus.DEAD, TrackStatus.LOST)
        )
        self.tracks = [t for t in self.tracks if t.status == TrackStatus.ACTIVE]

        snapshots.sort(key=lambda s: s.id)
        return FrameReport(
            frame_index=frame.frame_index,
            births=tuple(births),
            deaths=tuple(deaths),
            lost=tuple(sorted(lost_events)),
            tracks=tuple(snapshots),
        )

    # -- internals ---------------------------------------------------------

    def _birth(self, meas: FusedMeasurement, frame_index: int) -> Track:
        """New track from an unmatched measurement: flat class prior, box from the measurement."""
        trk = Track(
            id=self._next_id,
            box=BoxState(mean=meas.box, cov=meas.box_cov),
            cls=ClassTrackState.flat(meas.class_pmf.num_classes),
            top=meas.top_class,
            born_at=frame_index,
            last_seen=frame_index,
            hits=1,
        )
        self._next_id += 1
        self.tracks.append(trk)
        return trk

    def _apply_class_update(self, trk: Track, meas: FusedMeasurement) -> str | None:
        """Class decision plus lost rule; the only place the two modes differ.

        Returns the lost reason when the track is lost this frame, else None.
        """
        cfg = self.config
        if cfg.mode == "robust":
            trk.cls = update_class(trk.cls, meas.class_pmf, cfg.gain)
        else:
            trk.cls = ClassTrackState(pmf=meas.class_pmf, t=trk.cls.t + 1)

        check = is_lost(
            trk.cls.pmf,
            trk.top,
            cfg.kill_threshold,
            include_background=cfg.kill_max_includes_background,
        )
        if check.lost:
            trk.status = TrackStatus.LOST
            return check.reason
        trk.top = top_class(trk.cls.pmf)
        return None

    def _check_confirmation(self, trk: Track, frame_index: int) -> None:
        """Optional n-of-m rule: a track needs n associated updates in its first m frames."""
        if self.config.confirmation is None or trk.status != TrackStatus.ACTIVE:
            return
        n, m = self.config.confirmation
        age = frame_index - trk.born_at + 1
        if age >= m and trk.hits < n:
            trk.status = TrackStatus.DEAD

    def _snapshot(
        self, trk: Track, meas: FusedMeasurement | None, reason: str | None
    ) -> TrackSnapshot:
        return TrackSnapshot(
            id=trk.id,
            box=trk.box.mean,
            box_cov=trk.box.cov,
            pmf=trk.cls.pmf,
            meas_pmf=meas.class_pmf if meas is not None else None,
            meas_box=meas.box if meas is not None else None,
            top=trk.top,
            status=trk.status,
            reason=reason,
        )
