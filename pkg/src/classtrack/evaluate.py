"""Metrics and the robust-vs-standard comparison experiment.

The headline metric mirrors the lost-track count: a sequence counts as
lost when the first-born track is no longer active at the last frame (a
sequence where no track is ever born also counts as lost).  Both tracker
modes run on identical detections, so any difference comes from the class
recursion alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import ClasstrackError, FrameDetections
from .sim import GroundTruth, ScenarioConfig, generate
from .tracker import FrameReport, Tracker, TrackerConfig, TrackStatus

__all__ = [
    "NoTruth",
    "FrameStats",
    "SequenceResult",
    "ExperimentReport",
    "run_tracker",
    "sequence_result",
    "run_experiment",
    "difficulty_sweep",
    "rmse_px",
    "emit_plot_data",
]

MODES = ("robust", "standard")


class NoTruth(ClasstrackError):
    """Ground truth is required for this metric but was not provided."""


@dataclass(frozen=True)
class FrameStats:
    """Per-frame view of the followed track, NaN/None where absent."""

    frame: int
    est_pmf: np.ndarray | None
    meas_pmf: np.ndarray | None
    est_center: tuple[float, float] | None
    meas_center: tuple[float, float] | None
    truth_center: tuple[float, float] | None
    lost: bool

    @property
    def est_max(self) -> float:
        return float(np.max(self.est_pmf[:-1])) if self.est_pmf is not None else math.nan

    @property
    def est_top(self) -> int | None:
        return int(np.argmax(self.est_pmf[:-1])) + 1 if self.est_pmf is not None else None

    @property
    def err_px(self) -> float:
        if self.est_center is None or self.truth_center is None:
            return math.nan
        dx = self.est_center[0] - self.truth_center[0]
        dy = self.est_center[1] - self.truth_center[1]
        return math.hypot(dx, dy)


@dataclass(frozen=True)
class SequenceResult:
    sequence_id: str
    mode: str
    num_classes: int
    lost_at_final: bool
    lost_reason: str | None
    frames: tuple[FrameStats, ...]


@dataclass(frozen=True)
class ExperimentReport:
    n: int
    lost_robust: int
    lost_standard: int
    results: tuple[SequenceResult, ...]


def run_tracker(frames: list[FrameDetections], cfg: TrackerConfig) -> list[FrameReport]:
    """Feed a whole sequence through a fresh tracker."""
    tracker = Tracker(cfg)
    return [tracker.step(f) for f in frames]


def sequence_result(
    reports: list[FrameReport],
    truth: GroundTruth | None,
    mode: str,
    sequence_id: str,
    num_classes: int,
) -> SequenceResult:
    """Summarize one tracked sequence by following its first-born track."""
    followed = None
    for rep in reports:
        if rep.births:
            followed = rep.births[0]
            break

    stats: list[FrameStats] = []
    lost_reason: str | None = None if followed is not None else "never_born"
    alive_at_end = False
    lost_seen = False

    for k, rep in enumerate(reports):
        snap = next((s for s in rep.tracks if s.id == followed), None) if followed is not None else None
        if snap is not None and snap.status == TrackStatus.LOST:
            lost_seen = True
            lost_reason = snap.reason
        elif snap is not None and snap.status == TrackStatus.DEAD:
            lost_seen = True
            lost_reason = lost_reason or "missed_frames"
        if k == len(reports) - 1:
            alive_at_end = snap is not None and snap.status == TrackStatus.ACTIVE

        truth_center = None
        if truth is not None and k < len(truth):
            tb = truth.boxes[k]
            truth_center = (tb.px, tb.py)
        present = snap is not None and snap.status != TrackStatus.DEAD
        has_meas = present and snap.meas_pmf is not None
        stats.append(
            FrameStats(
                frame=rep.frame_index,
                est_pmf=np.asarray(snap.pmf.probs) if present else None,
                meas_pmf=np.asarray(snap.meas_pmf.probs) if has_meas else None,
                est_center=(snap.box.px, snap.box.py) if present else None,
                meas_center=(snap.meas_box.px, snap.meas_box.py) if has_meas else None,
                truth_center=truth_center,
                lost=lost_seen,
            )
        )

    return SequenceResult(
        sequence_id=sequence_id,
        mode=mode,
        num_classes=num_classes,
        lost_at_final=not alive_at_end,
        lost_reason=lost_reason if not alive_at_end else None,
        frames=tuple(stats),
    )


def run_experiment(suite: list[ScenarioConfig], cfg: TrackerConfig) -> ExperimentReport:
    """Run both tracker modes over every scenario on identical detections."""
    if not suite:
        raise ValueError("suite must not be empty")
    results: list[SequenceResult] = []
    lost = {m: 0 for m in MODES}
    for i, scenario in enumerate(suite):
        frames, truth = generate(scenario)
        seq_id = f"seq_{i:03d}"
        for mode in MODES:
            reports = run_tracker(frames, replace(cfg, mode=mode))
            res = sequence_result(reports, truth, mode, seq_id, scenario.num_classes)
            results.append(res)
            lost[mode] += int(res.lost_at_final)
    return ExperimentReport(
        n=len(suite),
        lost_robust=lost["robust"],
        lost_standard=lost["standard"],
        results=tuple(results),
    )


def difficulty_sweep(
    base: ScenarioConfig,
    suite_size: int,
    correct_confs: list[float],
    cfg: TrackerConfig,
) -> list[tuple[float, int, int]]:
    """Robust/standard lost counts per detector-confidence level, same seeds throughout."""
    from .sim import make_corruption_suite

    out = []
    for conf in correct_confs:
        suite = make_corruption_suite(replace(base, correct_conf=conf), suite_size)
        report = run_experiment(suite, cfg)
        out.append((conf, report.lost_robust, report.lost_standard))
    return out


def rmse_px(result: SequenceResult) -> float:
    """RMS center error (px) over frames where both track and truth exist."""
    if not any(fs.truth_center is not None for fs in result.frames):
        raise NoTruth("sequence has no ground truth")
    errs = [fs.err_px ** 2 for fs in result.frames if not math.isnan(fs.err_px)]
    if not errs:
        return math.nan
    return math.sqrt(sum(errs) / len(errs))


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


def emit_plot_data(results: list[SequenceResult], out_dir: str | Path) -> list[Path]:
    """One CSV per result: per-frame estimate and measurement PMFs plus x-positions.

    Columns: frame, the estimated PMF (one column per class plus background),
    the measured PMF likewise, px_estimate, px_measurement, px_truth, lost_flag.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for res in results:
        n = res.num_classes + 1
        names = [f"class{i}" for i in range(1, res.num_classes + 1)] + ["background"]
        header = (
            ["frame"]
            + [f"est_{c}" for c in names]
            + [f"meas_{c}" for c in names]
            + ["px_estimate", "px_measurement", "px_truth", "lost_flag"]
        )
        path = out_dir / f"{res.sequence_id}_{res.mode}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for fs in res.frames:
                est = list(fs.est_pmf) if fs.est_pmf is not None else [math.nan] * n
                meas = list(fs.meas_pmf) if fs.meas_pmf is not None else [math.nan] * n
                row = (
                    [str(fs.frame)]
                    + [_fmt(v) for v in est]
                    + [_fmt(v) for v in meas]
                    + [
                        _fmt(fs.est_center[0] if fs.est_center else None),
                        _fmt(fs.meas_center[0] if fs.meas_center else None),
                        _fmt(fs.truth_center[0] if fs.truth_center else None),
                        str(int(fs.lost)),
                    ]
                )
                writer.writerow(row)
        written.append(path)
    return written
