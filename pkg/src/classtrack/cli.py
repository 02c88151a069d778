"""Command-line surface: simulate -> track -> evaluate.

Exit codes: 0 success, 2 invalid config or schema violation, 3 I/O
failure, 4 non-monotonic frame index.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluate as ev
from . import io as cio
from .sim import InvalidConfig, ScenarioConfig, generate, make_corruption_suite
from .tracker import NonMonotonicFrameIndex

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FRAME_ORDER = 4


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = cio.load_scenario_config(args.config) if args.config else ScenarioConfig()
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.suite is not None:
            if args.suite < 1:
                print("error: --suite must be >= 1", file=sys.stderr)
                return EXIT_CONFIG
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            scenarios = make_corruption_suite(cfg, args.suite)
            for i, scenario in enumerate(scenarios):
                frames, truth = generate(scenario)
                stem = out_dir / f"seq_{i:03d}"
                cio.write_detections(
                    f"{stem}.detections.jsonl",
                    scenario.resolved_class_names(),
                    scenario.image_size,
                    frames,
                )
                cio.write_truth(f"{stem}.truth.jsonl", truth)
            print(f"wrote {args.suite} sequence pairs to {out_dir}")
        else:
            frames, truth = generate(cfg)
            cio.write_detections(args.out, cfg.resolved_class_names(), cfg.image_size, frames)
            if args.truth:
                cio.write_truth(args.truth, truth)
            print(f"wrote {len(frames)} frames to {args.out}")
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_track(args: argparse.Namespace) -> int:
    try:
        cfg = cio.load_tracker_config(args.config, mode=args.mode)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        data = cio.read_detections(args.detections, normalize_conf=args.normalize_conf)
    except cio.SchemaError as exc:
        print(f"error: {args.detections}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    truth = None
    if args.truth:
        try:
            truth = cio.read_truth(args.truth)
        except cio.SchemaError as exc:
            print(f"error: {args.truth}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO

    try:
        reports = ev.run_tracker(list(data.frames), cfg)
    except NonMonotonicFrameIndex as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FRAME_ORDER

    try:
        cio.write_tracks(args.out, reports)
        if args.plot_data:
            seq_id = Path(args.detections).name.split(".")[0]
            result = ev.sequence_result(reports, truth, cfg.mode, seq_id, data.num_classes)
            ev.emit_plot_data([result], args.plot_data)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    born = sum(len(r.births) for r in reports)
    dead = sum(len(r.deaths) for r in reports)
    lost = sum(len(r.lost) for r in reports)
    print(f"frames={len(reports)} born={born} dead={dead} lost={lost}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        base_cfg = cio.load_tracker_config(args.config)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    suite_dir = Path(args.suite_dir)
    det_paths = sorted(suite_dir.glob("*.detections.jsonl"))
    if not det_paths:
        print(f"error: no *.detections.jsonl files in {suite_dir}", file=sys.stderr)
        return EXIT_CONFIG

    per_sequence = []
    lost = {m: 0 for m in ev.MODES}
    rows = []
    for det_path in det_paths:
        seq_id = det_path.name.split(".")[0]
        try:
            data = cio.read_detections(det_path)
        except cio.SchemaError as exc:
            print(f"error: {det_path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        truth_path = det_path.with_name(det_path.name.replace(".detections.", ".truth."))
        truth = cio.read_truth(truth_path) if truth_path.exists() else None

        entry: dict = {"id": seq_id}
        for mode in ev.MODES:
            reports = ev.run_tracker(list(data.frames), replace(base_cfg, mode=mode))
            res = ev.sequence_result(reports, truth, mode, seq_id, data.num_classes)
            lost[mode] += int(res.lost_at_final)
            rmse = None
            if truth is not None:
                value = ev.rmse_px(res)
                rmse = None if value != value else value  # NaN when never active
            entry[mode] = {
                "lost_at_final": res.lost_at_final,
                "reason": res.lost_reason,
                "rmse_px": rmse,
            }
            rows.append(res)
        per_sequence.append(entry)

    n = len(det_paths)
    report = {
        "n": n,
        "lost_robust": lost["robust"],
        "lost_standard": lost["standard"],
        "per_sequence": per_sequence,
    }
    try:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"{'':24s}{'robust':>10s}{'standard':>10s}")
    print(f"{'lost tracks at end':24s}{lost['robust']:>7d}/{n:<2d}{lost['standard']:>7d}/{n:<2d}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classtrack",
        description="Box and class tracking over anchor-box detector output",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate synthetic detection sequences")
    p_sim.add_argument("--config", help="scenario config JSON (defaults used if omitted)")
    p_sim.add_argument("--out", required=True, help="detections file; a directory with --suite")
    p_sim.add_argument("--truth", help="also write ground truth to this path")
    p_sim.add_argument("--suite", type=int, help="write N numbered corruption-scenario pairs")
    p_sim.set_defaults(func=_cmd_simulate)

    p_trk = sub.add_parser("track", help="run the tracker over a detections file")
    p_trk.add_argument("--detections", required=True)
    p_trk.add_argument("--mode", choices=["robust", "standard"], default="robust")
    p_trk.add_argument("--config", help="tracker config JSON")
    p_trk.add_argument("--out", required=True, help="tracks output file (JSONL)")
    p_trk.add_argument("--plot-data", help="directory for per-sequence CSV plot data")
    p_trk.add_argument("--truth", help="ground-truth file for plot data")
    p_trk.add_argument(
        "--normalize-conf",
        action="store_true",
        help="rescale confidence vectors instead of requiring them to sum to 1",
    )
    p_trk.set_defaults(func=_cmd_track)

    p_ev = sub.add_parser("evaluate", help="compare both modes over a simulated suite")
    p_ev.add_argument("--suite-dir", required=True, help="directory from simulate --suite")
    p_ev.add_argument("--config", help="tracker config JSON")
    p_ev.add_argument("--report", required=True, help="JSON report output path")
    p_ev.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
