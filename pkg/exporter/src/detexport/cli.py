"""Command-line wrapper around the exporter.

Example:

    detexport --images camera_trap/seq01 --classes bear,lynx,wolf,wolverine \\
        --model torchvision/ssd300_vgg16 --weights ssd_carnivores.pt \\
        --out seq01.detections.jsonl
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .detectors import ModelLoadError
from .export import ExportConfig, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detexport",
        description="Export anchor-box detector proposals to classtrack detections JSONL",
    )
    parser.add_argument("--images", required=True, help="folder of images, frames ordered by filename")
    parser.add_argument("--out", required=True, help="output detections JSONL path")
    parser.add_argument(
        "--model",
        default="torchvision/ssdlite320_mobilenet_v3_large",
        help="detector identifier (torchvision/ssd300_vgg16 or torchvision/ssdlite320_mobilenet_v3_large)",
    )
    parser.add_argument("--classes", required=True, help="comma-separated object class names (background implied)")
    parser.add_argument("--weights", default=None, help="local checkpoint path; omit for random init")
    parser.add_argument("--score-floor", type=float, default=0.2, help="min top non-background confidence")
    parser.add_argument("--max-proposals", type=int, default=32, help="cap on proposals per frame")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    image_dir = Path(args.images)
    if not image_dir.is_dir():
        print(f"error: {image_dir} is not a directory", file=sys.stderr)
        return 2
    names = tuple(s.strip() for s in args.classes.split(",") if s.strip())
    try:
        cfg = ExportConfig(
            model=args.model,
            image_dir=image_dir,
            class_names=names,
            out_path=Path(args.out),
            score_floor=args.score_floor,
            max_proposals=args.max_proposals,
            weights_path=args.weights,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out = export(cfg)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
