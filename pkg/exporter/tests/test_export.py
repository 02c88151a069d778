"""Contract tests for the exporter.

The output must be consumable by the classtrack pipeline; that contract is
exercised the way a user would, by invoking the ``classtrack track`` CLI on
the exported file.  The detector runs with its random initialization (no
checkpoint download in CI); the contract is about schema and probability
validity, not detection quality.
"""

import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest
import torch
from PIL import Image

from detexport import ExportConfig, ModelLoadError, build_detector, export, list_images

MODEL = "torchvision/ssdlite320_mobilenet_v3_large"
CLASSES = ("bear", "lynx", "wolf")


@pytest.fixture(scope="module")
def image_dir(tmp_path_factory):
    rng = np.random.default_rng(0)
    folder = tmp_path_factory.mktemp("images")
    for name in ("frame_a.png", "frame_b.png"):
        pixels = rng.integers(0, 255, size=(48, 64, 3), dtype=np.uint8)
        pixels[10:35, 20:50] = (240, 220, 40)  # a bright blob to look at
        Image.fromarray(pixels).save(folder / name)
    return folder


@pytest.fixture(scope="module")
def exported(tmp_path_factory, image_dir):
    torch.manual_seed(0)
    out = tmp_path_factory.mktemp("out") / "dets.jsonl"
    cfg = ExportConfig(
        model=MODEL,
        image_dir=image_dir,
        class_names=CLASSES,
        out_path=out,
        score_floor=0.0,  # random-init confidences hover near uniform
        max_proposals=16,
    )
    return export(cfg)


def classtrack_cli():
    exe = shutil.which("classtrack")
    if exe:
        return [exe]
    return [sys.executable, "-m", "classtrack.cli"]


class TestExportedFile:
    def test_header_and_frames(self, exported):
        lines = exported.read_text().splitlines()
        header = json.loads(lines[0])
        assert header["type"] == "header"
        assert header["classes"] == list(CLASSES)
        assert header["background_last"] is True
        assert header["image_size"] == [64, 48]
        ts = [json.loads(l)["t"] for l in lines[1:]]
        assert ts == [0, 1]

    def test_proposals_shape_and_limits(self, exported):
        for line in exported.read_text().splitlines()[1:]:
            frame = json.loads(line)
            assert len(frame["proposals"]) <= 16
            assert frame["proposals"], "detector should fire with a zero score floor"
            for p in frame["proposals"]:
                px, py, l, h = p["box"]
                assert l > 0 and h > 0
                assert len(p["conf"]) == len(CLASSES) + 1

    def test_confidences_are_exact_simplexes(self, exported):
        # equivalent to validate_pmf at 1e-9: nonnegative, entries <= 1, sum == 1
        for line in exported.read_text().splitlines()[1:]:
            for p in json.loads(line)["proposals"]:
                conf = p["conf"]
                assert all(0.0 <= v <= 1.0 for v in conf)
                assert abs(math.fsum(conf) - 1.0) <= 1e-9

    def test_track_cli_accepts_output(self, exported, tmp_path):
        result = subprocess.run(
            classtrack_cli()
            + ["track", "--detections", str(exported), "--mode", "robust", "--out", str(tmp_path / "t.jsonl")],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "frames=2" in result.stdout


class TestExportBehavior:
    def test_empty_folder_gives_header_only(self, tmp_path):
        folder = tmp_path / "none"
        folder.mkdir()
        out = export(
            ExportConfig(model=MODEL, image_dir=folder, class_names=CLASSES, out_path=tmp_path / "e.jsonl")
        )
        lines = out.read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["type"] == "header"

    def test_unreadable_image_consumes_frame_index(self, tmp_path, image_dir, capsys):
        folder = tmp_path / "mixed"
        folder.mkdir()
        shutil.copy(image_dir / "frame_a.png", folder / "a.png")
        (folder / "b.png").write_bytes(b"not an image")
        shutil.copy(image_dir / "frame_b.png", folder / "c.png")

        torch.manual_seed(0)
        out = export(
            ExportConfig(
                model=MODEL,
                image_dir=folder,
                class_names=CLASSES,
                out_path=tmp_path / "m.jsonl",
                score_floor=0.0,
            )
        )
        ts = [json.loads(l)["t"] for l in out.read_text().splitlines()[1:]]
        assert ts == [0, 2]  # index 1 consumed by the unreadable file
        assert "skipping unreadable image" in capsys.readouterr().err

    def test_score_floor_filters(self, tmp_path, image_dir):
        torch.manual_seed(0)
        out = export(
            ExportConfig(
                model=MODEL,
                image_dir=image_dir,
                class_names=CLASSES,
                out_path=tmp_path / "f.jsonl",
                score_floor=0.999,  # nothing clears this with random weights
            )
        )
        for line in out.read_text().splitlines()[1:]:
            assert json.loads(line)["proposals"] == []

    def test_frames_sorted_by_filename(self, image_dir):
        names = [p.name for p in list_images(image_dir)]
        assert names == sorted(names)

    def test_unknown_model_rejected(self, tmp_path, image_dir):
        with pytest.raises(ModelLoadError):
            build_detector("torchvision/yolo9000", 3, None)
        with pytest.raises(ModelLoadError):
            export(
                ExportConfig(
                    model="nonsense", image_dir=image_dir, class_names=CLASSES, out_path=tmp_path / "x.jsonl"
                )
            )

    def test_bad_weights_path_rejected(self, tmp_path, image_dir):
        with pytest.raises(ModelLoadError):
            export(
                ExportConfig(
                    model=MODEL,
                    image_dir=image_dir,
                    class_names=CLASSES,
                    out_path=tmp_path / "x.jsonl",
                    weights_path=str(tmp_path / "missing.pt"),
                )
            )

    def test_config_validation(self, tmp_path, image_dir):
        with pytest.raises(ValueError):
            ExportConfig(model=MODEL, image_dir=image_dir, class_names=(), out_path=tmp_path / "x")
        with pytest.raises(ValueError):
            ExportConfig(
                model=MODEL, image_dir=image_dir, class_names=CLASSES, out_path=tmp_path / "x", score_floor=2.0
            )


class TestCli:
    def test_cli_round_trip_through_tracker(self, tmp_path, image_dir):
        from detexport.cli import main

        torch.manual_seed(0)
        out = tmp_path / "cli.jsonl"
        code = main(
            [
                "--images", str(image_dir),
                "--out", str(out),
                "--model", MODEL,
                "--classes", ",".join(CLASSES),
                "--score-floor", "0.0",
            ]
        )
        assert code == 0
        result = subprocess.run(
            classtrack_cli()
            + ["track", "--detections", str(out), "--mode", "robust", "--out", str(tmp_path / "t.jsonl")],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr

    def test_cli_missing_dir(self, tmp_path):
        from detexport.cli import main

        assert main(["--images", str(tmp_path / "nope"), "--out", "x", "--classes", "a"]) == 2
