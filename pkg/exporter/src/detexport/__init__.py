"""Bridge real images into the classtrack pipeline.

Runs an anchor-box detector over a folder of images and writes the
classtrack detections JSONL format: raw pre-NMS proposals, center-format
boxes, class-probability vectors with the background last.  The two
packages share only that file contract.
"""

from .detectors import ModelLoadError, RawProposals, TorchvisionSSD, build_detector
from .export import ExportConfig, export, list_images

__all__ = [
    "ExportConfig",
    "export",
    "list_images",
    "ModelLoadError",
    "RawProposals",
    "TorchvisionSSD",
    "build_detector",
]
