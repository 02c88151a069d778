"""Detector adapters producing raw per-anchor proposals.

An adapter turns one RGB image into the full pre-NMS anchor grid: decoded
boxes in original-image pixel coordinates plus a class-probability vector
per anchor.  No suppression happens here on purpose; downstream fusion
replaces NMS and wants the whole cloud.

Supported family: torchvision SSD (``ssd300_vgg16`` and
``ssdlite320_mobilenet_v3_large``).  These models put the background class
at logit index 0; the adapter moves it to the last position so every
emitted vector is object classes first, background last.  Models without
an explicit background logit would need one synthesized as
``1 - objectness`` instead; no such family is wired up yet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch


class ModelLoadError(Exception):
    """The requested detector could not be constructed or its weights loaded."""


@dataclass(frozen=True)
class RawProposals:
    """Per-anchor output for one image: (A, 4) xyxy boxes and (A, M+1) probabilities."""

    boxes_xyxy: np.ndarray
    class_probs: np.ndarray  # background last


_TORCHVISION_BUILDERS = {
    "torchvision/ssd300_vgg16": "ssd300_vgg16",
    "torchvision/ssdlite320_mobilenet_v3_large": "ssdlite320_mobilenet_v3_large",
}


class TorchvisionSSD:
    """Raw-anchor access to a torchvision SSD model.

    ``weights_path`` loads a local checkpoint (state dict); with ``None``
    the model keeps its random initialization, which still produces a
    schema-valid anchor grid and is what the contract tests run against.
    """

    def __init__(self, model_id: str, num_classes: int, weights_path: str | None = None):
        try:
            builder_name = _TORCHVISION_BUILDERS[model_id]
        except KeyError:
            raise ModelLoadError(
                f"unknown model {model_id!r}; supported: {sorted(_TORCHVISION_BUILDERS)}"
            ) from None
        try:
            import torchvision.models.detection as tvd

            builder = getattr(tvd, builder_name)
            # num_classes counts the background, which torchvision keeps at index 0
            self.model = builder(weights=None, weights_backbone=None, num_classes=num_classes + 1)
        except Exception as exc:  # construction failures surface as load errors
            raise ModelLoadError(f"could not build {model_id}: {exc}") from exc
        if weights_path is not None:
            try:
                state = torch.load(weights_path, map_location="cpu", weights_only=True)
                self.model.load_state_dict(state)
            except Exception as exc:
                raise ModelLoadError(f"could not load weights from {weights_path}: {exc}") from exc
        self.model.eval()
        self.num_classes = num_classes

    @torch.no_grad()
    def detect(self, image_rgb: np.ndarray) -> RawProposals:
        """All anchors for one HxWx3 uint8 image, boxes in original pixels."""
        orig_h, orig_w = image_rgb.shape[:2]
        tensor = torch.from_numpy(image_rgb).permute(2, 0, 1).to(torch.float32) / 255.0

        model = self.model
        images, _ = model.transform([tensor], None)
        features = model.backbone(images.tensors)
        features = list(features.values())
        head = model.head(features)
        anchors = model.anchor_generator(images, features)

        boxes = model.box_coder.decode_single(head["bbox_regression"][0], anchors[0])
        resized_h, resized_w = images.image_sizes[0]
        boxes[:, 0::2] = boxes[:, 0::2].clamp(0, resized_w) * (orig_w / resized_w)
        boxes[:, 1::2] = boxes[:, 1::2].clamp(0, resized_h) * (orig_h / resized_h)

        probs = torch.softmax(head["cls_logits"][0], dim=-1)
        # background sits at column 0; rotate it to the end
        probs = torch.cat([probs[:, 1:], probs[:, :1]], dim=1)

        return RawProposals(
            boxes_xyxy=boxes.numpy().astype(np.float64),
            class_probs=probs.numpy().astype(np.float64),
        )


def build_detector(model_id: str, num_classes: int, weights_path: str | None) -> TorchvisionSSD:
    if model_id not in _TORCHVISION_BUILDERS:
        raise ModelLoadError(
            f"unknown model {model_id!r}; supported: {sorted(_TORCHVISION_BUILDERS)}"
        )
    return TorchvisionSSD(model_id, num_classes, weights_path)
