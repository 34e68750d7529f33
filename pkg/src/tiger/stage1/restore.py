"""Per-region latent restoration and full-canvas mask reassembly."""

from __future__ import annotations

import logging

import numpy as np
import torch

from ..diffusion.sampler import sample_region
from ..diffusion.schedule import NoiseSchedule
from ..diffusion.textcond import CharTextEncoder
from ..diffusion.unet import DualUNet
from ..diffusion.vae import ToyVAE, image_to_tensor, tensor_to_image, tensor_to_mask
from ..regions import MODEL_CROP_H, MODEL_CROP_W, RegionPlacement

log = logging.getLogger(__name__)


def restore_region(
    crop: np.ndarray,
    transcript: str,
    model: DualUNet,
    text_encoder: CharTextEncoder,
    vae: ToyVAE,
    sched: NoiseSchedule,
    steps: int = 50,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Restore one rectified region; returns (rgb image, glyph mask)."""
    if crop.shape[:2] != (MODEL_CROP_H, MODEL_CROP_W):
        raise ValueError(f"crop must be {MODEL_CROP_H}x{MODEL_CROP_W}, got {crop.shape[:2]}")
    if len(transcript) > text_encoder.max_len:
        log.warning("transcript %r truncated to max_len=%d", transcript, text_encoder.max_len)
        transcript = transcript[: text_encoder.max_len]
    with torch.no_grad():
        z_cond = vae.encode(image_to_tensor(crop))
        cond = text_encoder.embed_text(transcript, null=(transcript == ""))
        g = torch.Generator().manual_seed(seed)
        z_rgb0, z_mask0 = sample_region(z_cond, cond, model, sched, steps=steps, generator=g)
        rgb = tensor_to_image(vae.decode(z_rgb0))
        mask = tensor_to_mask(vae.decode(z_mask0))
    return rgb, np.clip(mask, 0.0, 1.0)


def reassemble(
    pieces: list[tuple[np.ndarray, RegionPlacement]],
    canvas_h: int,
    canvas_w: int,
    interp: str = "bilinear",
) -> np.ndarray:
    """Inverse-rectify mask pieces onto a zero canvas; overlaps take the max."""
    canvas = np.zeros((canvas_h, canvas_w), dtype=np.float64)
    for piece, placement in pieces:
        q = placement.quad
        if q[:, 0].min() < -0.5 or q[:, 1].min() < -0.5 or q[:, 0].max() > canvas_w - 0.5 or q[:, 1].max() > canvas_h - 0.5:
            raise ValueError(f"placement quad outside canvas: {q.tolist()}")
        warped, _ = placement.insert(piece, canvas_h, canvas_w, interp=interp)
        canvas = np.maximum(canvas, warped)
    return canvas
