"""Seeded degradation pipeline producing LR images at HR resolution.

Fixed order: Gaussian blur -> bicubic downscale -> additive Gaussian noise ->
intensity quantization -> bicubic upscale back to the HR size. An optional
seeded order shuffle of the first four steps exists but defaults off.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import ndimage

from .. import imaging


@dataclasses.dataclass
class DegradationConfig:
    blur_sigma: float = 1.5
    downscale_factor: int = 4
    noise_sigma: float = 0.02
    quantization_levels: int = 64
    seed: int = 0
    shuffle_order: bool = False

    def __post_init__(self):
        if not 0.0 <= self.blur_sigma <= 4.0:
            raise ValueError(f"blur_sigma must lie in [0, 4], got {self.blur_sigma}")
        if self.downscale_factor not in (1, 2, 4):
            raise ValueError(f"downscale_factor must be one of 1, 2, 4, got {self.downscale_factor}")
        if not 0.0 <= self.noise_sigma <= 0.1:
            raise ValueError(f"noise_sigma must lie in [0, 0.1], got {self.noise_sigma}")
        if self.quantization_levels not in (256, 64, 32):
            raise ValueError(f"quantization_levels must be one of 256, 64, 32, got {self.quantization_levels}")


def _blur(img: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return img
    if img.ndim == 3:
        return ndimage.gaussian_filter(img, sigma=(sigma, sigma, 0.0), mode="nearest")
    return ndimage.gaussian_filter(img, sigma=sigma, mode="nearest")


def degrade(hr: np.ndarray, cfg: DegradationConfig) -> np.ndarray:
    """Deterministic LR synthesis; identical (hr, cfg) gives identical bytes."""
    hr = imaging.validate_image(hr)
    H, W = hr.shape[:2]
    rng = np.random.default_rng(cfg.seed)

    def down(x):
        f = cfg.downscale_factor
        if f == 1:
            return x
        return imaging.resize(x, max(1, H // f), max(1, W // f), "bicubic")

    def noise(x):
        if cfg.noise_sigma <= 0:
            return x
        return x + cfg.noise_sigma * rng.standard_normal(x.shape)

    def quantize(x):
        q = cfg.quantization_levels - 1
        return np.round(np.clip(x, 0.0, 1.0) * q) / q

    steps = [lambda x: _blur(x, cfg.blur_sigma), down, noise, quantize]
    if cfg.shuffle_order:
        order = rng.permutation(4)
        steps = [steps[i] for i in order]
    out = hr
    for step in steps:
        out = step(out)
    if out.shape[:2] != (H, W):
        out = imaging.resize(out, H, W, "bicubic")
    return np.clip(out, 0.0, 1.0)
