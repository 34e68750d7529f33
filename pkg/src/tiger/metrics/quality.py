"""Pixel-space image quality metrics: PSNR, SSIM, and region-cropped variants."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .. import imaging
from ..regions import TextRegionInstance, placement_native

PSNR_CAP_DB = 100.0


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """10 log10(1 / MSE) with peak 1.0; identical images cap at 100 dB."""
    x = imaging.validate_image(x)
    y = imaging.validate_image(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = (size - 1) / 2.0
    t = np.arange(size) - r
    w = np.exp(-(t**2) / (2.0 * sigma**2))
    return w / w.sum()


def _filter_valid(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Separable windowed mean; border rows/cols are sliced off afterwards so the
    # padding mode never reaches the reported values.
    r = (len(w) - 1) // 2
    out = ndimage.correlate1d(img, w, axis=0, mode="constant")
    out = ndimage.correlate1d(out, w, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(x: np.ndarray, y: np.ndarray, window: int = 11, k1: float = 0.01, k2: float = 0.03, sigma: float = 1.5) -> float:
    """Gaussian-windowed SSIM, mean over valid positions and channels."""
    x = imaging.validate_image(x)
    y = imaging.validate_image(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if min(x.shape[0], x.shape[1]) < window:
        raise ValueError(f"image smaller than SSIM window ({window})")
    if x.ndim == 2:
        x = x[:, :, None]
        y = y[:, :, None]
    w = _gaussian_window(window, sigma)
    c1 = k1**2
    c2 = k2**2
    vals = []
    for ch in range(x.shape[2]):
        a, b = x[:, :, ch], y[:, :, ch]
        mu_a = _filter_valid(a, w)
        mu_b = _filter_valid(b, w)
        var_a = _filter_valid(a * a, w) - mu_a**2
        var_b = _filter_valid(b * b, w) - mu_b**2
        cov = _filter_valid(a * b, w) - mu_a * mu_b
        s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
        vals.append(np.mean(s))
    return float(np.mean(vals))


def cropped_metrics(
    x: np.ndarray,
    y: np.ndarray,
    regions: list[TextRegionInstance],
    perceptual=None,
) -> dict:
    """Metrics over identically rectified region crops, averaged across regions.

    Images with zero regions yield None values rather than zeros.
    """
    x = imaging.validate_image(x)
    y = imaging.validate_image(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if not regions:
        return {"psnr_cr": None, "ssim_cr": None, "perceptual_cr": None}
    h, w = x.shape[:2]
    psnrs, ssims, percs = [], [], []
    for region in regions:
        q = np.asarray(region.quad)
        if q[:, 0].min() < -0.5 or q[:, 1].min() < -0.5 or q[:, 0].max() > w - 0.5 or q[:, 1].max() > h - 0.5:
            raise ValueError(f"region quad out of bounds: {q.tolist()}")
        pl = placement_native(region)
        cx = pl.extract(x)
        cy = pl.extract(y)
        psnrs.append(psnr(cx, cy))
        ssims.append(ssim(cx, cy))
        if perceptual is not None:
            percs.append(float(perceptual(cx, cy)))
    return {
        "psnr_cr": float(np.mean(psnrs)),
        "ssim_cr": float(np.mean(ssims)),
        "perceptual_cr": float(np.mean(percs)) if percs else None,
    }
