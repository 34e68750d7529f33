"""Pixel-space primitives shared by every other module.

Images are plain numpy float arrays with values in [0, 1]:
shape (H, W) for grayscale or (H, W, 3) for RGB. All functions are pure.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

# Rec.601 luminance weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# Classical unnormalized 3x3 Sobel kernels (applied as correlation masks).
SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()


@dataclasses.dataclass(frozen=True)
class Box:
    """Axis-aligned integer pixel rectangle; (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")


@dataclasses.dataclass(frozen=True)
class GradientMap:
    """Horizontal/vertical Sobel responses of a grayscale image."""

    gx: np.ndarray
    gy: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.sqrt(self.gx**2 + self.gy**2)


def validate_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] not in (1, 3)):
        raise ValueError(f"{name} must have shape (H, W), (H, W, 1) or (H, W, 3), got {img.shape}")
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} has a zero dimension: {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError(f"{name} contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"{name} values outside [0, 1]: min={img.min()}, max={img.max()}")
    return img


def load_image(path) -> np.ndarray:
    """Read an 8-bit PNG as a float image in [0, 1] (grayscale or RGB)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    with PILImage.open(path) as im:
        if im.mode in ("L", "I;16"):
            im = im.convert("L")
        else:
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"image has a zero dimension: {path}")
    return arr


def save_image(img: np.ndarray, path) -> None:
    """Write a float image to 8-bit PNG with round-half-up quantization."""
    img = validate_image(img)
    path = Path(path)
    if not path.parent.exists():
        raise FileNotFoundError(f"parent directory does not exist: {path.parent}")
    q = np.floor(img * 255.0 + 0.5).clip(0, 255).astype(np.uint8)
    PILImage.fromarray(q, mode="L" if q.ndim == 2 else "RGB").save(path, format="PNG")


def to_gray(img: np.ndarray) -> np.ndarray:
    """Rec.601 luminance; grayscale input is returned unchanged."""
    img = validate_image(img)
    if img.ndim == 2:
        return img
    return img @ np.asarray(LUMA_WEIGHTS, dtype=np.float64)


def _source_coords(out_len: int, in_len: int) -> np.ndarray:
    # Pixel-center convention: dst center (i + 0.5) maps to src (i + 0.5) * scale - 0.5.
    scale = in_len / out_len
    return (np.arange(out_len, dtype=np.float64) + 0.5) * scale - 0.5


def _cubic_weights(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    # Catmull-Rom kernel evaluated at offsets (1+t, t, 1-t, 2-t) for t in [0, 1).
    def k(x):
        x = np.abs(x)
        return np.where(
            x <= 1.0,
            (a + 2.0) * x**3 - (a + 3.0) * x**2 + 1.0,
            np.where(x < 2.0, a * x**3 - 5.0 * a * x**2 + 8.0 * a * x - 4.0 * a, 0.0),
        )

    return np.stack([k(t + 1.0), k(t), k(1.0 - t), k(2.0 - t)], axis=-1)


def _interp_axis(img: np.ndarray, out_len: int, axis: int, method: str) -> np.ndarray:
    img = np.moveaxis(img, axis, 0)
    in_len = img.shape[0]
    coords = _source_coords(out_len, in_len)
    if method == "nearest":
        idx = np.clip(np.floor(coords + 0.5).astype(int), 0, in_len - 1)
        out = img[idx]
    elif method == "bilinear":
        i0 = np.floor(coords).astype(int)
        t = coords - i0
        a = img[np.clip(i0, 0, in_len - 1)]
        b = img[np.clip(i0 + 1, 0, in_len - 1)]
        t = t.reshape((-1,) + (1,) * (img.ndim - 1))
        out = a * (1.0 - t) + b * t
    elif method == "bicubic":
        i0 = np.floor(coords).astype(int)
        t = coords - i0
        w = _cubic_weights(t)  # (out_len, 4)
        taps = [img[np.clip(i0 + d, 0, in_len - 1)] for d in (-1, 0, 1, 2)]
        wr = w.T.reshape((4, -1) + (1,) * (img.ndim - 1))
        out = sum(wr[j] * taps[j] for j in range(4))
    else:
        raise ValueError(f"unknown resize method: {method!r}")
    return np.moveaxis(out, 0, axis)


def resize(img: np.ndarray, out_h: int, out_w: int, method: str = "bilinear") -> np.ndarray:
    """Separable resampling with edge clamping; output is clamped to [0, 1]."""
    img = validate_image(img)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target dimensions must be positive, got ({out_h}, {out_w})")
    if (out_h, out_w) == img.shape[:2]:
        return img.copy()
    out = _interp_axis(img, out_h, 0, method)
    out = _interp_axis(out, out_w, 1, method)
    return np.clip(out, 0.0, 1.0)


def crop(img: np.ndarray, box: Box) -> np.ndarray:
    img = validate_image(img)
    h, w = img.shape[:2]
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise ValueError(f"box {box} exceeds image bounds ({h}, {w})")
    return img[box.y : box.y + box.h, box.x : box.x + box.w].copy()


def paste(canvas: np.ndarray, patch: np.ndarray, box: Box) -> np.ndarray:
    canvas = validate_image(canvas)
    patch = validate_image(patch, "patch")
    h, w = canvas.shape[:2]
    if patch.shape[:2] != (box.h, box.w):
        raise ValueError(f"patch shape {patch.shape[:2]} does not match box extents ({box.h}, {box.w})")
    if patch.ndim != canvas.ndim:
        raise ValueError("patch and canvas must have the same channel count")
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise ValueError(f"box {box} exceeds canvas bounds ({h}, {w})")
    out = canvas.copy()
    out[box.y : box.y + box.h, box.x : box.x + box.w] = patch
    return out


def sobel(img: np.ndarray) -> GradientMap:
    """3x3 Sobel responses (correlation) with replicate border padding."""
    g = to_gray(img)
    p = np.pad(g, 1, mode="edge")
    gx = np.zeros_like(g)
    gy = np.zeros_like(g)
    for i in range(3):
        for j in range(3):
            window = p[i : i + g.shape[0], j : j + g.shape[1]]
            if SOBEL_X[i, j] != 0.0:
                gx += SOBEL_X[i, j] * window
            if SOBEL_Y[i, j] != 0.0:
                gy += SOBEL_Y[i, j] * window
    return GradientMap(gx=gx, gy=gy)


def apply_homography(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Map (N, 2) points through a 3x3 projective matrix."""
    pts = np.asarray(pts, dtype=np.float64)
    ph = np.hstack([pts, np.ones((pts.shape[0], 1))])
    q = ph @ H.T
    return q[:, :2] / q[:, 2:3]


def homography_from_points(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Exact homography from 4 point pairs (src -> dst), normalized so H[2,2] = 1."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("homography_from_points requires exactly 4 point pairs")
    A = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        A[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        A[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise ValueError("degenerate point configuration for homography") from e
    return np.concatenate([h, [1.0]]).reshape(3, 3)


def warp_homography(
    img: np.ndarray,
    H: np.ndarray,
    out_h: int,
    out_w: int,
    interp: str = "bilinear",
) -> tuple[np.ndarray, np.ndarray]:
    """Warp by a homography mapping source coords to output coords.

    Output pixel (u, v) samples the source at H^-1 (u, v, 1). Samples that fall
    outside the source pixel-center rectangle are zero-filled and marked False
    in the returned validity mask.
    """
    img = validate_image(img)
    H = np.asarray(H, dtype=np.float64)
    if H.shape != (3, 3):
        raise ValueError("homography must be a 3x3 matrix")
    if abs(np.linalg.det(H)) <= 1e-12:
        raise ValueError("homography is singular")
    h, w = img.shape[:2]
    Hinv = np.linalg.inv(H)
    uu, vv = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    denom = Hinv[2, 0] * uu + Hinv[2, 1] * vv + Hinv[2, 2]
    denom = np.where(np.abs(denom) < 1e-12, 1e-12, denom)
    sx = (Hinv[0, 0] * uu + Hinv[0, 1] * vv + Hinv[0, 2]) / denom
    sy = (Hinv[1, 0] * uu + Hinv[1, 1] * vv + Hinv[1, 2]) / denom

    valid = (sx >= 0.0) & (sx <= w - 1.0) & (sy >= 0.0) & (sy <= h - 1.0)
    if interp == "nearest":
        ix = np.clip(np.floor(sx + 0.5).astype(int), 0, w - 1)
        iy = np.clip(np.floor(sy + 0.5).astype(int), 0, h - 1)
        out = img[iy, ix]
    elif interp == "bilinear":
        x0 = np.clip(np.floor(sx).astype(int), 0, w - 1)
        y0 = np.clip(np.floor(sy).astype(int), 0, h - 1)
        x1 = np.clip(x0 + 1, 0, w - 1)
        y1 = np.clip(y0 + 1, 0, h - 1)
        tx = np.clip(sx - x0, 0.0, 1.0)
        ty = np.clip(sy - y0, 0.0, 1.0)
        if img.ndim == 3:
            tx = tx[..., None]
            ty = ty[..., None]
        out = (
            img[y0, x0] * (1 - tx) * (1 - ty)
            + img[y0, x1] * tx * (1 - ty)
            + img[y1, x0] * (1 - tx) * ty
            + img[y1, x1] * tx * ty
        )
    else:
        raise ValueError(f"unknown interpolation: {interp!r}")
    mask = valid if img.ndim == 2 else valid[..., None]
    out = np.where(mask, out, 0.0)
    return np.clip(out, 0.0, 1.0), valid
