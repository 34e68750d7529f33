"""Text rendering onto backgrounds and procedural background synthesis."""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import imaging
from ..regions import TextRegionInstance
from .atlas import GlyphAtlas


@dataclasses.dataclass
class RenderSpec:
    text: str
    origin: tuple[float, float]  # (x, y) of the line's top-left, pre-rotation
    scale: float = 1.0
    fg_color: tuple[float, float, float] = (0.0, 0.0, 0.0)
    bg_color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rotation: float = 0.0  # degrees, about the origin

    def __post_init__(self):
        if len(self.text) < 1:
            raise ValueError("text must be non-empty")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not -10.0 <= self.rotation <= 10.0:
            raise ValueError("rotation must lie in [-10, 10] degrees")


def compose_line_mask(atlas: GlyphAtlas, text: str) -> np.ndarray:
    """Binary line bitmap: glyphs left-to-right separated by the atlas spacing."""
    gh, gw = atlas.glyph_size
    sp = atlas.spacing
    missing = [c for c in text if c not in atlas.bitmaps]
    if missing:
        raise ValueError(f"characters outside charset: {missing!r}")
    n = len(text)
    line = np.zeros((gh, n * gw + (n - 1) * sp), dtype=bool)
    for i, ch in enumerate(text):
        x = i * (gw + sp)
        line[:, x : x + gw] |= atlas.bitmaps[ch]
    return line


def render_text(
    background: np.ndarray, atlas: GlyphAtlas, spec: RenderSpec
) -> tuple[np.ndarray, np.ndarray, TextRegionInstance]:
    """Paint a text line onto a copy of the background.

    Returns (image, glyph mask, region). The mask is 1 exactly where glyph
    foreground was written; a padded backing box in spec.bg_color sits behind
    the glyphs. The region quad is the tight rotated bounding box of the line.
    """
    background = imaging.validate_image(background)
    if background.ndim != 3:
        raise ValueError("render_text expects an RGB background")
    H, W = background.shape[:2]
    line = compose_line_mask(atlas, spec.text)
    lh, lw = line.shape
    pad = atlas.spacing

    theta = np.deg2rad(spec.rotation)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    ox, oy = spec.origin

    def fwd(pts):  # line (x, y) -> canvas (x, y)
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ (spec.scale * R).T + np.array([ox, oy])

    quad = fwd([[0, 0], [lw - 1.0, 0], [lw - 1.0, lh - 1.0], [0, lh - 1.0]])
    box = fwd(
        [[-pad, -pad], [lw - 1.0 + pad, -pad], [lw - 1.0 + pad, lh - 1.0 + pad], [-pad, lh - 1.0 + pad]]
    )
    if box[:, 0].min() < 0 or box[:, 1].min() < 0 or box[:, 0].max() > W - 1 or box[:, 1].max() > H - 1:
        raise ValueError("rendered quad overflows the background")

    x0 = int(np.floor(box[:, 0].min()))
    x1 = int(np.ceil(box[:, 0].max())) + 1
    y0 = int(np.floor(box[:, 1].min()))
    y1 = int(np.ceil(box[:, 1].max())) + 1
    xx, yy = np.meshgrid(np.arange(x0, x1, dtype=np.float64), np.arange(y0, y1, dtype=np.float64))
    inv = np.stack([xx - ox, yy - oy], axis=-1) @ (R / spec.scale)  # row-vector form of R^T (p - o) / s
    lx, ly = inv[..., 0], inv[..., 1]

    in_box = (lx >= -pad - 0.5) & (lx <= lw - 1 + pad + 0.5) & (ly >= -pad - 0.5) & (ly <= lh - 1 + pad + 0.5)
    ix = np.clip(np.floor(lx + 0.5).astype(int), 0, lw - 1)
    iy = np.clip(np.floor(ly + 0.5).astype(int), 0, lh - 1)
    in_line = (lx >= -0.5) & (lx <= lw - 0.5) & (ly >= -0.5) & (ly <= lh - 0.5)
    ink = in_line & line[iy, ix]

    img = background.copy()
    mask = np.zeros((H, W), dtype=np.float64)
    sub = img[y0:y1, x0:x1]
    sub[in_box] = np.asarray(spec.bg_color, dtype=np.float64)
    sub[ink] = np.asarray(spec.fg_color, dtype=np.float64)
    mask[y0:y1, x0:x1][ink] = 1.0

    region = TextRegionInstance(quad=quad, transcript=spec.text, confidence=1.0)
    return img, mask, region


def make_background(h: int, w: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded procedural background: multi-octave value noise over a soft gradient."""
    noise = np.zeros((h, w))
    amp_total = 0.0
    for octave, cell in enumerate([32, 16, 8]):
        gh = max(2, h // cell + 1)
        gw = max(2, w // cell + 1)
        amp = 0.5**octave
        grid = rng.random((gh, gw))
        noise += amp * imaging.resize(grid, h, w, "bilinear")
        amp_total += amp
    noise /= amp_total

    gdir = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    grad = (np.cos(gdir) * xx / max(w - 1, 1) + np.sin(gdir) * yy / max(h - 1, 1 )) * 0.5 + 0.5

    base = rng.uniform(0.25, 0.75, size=3)
    tone = 0.6 * noise + 0.4 * grad
    img = base[None, None, :] * (0.6 + 0.5 * tone[:, :, None])
    return np.clip(img, 0.0, 1.0)


def contrasting_colors(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Foreground/background pair with Rec.601 luminance gap of at least 0.45."""
    w = np.asarray(imaging.LUMA_WEIGHTS)
    for _ in range(100):
        fg = rng.random(3)
        bg = rng.random(3)
        if abs(float(fg @ w) - float(bg @ w)) >= 0.45:
            return fg, bg
    return np.zeros(3), np.ones(3)
