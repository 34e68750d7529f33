"""Glyph atlas: per-character binary bitmaps at a fixed glyph size.

Characters covered by the embedded font get fixed bitmaps; anything else is
a seeded composite glyph assembled from 2-4 stroke primitives, mimicking
complex (CJK-like) glyph structure.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import font


@dataclasses.dataclass
class GlyphAtlas:
    charset: str
    glyph_size: tuple[int, int]  # (gh, gw)
    bitmaps: dict[str, np.ndarray]
    composite_flags: dict[str, bool]
    stroke_counts: dict[str, int]  # composite glyphs only
    seed: int

    @property
    def glyph_h(self) -> int:
        return self.glyph_size[0]

    @property
    def glyph_w(self) -> int:
        return self.glyph_size[1]

    @property
    def spacing(self) -> int:
        """Inter-glyph gap used by the renderer: one eighth of a glyph width."""
        return max(1, round(self.glyph_w / 8))


def _scale_bitmap(small: np.ndarray, gh: int, gw: int) -> np.ndarray:
    """Nearest-neighbor upscale of a base bitmap, centered with a 1px margin."""
    sh, sw = small.shape
    scale = max(1, min((gh - 2) // sh, (gw - 2) // sw))
    big = np.kron(small, np.ones((scale, scale), dtype=bool))
    out = np.zeros((gh, gw), dtype=bool)
    oy = (gh - big.shape[0]) // 2
    ox = (gw - big.shape[1]) // 2
    out[oy : oy + big.shape[0], ox : ox + big.shape[1]] = big
    return out


def _draw_stroke(canvas: np.ndarray, p0, p1, thickness: int) -> None:
    """Rasterize a straight stroke segment onto a boolean canvas."""
    gh, gw = canvas.shape
    n = max(abs(p1[0] - p0[0]), abs(p1[1] - p0[1]), 1) * 2 + 1
    ys = np.round(np.linspace(p0[0], p1[0], n)).astype(int)
    xs = np.round(np.linspace(p0[1], p1[1], n)).astype(int)
    r = thickness // 2
    for y, x in zip(ys, xs):
        canvas[max(0, y - r) : min(gh, y + r + 1), max(0, x - r) : min(gw, x + r + 1)] = True


def _composite_glyph(rng: np.random.Generator, gh: int, gw: int) -> tuple[np.ndarray, int]:
    canvas = np.zeros((gh, gw), dtype=bool)
    thickness = max(1, gh // 8)
    n_strokes = int(rng.integers(2, 5))
    m = 1  # margin
    for _ in range(n_strokes):
        kind = rng.choice(["h", "v", "diag", "hook"])
        if kind == "h":
            y = int(rng.integers(m, gh - m))
            x0, x1 = sorted(rng.integers(m, gw - m, size=2))
            _draw_stroke(canvas, (y, int(x0)), (y, int(max(x1, x0 + gw // 3))), thickness)
        elif kind == "v":
            x = int(rng.integers(m, gw - m))
            y0, y1 = sorted(rng.integers(m, gh - m, size=2))
            _draw_stroke(canvas, (int(y0), x), (int(max(y1, y0 + gh // 3)), x), thickness)
        elif kind == "diag":
            y0, y1 = rng.integers(m, gh - m, size=2)
            x0, x1 = rng.integers(m, gw - m, size=2)
            _draw_stroke(canvas, (int(y0), int(x0)), (int(y1), int(x1)), thickness)
        else:  # hook: vertical drop then a short horizontal foot
            x = int(rng.integers(m + gw // 4, gw - m))
            y0 = int(rng.integers(m, gh // 2))
            y1 = int(rng.integers(gh // 2, gh - m))
            _draw_stroke(canvas, (y0, x), (y1, x), thickness)
            _draw_stroke(canvas, (y1, x), (y1, max(m, x - gw // 3)), thickness)
    return canvas, n_strokes


def build_atlas(charset: str, glyph_size: tuple[int, int] = (16, 16), seed: int = 0) -> GlyphAtlas:
    """Deterministic atlas for a charset; reproducible from (charset, glyph_size, seed)."""
    if len(charset) == 0:
        raise ValueError("charset must be non-empty")
    if len(set(charset)) != len(charset):
        raise ValueError("charset contains duplicate characters")
    gh, gw = glyph_size
    if gh < 8 or gw < 8:
        raise ValueError(f"glyph_size must be at least (8, 8), got {glyph_size}")
    bitmaps: dict[str, np.ndarray] = {}
    composite: dict[str, bool] = {}
    strokes: dict[str, int] = {}
    for ch in charset:
        if font.has_glyph(ch):
            bitmaps[ch] = _scale_bitmap(font.glyph_bitmap(ch), gh, gw)
            composite[ch] = False
        else:
            # Per-character stream keyed by codepoint so the atlas is
            # insensitive to charset ordering.
            rng = np.random.default_rng(np.random.SeedSequence([seed, ord(ch)]))
            bitmaps[ch], strokes[ch] = _composite_glyph(rng, gh, gw)
            composite[ch] = True
        if not bitmaps[ch].any():
            raise RuntimeError(f"glyph {ch!r} rendered empty")
    return GlyphAtlas(
        charset=charset,
        glyph_size=(gh, gw),
        bitmaps=bitmaps,
        composite_flags=composite,
        stroke_counts=strokes,
        seed=seed,
    )
