"""Template-matching OCR over a glyph atlas.

Recognition: binarize (Otsu), fix polarity so text is the minority class, then
decode left to right by sliding each glyph template over the current column
window and keeping the best normalized cross-correlation. Confidence is the
mean per-glyph correlation. Deterministic for fixed inputs; scores 1.0 on
clean renders of its own atlas.
"""

from __future__ import annotations

import numpy as np

from .. import imaging
from ..corpus.atlas import GlyphAtlas

MIN_GLYPH_NCC = 0.15


def otsu_threshold(gray: np.ndarray) -> float:
    """Classic between-class-variance maximization over a 256-bin histogram."""
    hist, edges = np.histogram(gray.ravel(), bins=256, range=(0.0, 1.0))
    hist = hist.astype(np.float64)
    total = hist.sum()
    if total == 0:
        return 0.5
    centers = (edges[:-1] + edges[1:]) / 2
    w0 = np.cumsum(hist)
    w1 = total - w0
    m0 = np.cumsum(hist * centers)
    mt = m0[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0 / w0
        mu1 = (mt - m0) / w1
        between = w0 * w1 * (mu0 - mu1) ** 2
    between[~np.isfinite(between)] = -1.0
    return float(centers[int(np.argmax(between))])


def _ncc(a: np.ndarray, b: np.ndarray) -> float:
    za = a.astype(np.float64) - a.mean()
    zb = b.astype(np.float64) - b.mean()
    denom = np.linalg.norm(za) * np.linalg.norm(zb)
    if denom == 0.0:
        return 0.0
    return float((za * zb).sum() / denom)


MATCH_SCALE = 2  # match at 2x atlas resolution; thin strokes survive rectification


def toy_ocr(region: np.ndarray, atlas: GlyphAtlas) -> tuple[str, float]:
    """Recognize one text line in a rectified region crop."""
    gray = imaging.to_gray(region)
    h, w = gray.shape
    gh = atlas.glyph_h * MATCH_SCALE
    gw = atlas.glyph_w * MATCH_SCALE
    if h != gh:
        w = max(1, int(round(w * gh / h)))
        # Nearest keeps small binary-ish crops crisp on the way up.
        gray = imaging.resize(gray, gh, w, "nearest" if h < gh else "bilinear")
    if float(gray.max() - gray.min()) < 1e-6:
        return "", 0.0
    fg = gray > otsu_threshold(gray)
    if fg.mean() > 0.5:
        fg = ~fg
    if not fg.any():
        return "", 0.0

    col_ink = fg.sum(axis=0)
    up = np.ones((MATCH_SCALE, MATCH_SCALE), dtype=bool)
    templates = {ch: np.kron(atlas.bitmaps[ch], up) for ch in atlas.charset}
    # Left margin of each template's ink inside its glyph box; windows are
    # aligned so ink starts line up, then jittered by +-1 column.
    margins = {ch: int(np.argmax(tpl.any(axis=0))) for ch, tpl in templates.items()}
    chars: list[str] = []
    scores: list[float] = []
    x = 0
    while x < w:
        if col_ink[x] == 0:
            x += 1
            continue
        best_score, best_char, best_x = -2.0, "", x
        for ch, tpl in templates.items():
            for dx in (-1, 0, 1):
                xs = x - margins[ch] + dx
                window = fg[:, max(0, xs) : xs + gw]
                if xs < 0:
                    window = np.pad(window, ((0, 0), (-xs, 0)))
                if window.shape[1] < gw:
                    window = np.pad(window, ((0, 0), (0, gw - window.shape[1])))
                s = _ncc(window, tpl)
                if s > best_score:
                    best_score, best_char, best_x = s, ch, xs
        if best_score < MIN_GLYPH_NCC:
            x += 1
            continue
        chars.append(best_char)
        scores.append(best_score)
        x = best_x + gw
    if not chars:
        return "", 0.0
    conf = float(np.clip(np.mean(scores), 0.0, 1.0))
    return "".join(chars), conf


class ToyOcrEngine:
    """Recognizer contract: (region image) -> (string, confidence in [0, 1])."""

    def __init__(self, atlas: GlyphAtlas):
        self.atlas = atlas

    def recognize(self, region: np.ndarray) -> tuple[str, float]:
        return toy_ocr(region, self.atlas)
