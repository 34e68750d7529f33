"""Region detection: manifest annotations or a self-contained toy detector.

The toy detector targets clean synthetic images: gradient energy marks the
text's backing box, connected components propose candidates, and each box is
tightened to its binarized ink before recognition supplies the transcript.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .. import imaging
from ..corpus.atlas import GlyphAtlas
from ..metrics.toyocr import otsu_threshold, toy_ocr
from ..regions import (
    RegionPlacement,
    TextRegionInstance,
    placement_for_model,
    placement_native,
    reading_order,
)

DETECT_SOURCES = ("manifest", "toy_ocr")


def _box_to_quad(x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)


def _tighten_to_ink(gray: np.ndarray, x0: int, y0: int, x1: int, y1: int):
    window = gray[y0 : y1 + 1, x0 : x1 + 1]
    if window.size == 0 or float(window.max() - window.min()) < 1e-6:
        return None
    ink = window > otsu_threshold(window)
    if ink.mean() > 0.5:
        ink = ~ink
    if not ink.any():
        return None
    rows = np.where(ink.any(axis=1))[0]
    cols = np.where(ink.any(axis=0))[0]
    return x0 + cols[0], y0 + rows[0], x0 + cols[-1], y0 + rows[-1]


def detect_regions_toy(
    img: np.ndarray,
    atlas: GlyphAtlas,
    min_height: int = 12,
    max_height: int = 96,
) -> list[TextRegionInstance]:
    gray = imaging.to_gray(img)
    mag = imaging.sobel(gray).magnitude
    thr = float(mag.mean() + 2.0 * mag.std())
    edges = mag > max(thr, 1e-3)
    linked = ndimage.binary_dilation(edges, structure=np.ones((3, 9), dtype=bool))
    labels, n = ndimage.label(linked)
    regions = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        y0, y1 = sl[0].start, sl[0].stop - 1
        x0, x1 = sl[1].start, sl[1].stop - 1
        h, w = y1 - y0 + 1, x1 - x0 + 1
        if not (min_height <= h <= max_height) or w < h * 0.8:
            continue
        tight = _tighten_to_ink(gray, x0, y0, x1, y1)
        if tight is None:
            continue
        tx0, ty0, tx1, ty1 = tight
        if ty1 - ty0 + 1 < min_height // 2 or tx1 - tx0 < 2:
            continue
        region = TextRegionInstance(quad=_box_to_quad(tx0, ty0, tx1, ty1), transcript="", confidence=0.0)
        crop = placement_native(region, target_h=2 * atlas.glyph_h).extract(img)
        text, conf = toy_ocr(crop, atlas)
        if not text:
            continue
        regions.append(TextRegionInstance(quad=region.quad, transcript=text, confidence=conf))
    return regions


def detect_regions(
    img: np.ndarray,
    source: str = "manifest",
    annotations: list[TextRegionInstance] | None = None,
    atlas: GlyphAtlas | None = None,
) -> list[tuple[TextRegionInstance, RegionPlacement]]:
    """Localize text regions and pair each with its model-crop placement.

    Results are in reading order (top-to-bottom, left-to-right). An image with
    no regions yields an empty list, so the downstream mask is all-zero.
    """
    if source not in DETECT_SOURCES:
        raise ValueError(f"source must be one of {DETECT_SOURCES}, got {source!r}")
    if source == "manifest":
        if annotations is None:
            raise ValueError("manifest mode requires annotations")
        regions = list(annotations)
    else:
        if atlas is None:
            raise ValueError("toy_ocr mode requires a glyph atlas")
        regions = detect_regions_toy(img, atlas)
    ordered = [regions[i] for i in reading_order(regions)]
    return [(r, placement_for_model(r)) for r in ordered]
