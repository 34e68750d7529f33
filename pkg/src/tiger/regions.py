"""Text region geometry: annotated quads and their rectification transforms.

A region quad stores the pixel-center coordinates of its four corners in
clockwise order (top-left, top-right, bottom-right, bottom-left). Placements
map an axis-aligned crop onto the quad via an exact corner-to-corner
homography; the fixed model crop is 32x128 with aspect preserved by right
padding (the quad is extended along its width direction when the text is
shorter than the crop aspect).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import imaging

MODEL_CROP_H = 32
MODEL_CROP_W = 128


@dataclasses.dataclass
class TextRegionInstance:
    quad: np.ndarray  # (4, 2) float, clockwise from top-left, (x, y) pixel centers
    transcript: str
    confidence: float = 1.0

    def __post_init__(self):
        self.quad = np.asarray(self.quad, dtype=np.float64).reshape(4, 2)

    @property
    def center(self) -> np.ndarray:
        return self.quad.mean(axis=0)

    def edge_lengths(self) -> tuple[float, float]:
        """(width, height) as mean opposite-edge lengths between corner centers."""
        q = self.quad
        w = 0.5 * (np.linalg.norm(q[1] - q[0]) + np.linalg.norm(q[2] - q[3]))
        h = 0.5 * (np.linalg.norm(q[3] - q[0]) + np.linalg.norm(q[2] - q[1]))
        return float(w), float(h)

    @property
    def height_px(self) -> float:
        """Pixel extent of the text height; corners sit on pixel centers, so
        an n-row axis-aligned region measures exactly n."""
        return self.edge_lengths()[1] + 1.0

    def to_json(self) -> dict:
        return {
            "quad": [[float(x), float(y)] for x, y in self.quad],
            "text": self.transcript,
            "conf": float(self.confidence),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TextRegionInstance":
        return cls(quad=np.asarray(obj["quad"], dtype=np.float64), transcript=obj["text"], confidence=float(obj.get("conf", 1.0)))


def _crop_corners(crop_h: int, crop_w: int) -> np.ndarray:
    return np.array(
        [[0.0, 0.0], [crop_w - 1.0, 0.0], [crop_w - 1.0, crop_h - 1.0], [0.0, crop_h - 1.0]]
    )


@dataclasses.dataclass
class RegionPlacement:
    """Links a source quad on the canvas to an axis-aligned crop.

    `transform` maps crop pixel-center coordinates onto the (possibly
    width-extended) quad; `content_w` is the number of crop columns actually
    covered by the original quad.
    """

    quad: np.ndarray  # original quad on the canvas
    crop_h: int
    crop_w: int
    content_w: int
    transform: np.ndarray  # 3x3, crop coords -> canvas coords

    def extract(self, img: np.ndarray, interp: str = "bilinear") -> np.ndarray:
        out, _ = imaging.warp_homography(img, np.linalg.inv(self.transform), self.crop_h, self.crop_w, interp)
        return out

    def insert(self, piece: np.ndarray, canvas_h: int, canvas_w: int, interp: str = "bilinear") -> tuple[np.ndarray, np.ndarray]:
        """Warp a crop-space piece back onto an all-zero canvas; returns (image, validity)."""
        return imaging.warp_homography(piece, self.transform, canvas_h, canvas_w, interp)


def placement_for_model(region: TextRegionInstance, crop_h: int = MODEL_CROP_H, crop_w: int = MODEL_CROP_W) -> RegionPlacement:
    """Fixed-size rectification used by the restoration model.

    Scale is set by height; if the scaled text is narrower than the crop the
    quad is extended to the right so the crop corners still map exactly onto
    quad corners and the glyph aspect is preserved. Wider text is squeezed.
    """
    q = np.asarray(region.quad, dtype=np.float64)
    w_len = 0.5 * (np.linalg.norm(q[1] - q[0]) + np.linalg.norm(q[2] - q[3]))
    h_len = 0.5 * (np.linalg.norm(q[3] - q[0]) + np.linalg.norm(q[2] - q[1]))
    if h_len <= 0 or w_len <= 0:
        raise ValueError("degenerate region quad")
    content_w = int(round(w_len * (crop_h - 1) / h_len)) + 1
    content_w = max(2, min(crop_w, content_w))
    if content_w < crop_w:
        ext = (crop_w - 1.0) / (content_w - 1.0)
        dst = np.array([q[0], q[0] + (q[1] - q[0]) * ext, q[3] + (q[2] - q[3]) * ext, q[3]])
    else:
        dst = np.array([q[0], q[1], q[2], q[3]])
    H = imaging.homography_from_points(_crop_corners(crop_h, crop_w), dst)
    return RegionPlacement(quad=q, crop_h=crop_h, crop_w=crop_w, content_w=content_w, transform=H)


def placement_native(region: TextRegionInstance, target_h: int | None = None) -> RegionPlacement:
    """Aspect-true rectification at the quad's own scale (or a target height).

    An axis-aligned integer quad with target_h=None rectifies to an exact
    pixel crop, so metrics on such crops match direct slicing.
    """
    q = np.asarray(region.quad, dtype=np.float64)
    w_len = 0.5 * (np.linalg.norm(q[1] - q[0]) + np.linalg.norm(q[2] - q[3]))
    h_len = 0.5 * (np.linalg.norm(q[3] - q[0]) + np.linalg.norm(q[2] - q[1]))
    if h_len <= 0 or w_len <= 0:
        raise ValueError("degenerate region quad")
    if target_h is None:
        crop_h = int(round(h_len)) + 1
        crop_w = int(round(w_len)) + 1
    else:
        crop_h = int(target_h)
        crop_w = max(2, int(round(w_len * (crop_h - 1) / h_len)) + 1)
    crop_h = max(2, crop_h)
    H = imaging.homography_from_points(_crop_corners(crop_h, crop_w), q)
    return RegionPlacement(quad=q, crop_h=crop_h, crop_w=crop_w, content_w=crop_w, transform=H)


def reading_order(regions: list[TextRegionInstance]) -> list[int]:
    """Indices sorted top-to-bottom then left-to-right by quad center."""
    centers = [r.center for r in regions]
    return sorted(range(len(regions)), key=lambda i: (centers[i][1], centers[i][0]))


def _inside_convex_quad(quad: np.ndarray, xx: np.ndarray, yy: np.ndarray) -> np.ndarray:
    q = np.asarray(quad, dtype=np.float64)
    inside = np.ones(xx.shape, dtype=bool)
    sign = 0.0
    for i in range(4):
        x0, y0 = q[i]
        x1, y1 = q[(i + 1) % 4]
        cross = (x1 - x0) * (yy - y0) - (y1 - y0) * (xx - x0)
        if sign == 0.0:
            sign = 1.0 if np.median(cross) >= 0 else -1.0
        inside &= sign * cross >= -1e-9
    return inside


def quad_iou(a: np.ndarray, b: np.ndarray, canvas_h: int, canvas_w: int) -> float:
    """Rasterized IoU of two convex quads on a given canvas."""
    yy, xx = np.mgrid[0:canvas_h, 0:canvas_w]
    ma = _inside_convex_quad(a, xx, yy)
    mb = _inside_convex_quad(b, xx, yy)
    union = np.logical_or(ma, mb).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(ma, mb).sum() / union)
