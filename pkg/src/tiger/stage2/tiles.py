"""Tile-based full-image processing with partition-of-unity blending."""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import imaging
from ..imaging import Box


def _axis_starts(size: int, tile: int, stride: int) -> list[int]:
    if size <= tile:
        return [0]
    starts = list(range(0, size - tile + 1, stride))
    if starts[-1] != size - tile:
        starts.append(size - tile)
    return starts


def _axis_profile(length: int, overlap: int, has_prev: bool, has_next: bool) -> np.ndarray:
    w = np.ones(length, dtype=np.float64)
    ov = min(overlap, length - 1)
    if has_prev and ov > 0:
        w[:ov] = (np.arange(ov) + 1.0) / (ov + 1.0)
    if has_next and ov > 0:
        w[-ov:] = np.minimum(w[-ov:], (np.arange(ov, 0, -1)) / (ov + 1.0))
    return w


@dataclasses.dataclass
class TileGrid:
    boxes: list[Box]
    weights: list[np.ndarray]  # per-tile blend maps; per-pixel sums are exactly 1
    canvas_h: int
    canvas_w: int

    def extract_tiles(self, img: np.ndarray) -> list[np.ndarray]:
        return [imaging.crop(img, b) for b in self.boxes]


def tile_split(img_h: int, img_w: int, tile_size: int = 128, overlap: int = 32) -> TileGrid:
    """Cover an img_h x img_w canvas with overlapping tiles and blend weights."""
    if tile_size < 16:
        raise ValueError(f"tile_size must be at least 16, got {tile_size}")
    if not 0 <= overlap < tile_size:
        raise ValueError(f"overlap must lie in [0, tile_size), got {overlap}")
    stride = tile_size - overlap
    ys = _axis_starts(img_h, tile_size, stride)
    xs = _axis_starts(img_w, tile_size, stride)
    th = min(tile_size, img_h)
    tw = min(tile_size, img_w)

    boxes, raw = [], []
    for yi, y in enumerate(ys):
        py = _axis_profile(th, overlap, yi > 0, yi < len(ys) - 1)
        for xi, x in enumerate(xs):
            px = _axis_profile(tw, overlap, xi > 0, xi < len(xs) - 1)
            boxes.append(Box(x=x, y=y, w=tw, h=th))
            raw.append(np.outer(py, px))

    total = np.zeros((img_h, img_w), dtype=np.float64)
    for b, w in zip(boxes, raw):
        total[b.y : b.y + b.h, b.x : b.x + b.w] += w
    weights = []
    for b, w in zip(boxes, raw):
        weights.append(w / total[b.y : b.y + b.h, b.x : b.x + b.w])
    return TileGrid(boxes=boxes, weights=weights, canvas_h=img_h, canvas_w=img_w)


def tile_merge(grid: TileGrid, processed_tiles: list[np.ndarray]) -> np.ndarray:
    """Blend processed tiles back onto the canvas."""
    if len(processed_tiles) != len(grid.boxes):
        raise ValueError(f"expected {len(grid.boxes)} tiles, got {len(processed_tiles)}")
    first = np.asarray(processed_tiles[0])
    shape = (grid.canvas_h, grid.canvas_w) if first.ndim == 2 else (grid.canvas_h, grid.canvas_w, first.shape[2])
    canvas = np.zeros(shape, dtype=np.float64)
    for box, weight, tile in zip(grid.boxes, grid.weights, processed_tiles):
        tile = np.asarray(tile, dtype=np.float64)
        if tile.shape[:2] != (box.h, box.w):
            raise ValueError(f"tile shape {tile.shape[:2]} does not match box ({box.h}, {box.w})")
        w = weight if tile.ndim == 2 else weight[:, :, None]
        canvas[box.y : box.y + box.h, box.x : box.x + box.w] += w * tile
    return np.clip(canvas, 0.0, 1.0)
