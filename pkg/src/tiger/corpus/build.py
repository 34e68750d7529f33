"""Corpus builder: renders triplets to disk and writes a JSONL manifest.

Each record derives its own RNG stream from (global seed, record index), so
generation is reproducible and order-independent. Records tagged with a zoom
ratio stand in for real captures: they are degraded harder and their stored
masks are perturbed to mimic noisy annotations.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from pathlib import Path

import numpy as np
from scipy import ndimage

from .. import imaging
from ..regions import TextRegionInstance
from .atlas import GlyphAtlas, build_atlas
from .degrade import DegradationConfig, degrade
from .render import RenderSpec, compose_line_mask, contrasting_colors, make_background, render_text

log = logging.getLogger(__name__)

REAL_ZOOM_TAGS = ("x2.35", "x5.71", "x14.29")
DEFAULT_CHARSET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


@dataclasses.dataclass
class CorpusConfig:
    count: int = 2000
    image_h: int = 256
    image_w: int = 256
    charset: str = DEFAULT_CHARSET
    glyph_h: int = 16
    glyph_w: int = 16
    text_len_min: int = 2
    text_len_max: int = 4
    scale_min: float = 2.1
    scale_max: float = 2.4
    rotation_max: float = 8.0
    blur_min: float = 3.0
    blur_max: float = 4.0
    downscale_factor: int = 4
    noise_min: float = 0.05
    noise_max: float = 0.09
    quant_choices: tuple[int, ...] = (64, 32)
    split_train: float = 0.9
    split_val: float = 0.05
    split_test: float = 0.05
    real_fraction: float = 0.15
    real_blur_extra: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        total = self.split_train + self.split_val + self.split_test
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {total}")
        if not 0.0 <= self.real_fraction <= 1.0:
            raise ValueError("real_fraction must lie in [0, 1]")


@dataclasses.dataclass
class ManifestRecord:
    id: str
    hr: str
    lr: str
    mask: str
    split: str
    zoom_tag: str
    regions: list[TextRegionInstance]
    seed: int

    @property
    def is_real(self) -> bool:
        return self.zoom_tag != "synthetic"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "hr": self.hr,
            "lr": self.lr,
            "mask": self.mask,
            "split": self.split,
            "zoom_tag": self.zoom_tag,
            "regions": [r.to_json() for r in self.regions],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ManifestRecord":
        return cls(
            id=obj["id"],
            hr=obj["hr"],
            lr=obj["lr"],
            mask=obj["mask"],
            split=obj["split"],
            zoom_tag=obj["zoom_tag"],
            regions=[TextRegionInstance.from_json(r) for r in obj["regions"]],
            seed=int(obj["seed"]),
        )


def write_manifest(records: list[ManifestRecord], path) -> None:
    path = Path(path)
    with path.open("w") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_manifest(path) -> list[ManifestRecord]:
    path = Path(path)
    records = []
    with path.open() as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(ManifestRecord.from_json(json.loads(line)))
    return records


def split_counts(count: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder apportionment so counts are exact for round fractions."""
    raw = [count * f for f in fractions]
    base = [int(np.floor(r)) for r in raw]
    rem = count - sum(base)
    order = sorted(range(3), key=lambda i: raw[i] - base[i], reverse=True)
    for i in range(rem):
        base[order[i]] += 1
    return tuple(base)


def _perturb_mask(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Annotation-noise stand-in: 1px jitter plus one morphological step."""
    dy, dx = int(rng.integers(-1, 2)), int(rng.integers(-1, 2))
    m = np.roll(mask > 0.5, shift=(dy, dx), axis=(0, 1))
    if rng.random() < 0.5:
        m = ndimage.binary_dilation(m)
    else:
        m = ndimage.binary_erosion(m)
    return m.astype(np.float64)


def _sample_render_spec(
    cfg: CorpusConfig, atlas: GlyphAtlas, rng: np.random.Generator
) -> RenderSpec:
    n = int(rng.integers(cfg.text_len_min, cfg.text_len_max + 1))
    text = "".join(rng.choice(list(cfg.charset), size=n))
    scale = float(rng.uniform(cfg.scale_min, cfg.scale_max))
    rotation = float(rng.uniform(-cfg.rotation_max, cfg.rotation_max))
    fg, bg = contrasting_colors(rng)

    line = compose_line_mask(atlas, text)
    lh, lw = line.shape
    pad = atlas.spacing
    theta = np.deg2rad(rotation)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    corners = np.array(
        [[-pad, -pad], [lw - 1 + pad, -pad], [lw - 1 + pad, lh - 1 + pad], [-pad, lh - 1 + pad]],
        dtype=np.float64,
    )
    rel = corners @ (scale * R).T
    lo = rel.min(axis=0)
    hi = rel.max(axis=0)
    x_min, x_max = 1.0 - lo[0], cfg.image_w - 2.0 - hi[0]
    y_min, y_max = 1.0 - lo[1], cfg.image_h - 2.0 - hi[1]
    if x_max <= x_min or y_max <= y_min:
        raise ValueError("text line does not fit the background")
    origin = (float(rng.uniform(x_min, x_max)), float(rng.uniform(y_min, y_max)))
    return RenderSpec(text=text, origin=origin, scale=scale, fg_color=tuple(fg), bg_color=tuple(bg), rotation=rotation)


def make_corpus(cfg: CorpusConfig, out_dir) -> Path:
    """Generate the corpus under out_dir; returns the manifest path."""
    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    atlas = build_atlas(cfg.charset, (cfg.glyph_h, cfg.glyph_w), cfg.seed)

    n_train, n_val, n_test = split_counts(cfg.count, (cfg.split_train, cfg.split_val, cfg.split_test))
    split_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xC0FFEE]))
    perm = split_rng.permutation(cfg.count)
    split_of = {}
    for pos, idx in enumerate(perm):
        split_of[int(idx)] = "train" if pos < n_train else ("val" if pos < n_train + n_val else "test")
    n_real = int(round(n_train * cfg.real_fraction))
    train_ids = [int(i) for i in perm[:n_train]]
    real_ids = set(train_ids[:n_real])

    records: list[ManifestRecord] = []
    for i in range(cfg.count):
        ss = np.random.SeedSequence([cfg.seed, 1, i])
        rng = np.random.default_rng(ss)
        rec_seed = int(ss.generate_state(1)[0])
        is_real = i in real_ids

        spec = None
        for _ in range(10):
            try:
                spec = _sample_render_spec(cfg, atlas, rng)
                break
            except ValueError:
                continue
        if spec is None:
            log.warning("record %d: could not place text after 10 retries, skipping", i)
            continue

        bg = make_background(cfg.image_h, cfg.image_w, rng)
        hr, mask, region = render_text(bg, atlas, spec)

        blur = float(rng.uniform(cfg.blur_min, cfg.blur_max))
        if is_real:
            blur = min(4.0, blur + cfg.real_blur_extra)
        deg = DegradationConfig(
            blur_sigma=blur,
            downscale_factor=cfg.downscale_factor,
            noise_sigma=float(rng.uniform(cfg.noise_min, cfg.noise_max)),
            quantization_levels=int(rng.choice(cfg.quant_choices)),
            seed=rec_seed,
        )
        lr = degrade(hr, deg)

        stored_mask = _perturb_mask(mask, rng) if is_real else mask
        rid = f"t{i:06d}"
        names = {k: f"images/{rid}_{k}.png" for k in ("hr", "lr", "mask")}
        imaging.save_image(hr, out_dir / names["hr"])
        imaging.save_image(lr, out_dir / names["lr"])
        imaging.save_image(stored_mask, out_dir / names["mask"])
        records.append(
            ManifestRecord(
                id=rid,
                hr=names["hr"],
                lr=names["lr"],
                mask=names["mask"],
                split=split_of[i],
                zoom_tag=REAL_ZOOM_TAGS[i % len(REAL_ZOOM_TAGS)] if is_real else "synthetic",
                regions=[region],
                seed=rec_seed,
            )
        )

    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(records, manifest_path)
    return manifest_path
