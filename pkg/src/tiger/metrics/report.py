"""Corpus-level evaluation: per-image metrics, OCR accuracy, and report writing."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .. import imaging
from ..corpus.build import ManifestRecord
from ..regions import placement_native
from .quality import cropped_metrics, psnr, ssim
from .text import ocr_accuracy

log = logging.getLogger(__name__)


class OcrEngine(Protocol):
    def recognize(self, region: np.ndarray) -> tuple[str, float]: ...


# Perceptual scorers are plain callables: (image, image) -> non-negative float,
# symmetric, zero on identical inputs.
PerceptualMetric = Callable[[np.ndarray, np.ndarray], float]


@dataclasses.dataclass
class ImageRecord:
    id: str
    psnr: float
    ssim: float
    psnr_cr: float | None
    ssim_cr: float | None
    perceptual: float | None
    ocr_a: float | None

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass
class MetricReport:
    method: str
    corpus_id: str
    config_hash: str
    per_image: list[ImageRecord]
    aggregates: dict[str, float | None]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "corpus_id": self.corpus_id,
            "config_hash": self.config_hash,
            "aggregates": self.aggregates,
            "per_image": [r.to_json() for r in self.per_image],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    def write_csv(self, path) -> None:
        fields = ["id", "psnr", "ssim", "psnr_cr", "ssim_cr", "perceptual", "ocr_a"]
        with Path(path).open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=fields)
            writer.writeheader()
            for rec in self.per_image:
                writer.writerow(rec.to_json())
            agg = {"id": "aggregate"}
            agg.update({k: self.aggregates.get(k) for k in fields[1:]})
            writer.writerow(agg)


def _aggregate(per_image: list[ImageRecord]) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for key in ("psnr", "ssim", "psnr_cr", "ssim_cr", "perceptual", "ocr_a"):
        vals = [getattr(r, key) for r in per_image if getattr(r, key) is not None]
        out[key] = float(np.mean(vals)) if vals else None
    return out


def evaluate_method(
    records: list[ManifestRecord],
    sr_dir,
    corpus_root,
    ocr: OcrEngine,
    perceptual: PerceptualMetric | None = None,
    method: str = "tiger",
    corpus_id: str = "",
    config_hash: str = "",
) -> MetricReport:
    """Score SR outputs named `<record id>.png` in sr_dir against manifest ground truth.

    OCR accuracy recognizes aspect-true crops of the SR image against manifest
    transcripts. Records without an SR file are skipped with a logged error and
    excluded from aggregates.
    """
    sr_dir = Path(sr_dir)
    corpus_root = Path(corpus_root)
    per_image: list[ImageRecord] = []
    for rec in records:
        sr_path = sr_dir / f"{rec.id}.png"
        if not sr_path.exists():
            log.error("missing SR output for %s: %s", rec.id, sr_path)
            continue
        hr = imaging.load_image(corpus_root / rec.hr)
        sr = imaging.load_image(sr_path)
        if hr.shape != sr.shape:
            log.error("shape mismatch for %s: hr %s vs sr %s", rec.id, hr.shape, sr.shape)
            continue
        cr = cropped_metrics(hr, sr, rec.regions, perceptual=perceptual)
        ocr_scores = []
        for region in rec.regions:
            crop = placement_native(region, target_h=32).extract(sr)
            pred, _conf = ocr.recognize(crop)
            ocr_scores.append(ocr_accuracy(pred, region.transcript))
        per_image.append(
            ImageRecord(
                id=rec.id,
                psnr=psnr(hr, sr),
                ssim=ssim(hr, sr),
                psnr_cr=cr["psnr_cr"],
                ssim_cr=cr["ssim_cr"],
                perceptual=float(perceptual(hr, sr)) if perceptual is not None else None,
                ocr_a=float(np.mean(ocr_scores)) if ocr_scores else None,
            )
        )
    return MetricReport(
        method=method,
        corpus_id=corpus_id,
        config_hash=config_hash,
        per_image=per_image,
        aggregates=_aggregate(per_image),
    )
