"""Acceptance rules applied to candidate triplets before they enter the corpus."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .. import imaging
from ..regions import TextRegionInstance


@dataclasses.dataclass
class FilterRules:
    min_image_dim: int = 256
    min_text_height: int = 32
    min_ocr_score: float = 0.9
    require_nonblank_transcript: bool = True


@dataclasses.dataclass
class Triplet:
    hr_path: Path
    lr_path: Path
    mask_path: Path
    regions: list[TextRegionInstance]
    zoom_tag: str = "synthetic"

    def __post_init__(self):
        self.hr_path = Path(self.hr_path)
        self.lr_path = Path(self.lr_path)
        self.mask_path = Path(self.mask_path)


def filter_pair(triplet: Triplet, rules: FilterRules, ocr_score: float) -> tuple[bool, list[str]]:
    """Accept or reject a triplet; reasons list every violated rule."""
    hr = imaging.load_image(triplet.hr_path)
    imaging.load_image(triplet.lr_path)
    imaging.load_image(triplet.mask_path)
    reasons = []
    if min(hr.shape[0], hr.shape[1]) < rules.min_image_dim:
        reasons.append("min_image_dim")
    if any(r.height_px < rules.min_text_height for r in triplet.regions):
        reasons.append("min_text_height")
    if ocr_score < rules.min_ocr_score:
        reasons.append("min_ocr_score")
    if rules.require_nonblank_transcript and any(r.transcript.strip() == "" for r in triplet.regions):
        reasons.append("blank_transcript")
    return (len(reasons) == 0, reasons)
