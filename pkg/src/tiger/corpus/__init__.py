"""Synthetic training/evaluation corpus: glyph atlas, rendering, degradation,
filtering rules, and manifest tooling."""

from .atlas import GlyphAtlas, build_atlas
from .build import (
    DEFAULT_CHARSET,
    CorpusConfig,
    ManifestRecord,
    make_corpus,
    read_manifest,
    split_counts,
    write_manifest,
)
from .degrade import DegradationConfig, degrade
from .filters import FilterRules, Triplet, filter_pair
from .render import RenderSpec, compose_line_mask, make_background, render_text

__all__ = [
    "GlyphAtlas",
    "build_atlas",
    "CorpusConfig",
    "ManifestRecord",
    "DEFAULT_CHARSET",
    "make_corpus",
    "read_manifest",
    "write_manifest",
    "split_counts",
    "DegradationConfig",
    "degrade",
    "FilterRules",
    "Triplet",
    "filter_pair",
    "RenderSpec",
    "compose_line_mask",
    "make_background",
    "render_text",
]
