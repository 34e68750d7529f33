"""TIGER-style text-first/image-later scene text super-resolution, desk scale."""

__version__ = "0.1.0"
