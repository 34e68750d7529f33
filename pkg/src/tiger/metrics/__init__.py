"""Evaluation harness: pixel metrics, text accuracy, toy OCR, reports."""

from ..perceptual import structural_dissimilarity_np
from .quality import cropped_metrics, psnr, ssim
from .report import ImageRecord, MetricReport, OcrEngine, PerceptualMetric, evaluate_method
from .text import levenshtein, ocr_accuracy
from .toyocr import ToyOcrEngine, otsu_threshold, toy_ocr

__all__ = [
    "psnr",
    "ssim",
    "cropped_metrics",
    "levenshtein",
    "ocr_accuracy",
    "toy_ocr",
    "otsu_threshold",
    "ToyOcrEngine",
    "OcrEngine",
    "PerceptualMetric",
    "MetricReport",
    "ImageRecord",
    "evaluate_method",
    "structural_dissimilarity_np",
]
