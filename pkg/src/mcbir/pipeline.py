"""End-to-end feature extraction from image files.

Ties the stages together: decode (JPEG entropy decode or PGM/PPM pixel read),
per-component DC image, recursive reduction to the 8x8 miniature, final DCT
and sub-band feature vector. JPEG chroma components are miniaturized at their
native subsampled resolution; pixel-path color images are converted to YCbCr
at full resolution first.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .evaluate import mandala_baseline_features
from .features import dct_of_miniature, extract_color_features, extract_gray_features
from .ingest.dct import CoefficientGrid, grids_from_file_image
from .ingest.jpeg import decode_jpeg_coefficients, is_jpeg
from .ingest.pixels import load_pixel_image
from .miniature import build_miniature, dc_image_from_grid

MODES = ("gray", "color", "auto")


class PipelineError(ValueError):
    """Input file cannot be processed under the requested mode."""


def coefficient_grids(data: bytes) -> list[CoefficientGrid]:
    """Per-component DCT coefficient grids for JPEG or PGM/PPM bytes."""
    if is_jpeg(data):
        return decode_jpeg_coefficients(data).components
    return grids_from_file_image(load_pixel_image(data))


def coefficient_grids_from_file(path) -> list[CoefficientGrid]:
    return coefficient_grids(Path(path).read_bytes())


def _resolve_kind(n_components: int, mode: str) -> str:
    if mode not in MODES:
        raise PipelineError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "auto":
        return "gray" if n_components == 1 else "color"
    if mode == "color" and n_components == 1:
        raise PipelineError("color mode requested but the image has a single component")
    return mode


def miniature_dct_blocks(grids: list[CoefficientGrid]) -> list[np.ndarray]:
    """Miniature-DCT block for each component grid."""
    return [dct_of_miniature(build_miniature(dc_image_from_grid(g))) for g in grids]


def features_from_grids(grids: list[CoefficientGrid], mode: str = "auto") -> tuple[np.ndarray, str]:
    """Miniature sub-band feature vector from per-component coefficient grids.

    Returns (vector, kind) where kind is "gray" (16-D) or "color" (18-D).
    Gray mode on a color image uses the luma component only.
    """
    kind = _resolve_kind(len(grids), mode)
    if kind == "gray":
        block = miniature_dct_blocks(grids[:1])[0]
        return extract_gray_features(block), "gray"
    blocks = miniature_dct_blocks(grids)
    return extract_color_features(*blocks), "color"


def proposed_features(data: bytes, mode: str = "auto") -> tuple[np.ndarray, str]:
    """Extract the miniature sub-band feature vector from image file bytes."""
    return features_from_grids(coefficient_grids(data), mode)


def proposed_features_from_file(path, mode: str = "auto") -> tuple[np.ndarray, str]:
    return proposed_features(Path(path).read_bytes(), mode)


def mandala_features(data: bytes) -> np.ndarray:
    """9-D AC-variance baseline vector over the original image's luma grid."""
    grids = coefficient_grids(data)
    return mandala_baseline_features(grids[0])


def mandala_features_from_file(path) -> np.ndarray:
    return mandala_features(Path(path).read_bytes())
