"""DC-image construction and recursive reduction to an 8x8 miniature.

A DC image holds C(0,0)/8 of every coefficient block, i.e. the level-shifted
mean intensity of each 8x8 region, at 1/64 the source area. Reducing a DC
image repeatedly and resampling the residue yields the 8x8 miniature that the
feature extractor consumes. Values stay level-shifted (in [-128, 127])
throughout; 128 is never added back except for debug dumps.
"""

from __future__ import annotations

from math import ceil
from pathlib import Path

import numpy as np

from .ingest.dct import BLOCK, CoefficientGrid, forward_dct_blocks, pad_to_block_multiple, split_blocks
from .ingest.pixels import PixelImage, save_pixel_image

MINIATURE_SIZE = 8
# Reduce while at least this wide/high; smaller residues are area-resampled.
_REDUCE_THRESHOLD = 64


def dc_image_from_grid(grid: CoefficientGrid) -> np.ndarray:
    """Extract the DC image (C(0,0)/8 per block) from a coefficient grid.

    MCU padding blocks lying wholly outside the component's true extent are
    dropped, so the result is ceil(samples/8) per axis.
    """
    if grid.blocks.size == 0:
        raise ValueError("empty coefficient grid")
    rows = ceil(grid.samples_high / BLOCK)
    cols = ceil(grid.samples_wide / BLOCK)
    return grid.blocks[:rows, :cols, 0, 0] / 8.0


def dc_reduce(img: np.ndarray) -> np.ndarray:
    """One reduction step: pad to block multiples, block-DCT, keep C(0,0)/8.

    Output is ceil(dim/8) per axis.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < BLOCK:
        raise ValueError(f"input must be 2-D with both dims >= {BLOCK}, got {img.shape}")
    padded = pad_to_block_multiple(img)
    coeffs = forward_dct_blocks(split_blocks(padded))
    return coeffs[:, :, 0, 0] / 8.0


def area_resample(img: np.ndarray, size: int = MINIATURE_SIZE) -> np.ndarray:
    """Exact area-weighted downsample to size x size.

    Each output cell averages the source over its rectangle, with fractional
    rows/columns weighted by coverage; the overall mean is preserved.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < size:
        raise ValueError(f"input must be 2-D with both dims >= {size}, got {img.shape}")
    wr = _coverage_weights(img.shape[0], size)
    wc = _coverage_weights(img.shape[1], size)
    return wr @ img @ wc.T


def _coverage_weights(n: int, size: int) -> np.ndarray:
    # W[i, r] = overlap of output interval [i*n/size, (i+1)*n/size) with source
    # cell [r, r+1), normalized so each row sums to 1.
    step = n / size
    w = np.zeros((size, n))
    for i in range(size):
        lo = i * step
        hi = (i + 1) * step
        for r in range(int(lo), min(n, ceil(hi))):
            w[i, r] = min(hi, r + 1) - max(lo, r)
    return w / step


def build_miniature(img: np.ndarray) -> np.ndarray:
    """Reduce a DC image to exactly 8x8.

    Reduces while both dimensions are >= 64 (each step divides by 8, rounding
    up), then area-resamples any residue in 8..63 down to 8x8.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < MINIATURE_SIZE:
        raise ValueError(f"input must be 2-D with both dims >= {MINIATURE_SIZE}, got {img.shape}")
    while min(img.shape) >= _REDUCE_THRESHOLD:
        img = dc_reduce(img)
    if img.shape != (MINIATURE_SIZE, MINIATURE_SIZE):
        img = area_resample(img)
    return img


def reduction_chain(img: np.ndarray) -> list[np.ndarray]:
    """All intermediate DC images from the input down to the 8x8 miniature."""
    img = np.asarray(img, dtype=np.float64)
    chain = [img]
    while min(img.shape) >= _REDUCE_THRESHOLD:
        img = dc_reduce(img)
        chain.append(img)
    if img.shape != (MINIATURE_SIZE, MINIATURE_SIZE):
        chain.append(area_resample(img))
    return chain


def dump_dc_image(img: np.ndarray, path) -> None:
    """Write a DC image as an 8-bit PGM (values +128, rounded, clamped)."""
    visible = np.clip(np.rint(np.asarray(img) + 128.0), 0, 255).astype(np.uint8)
    save_pixel_image(PixelImage(samples=visible[:, :, np.newaxis], colorspace="gray"), Path(path))
