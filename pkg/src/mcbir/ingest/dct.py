"""Orthonormal 8x8 block DCT and DCT-domain coefficient grids.

The transform is scaled so C(0,0) equals 8 times the block mean, which the
whole DC-image pipeline relies on. It is evaluated through the even/odd
butterfly factorization; besides saving multiplies, the difference branches
cancel exactly for constant blocks, so a flat block produces an exact DC
value and bitwise-zero AC coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pixels import PixelImage, level_shift, rgb_to_ycbcr

BLOCK = 8

# Odd-coefficient basis of the 8-point stage: O4[k, x] = cos((2x+1)(2k+1)pi/16)
_O4 = np.cos(np.outer(2 * np.arange(4) + 1, 2 * np.arange(4) + 1) * np.pi / 16)
# Odd half of the 4-point stage: O2[k, x] = cos((2x+1)(2k+1)pi/8)
_O2 = np.cos(np.outer(2 * np.arange(2) + 1, 2 * np.arange(2) + 1) * np.pi / 8)
_COS_QUARTER = np.cos(np.pi / 4)


def _scale_matrix() -> np.ndarray:
    # alpha(u)alpha(v) with the DC entry kept as the exact dyadic 1/8
    s = np.full((BLOCK, BLOCK), 0.25)
    s[0, :] = 0.25 / np.sqrt(2.0)
    s[:, 0] = 0.25 / np.sqrt(2.0)
    s[0, 0] = 0.125
    return s


_SCALE = _scale_matrix()


def _dct1d(a: np.ndarray) -> np.ndarray:
    """Unnormalized 8-point DCT-II along the last axis: sum f(x) cos((2x+1)u pi/16)."""
    s1 = a[..., :4] + a[..., 7:3:-1]
    d1 = a[..., :4] - a[..., 7:3:-1]
    s2 = s1[..., :2] + s1[..., 3:1:-1]
    d2 = s1[..., :2] - s1[..., 3:1:-1]
    out = np.empty_like(a)
    out[..., 0] = s2[..., 0] + s2[..., 1]
    out[..., 4] = (s2[..., 0] - s2[..., 1]) * _COS_QUARTER
    out[..., 2::4] = d2 @ _O2.T
    out[..., 1::2] = d1 @ _O4.T
    return out


def forward_dct_blocks(blocks: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT over blocks shaped (..., 8, 8)."""
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.shape[-2:] != (BLOCK, BLOCK):
        raise ValueError(f"expected trailing 8x8 block axes, got {blocks.shape}")
    rows = _dct1d(blocks)
    cols = _dct1d(rows.swapaxes(-1, -2)).swapaxes(-1, -2)
    return cols * _SCALE


def forward_dct_8x8(block: np.ndarray) -> np.ndarray:
    """2-D orthonormal DCT-II of one 8x8 block."""
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (BLOCK, BLOCK):
        raise ValueError(f"expected 8x8 block, got {block.shape}")
    return forward_dct_blocks(block)


def pad_to_block_multiple(matrix: np.ndarray) -> np.ndarray:
    """Edge-replicate a 2-D matrix so both dimensions become multiples of 8."""
    h, w = matrix.shape
    pad_h = (-h) % BLOCK
    pad_w = (-w) % BLOCK
    if pad_h == 0 and pad_w == 0:
        return matrix
    return np.pad(matrix, ((0, pad_h), (0, pad_w)), mode="edge")


def split_blocks(matrix: np.ndarray) -> np.ndarray:
    """View a (8m, 8n) matrix as blocks shaped (m, n, 8, 8)."""
    h, w = matrix.shape
    if h % BLOCK or w % BLOCK:
        raise ValueError("matrix dimensions must be multiples of 8")
    return matrix.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)


@dataclass
class CoefficientGrid:
    """Per-component grid of 8x8 DCT coefficient blocks.

    blocks is (blocks_high, blocks_wide, 8, 8) of dequantized coefficients.
    samples_wide/samples_high give the component's true pixel extent, which
    may be smaller than 8*blocks_wide/high when padding blocks are present.
    sampling is (h, v) relative to the largest component; quant_table (natural
    order) is carried on the JPEG path only.
    """

    blocks: np.ndarray
    component_id: int
    sampling: tuple[int, int]
    samples_wide: int
    samples_high: int
    quant_table: np.ndarray | None = None

    def __post_init__(self):
        if self.blocks.ndim != 4 or self.blocks.shape[2:] != (BLOCK, BLOCK):
            raise ValueError("blocks must be shaped (blocks_high, blocks_wide, 8, 8)")

    @property
    def blocks_high(self) -> int:
        return self.blocks.shape[0]

    @property
    def blocks_wide(self) -> int:
        return self.blocks.shape[1]


def _component_grid(plane: np.ndarray, component_id: int) -> CoefficientGrid:
    h, w = plane.shape
    padded = pad_to_block_multiple(plane)
    coeffs = forward_dct_blocks(split_blocks(padded))
    return CoefficientGrid(
        blocks=coeffs,
        component_id=component_id,
        sampling=(1, 1),
        samples_wide=w,
        samples_high=h,
    )


def pixel_coefficient_grids(image: PixelImage) -> list[CoefficientGrid]:
    """Level shift, pad and block-DCT every component of a pixel image.

    Color input must already be YCbCr (RGB callers convert first); every
    component is transformed at full resolution.
    """
    if image.colorspace == "rgb":
        raise ValueError("convert rgb to ycbcr before building coefficient grids")
    shifted = level_shift(image)
    return [_component_grid(shifted[:, :, c], c) for c in range(image.components)]


def grids_from_file_image(image: PixelImage) -> list[CoefficientGrid]:
    """Pixel-path grids for a loaded file, converting RGB to YCbCr as needed."""
    if image.colorspace == "rgb":
        image = rgb_to_ycbcr(image)
    return pixel_coefficient_grids(image)
