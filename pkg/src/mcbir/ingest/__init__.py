"""Image ingestion: file decoding and DCT-domain coefficient grids."""

from .dct import (
    BLOCK,
    CoefficientGrid,
    forward_dct_8x8,
    forward_dct_blocks,
    grids_from_file_image,
    pad_to_block_multiple,
    pixel_coefficient_grids,
    split_blocks,
)
from .jpeg import (
    JpegCoefficients,
    JpegDecodeError,
    JpegError,
    UnsupportedJpegError,
    decode_jpeg_coefficients,
    is_jpeg,
)
from .pixels import (
    PixelImage,
    PnmError,
    level_shift,
    load_pixel_image,
    load_pixel_image_file,
    rgb_to_ycbcr,
    save_pixel_image,
)

__all__ = [
    "BLOCK",
    "CoefficientGrid",
    "JpegCoefficients",
    "JpegDecodeError",
    "JpegError",
    "PixelImage",
    "PnmError",
    "UnsupportedJpegError",
    "decode_jpeg_coefficients",
    "forward_dct_8x8",
    "forward_dct_blocks",
    "grids_from_file_image",
    "is_jpeg",
    "level_shift",
    "load_pixel_image",
    "load_pixel_image_file",
    "pad_to_block_multiple",
    "pixel_coefficient_grids",
    "rgb_to_ycbcr",
    "save_pixel_image",
    "split_blocks",
]
