"""Sub-band feature extraction from the DCT of an 8x8 miniature.

The 64 coefficients are partitioned into ten multiresolution sub-bands: four
low-frequency singletons, three 2x2 bands and three 4x4 quadrants. Gray
images yield a 16-dimensional vector, color images an 18-dimensional one.
"""

from __future__ import annotations

import numpy as np

from .ingest.dct import forward_dct_8x8

GRAY_DIMENSION = 16
COLOR_DIMENSION = 18

# Band index -> (row slice, column slice) over the 8x8 coefficient grid.
# Bands 0..3 are the singletons (0,0), (0,1), (1,0), (1,1); 4..6 are 2x2;
# 7..9 are the three 4x4 quadrants. The ten bands tile all 64 positions.
SUB_BANDS: dict[int, tuple[slice, slice]] = {
    0: (slice(0, 1), slice(0, 1)),
    1: (slice(0, 1), slice(1, 2)),
    2: (slice(1, 2), slice(0, 1)),
    3: (slice(1, 2), slice(1, 2)),
    4: (slice(0, 2), slice(2, 4)),
    5: (slice(2, 4), slice(0, 2)),
    6: (slice(2, 4), slice(2, 4)),
    7: (slice(0, 4), slice(4, 8)),
    8: (slice(4, 8), slice(0, 4)),
    9: (slice(4, 8), slice(4, 8)),
}

STAT_BANDS = (4, 5, 6, 7, 8, 9)


def band_values(block: np.ndarray, band: int) -> np.ndarray:
    """Flattened coefficients of one sub-band."""
    rows, cols = SUB_BANDS[band]
    return np.asarray(block, dtype=np.float64)[rows, cols].ravel()


def band_stats(block: np.ndarray, band: int) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation of a sub-band."""
    values = band_values(block, band)
    return float(values.mean()), float(values.std())


def dct_of_miniature(miniature: np.ndarray) -> np.ndarray:
    """Final DCT over the miniature (values are already level-shifted)."""
    return forward_dct_8x8(miniature)


def extract_gray_features(block: np.ndarray) -> np.ndarray:
    """16-D vector from one miniature-DCT block.

    Order: C(0,0)/8, C(0,1), C(1,0), C(1,1), then mean/std of bands 4..9.
    """
    block = np.asarray(block, dtype=np.float64)
    out = np.empty(GRAY_DIMENSION)
    out[0] = block[0, 0] / 8.0
    out[1] = block[0, 1]
    out[2] = block[1, 0]
    out[3] = block[1, 1]
    for i, band in enumerate(STAT_BANDS):
        out[4 + 2 * i], out[5 + 2 * i] = band_stats(block, band)
    return out


def extract_color_features(
    y_block: np.ndarray, cb_block: np.ndarray, cr_block: np.ndarray
) -> np.ndarray:
    """18-D vector from the three per-component miniature-DCT blocks.

    Order: C_Y(0,0)/8, C_Cb(0,0)/8, C_Cr(0,0)/8, C_Y(0,1), C_Y(1,0), C_Y(1,1),
    then mean/std of the luma bands 4..9. Chroma contributes only its DC.
    """
    y_block = np.asarray(y_block, dtype=np.float64)
    out = np.empty(COLOR_DIMENSION)
    out[0] = y_block[0, 0] / 8.0
    out[1] = np.asarray(cb_block, dtype=np.float64)[0, 0] / 8.0
    out[2] = np.asarray(cr_block, dtype=np.float64)[0, 0] / 8.0
    out[3] = y_block[0, 1]
    out[4] = y_block[1, 0]
    out[5] = y_block[1, 1]
    for i, band in enumerate(STAT_BANDS):
        out[6 + 2 * i], out[7 + 2 * i] = band_stats(y_block, band)
    return out


def feature_csv_row(vector: np.ndarray) -> str:
    """Full-precision CSV row for one feature vector."""
    return ",".join(repr(float(v)) for v in vector)
