"""Miniature-based compressed-domain image retrieval.

Images are summarized by an 8x8 miniature built from recursively extracted DC
images; its DCT, partitioned into ten sub-bands, yields a 16-D (gray) or 18-D
(color) feature vector searched by Euclidean distance.
"""

from .evaluate import (
    EvalError,
    EvalRow,
    mandala_baseline_features,
    recall_precision,
    run_experiment,
    tile_overlapping,
)
from .features import (
    band_stats,
    dct_of_miniature,
    extract_color_features,
    extract_gray_features,
)
from .index import (
    DatabaseError,
    DatabaseFormatError,
    FeatureDatabase,
    IndexRecord,
    SearchHit,
    euclidean_distance,
)
from .ingest import (
    CoefficientGrid,
    JpegCoefficients,
    PixelImage,
    decode_jpeg_coefficients,
    forward_dct_8x8,
    level_shift,
    load_pixel_image,
    rgb_to_ycbcr,
)
from .miniature import area_resample, build_miniature, dc_image_from_grid, dc_reduce
from .pipeline import mandala_features, proposed_features

__version__ = "0.1.0"

__all__ = [
    "CoefficientGrid",
    "DatabaseError",
    "DatabaseFormatError",
    "EvalError",
    "EvalRow",
    "FeatureDatabase",
    "IndexRecord",
    "JpegCoefficients",
    "PixelImage",
    "SearchHit",
    "area_resample",
    "band_stats",
    "build_miniature",
    "dc_image_from_grid",
    "dc_reduce",
    "dct_of_miniature",
    "decode_jpeg_coefficients",
    "euclidean_distance",
    "extract_color_features",
    "extract_gray_features",
    "forward_dct_8x8",
    "level_shift",
    "load_pixel_image",
    "mandala_baseline_features",
    "mandala_features",
    "proposed_features",
    "recall_precision",
    "rgb_to_ycbcr",
    "run_experiment",
    "tile_overlapping",
]
