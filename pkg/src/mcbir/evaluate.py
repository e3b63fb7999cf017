"""Retrieval evaluation: corpus tiling, recall/precision, experiment rows.

The protocol follows query-by-example with the retrieval threshold T set to
the query's class size, which makes recall and precision equal by
construction (same numerator, equal denominators). An experiment row reports
the average number of relevant images retrieved, how many queries returned no
relevant image at all, and mean recall/precision as percentages.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import ceil
from typing import Sequence

import numpy as np

from .index import FeatureDatabase
from .ingest.dct import BLOCK, CoefficientGrid
from .ingest.pixels import PixelImage

# Natural (row, col) positions of the first nine AC coefficients in zigzag
# order: (0,1),(1,0),(2,0),(1,1),(0,2),(0,3),(1,2),(2,1),(3,0).
MANDALA_POSITIONS = [1, 8, 16, 9, 2, 3, 10, 17, 24]
MANDALA_DIMENSION = len(MANDALA_POSITIONS)


class EvalError(ValueError):
    """Invalid evaluation setup (bad tiling geometry, unknown class, ...)."""


def tile_offsets(source: int, tile: int, k: int) -> list[int]:
    """Offsets of k evenly spaced, overlapping tiles along one axis."""
    if tile > source:
        raise EvalError(f"tile size {tile} exceeds source extent {source}")
    if k == 1:
        return [0]
    span = source - tile
    if span % (k - 1):
        raise EvalError(
            f"non-integer stride: ({source} - {tile}) is not divisible by {k - 1}"
        )
    stride = span // (k - 1)
    return [i * stride for i in range(k)]


def tile_overlapping(
    image: PixelImage, tile_size: int, k: int
) -> list[tuple[int, int, PixelImage]]:
    """Cut k*k overlapping tiles of tile_size**2 pixels from an image.

    Returns (x_offset, y_offset, tile) triples in row-major grid order.
    """
    xs = tile_offsets(image.width, tile_size, k)
    ys = tile_offsets(image.height, tile_size, k)
    tiles = []
    for y in ys:
        for x in xs:
            window = image.samples[y : y + tile_size, x : x + tile_size, :]
            tiles.append((x, y, PixelImage(samples=window.copy(), colorspace=image.colorspace)))
    return tiles


def recall_precision(
    retrieved_ids: Sequence[str], relevant_ids: Sequence[str], total_retrieved: int
) -> tuple[float, float]:
    """Fraction of relevant images retrieved / fraction of retrievals relevant."""
    relevant = set(relevant_ids)
    if not relevant:
        raise EvalError("relevant set is empty")
    hits = len(set(retrieved_ids) & relevant)
    recall = hits / len(relevant)
    precision = hits / total_retrieved if total_retrieved else 0.0
    return recall, precision


@dataclass
class EvalRow:
    """One report row: a (test set, algorithm) pair and its retrieval scores."""

    test_set: str
    algorithm: str
    avg_relevant: float
    zero_result_queries: int
    recall_pct: float
    precision_pct: float


REPORT_COLUMNS = [
    "test_set",
    "algorithm",
    "avg_relevant",
    "zero_result_queries",
    "recall_pct",
    "precision_pct",
]


def run_experiment(
    db: FeatureDatabase,
    queries: Sequence[tuple[np.ndarray, str]],
    test_set: str = "",
    algorithm: str = "",
) -> EvalRow:
    """Run a query set against a labeled database.

    Each query retrieves the top T records where T is the size of its class in
    the database; retrieved records sharing the query's label count as
    relevant. Every query class must exist in the database.
    """
    if not queries:
        raise EvalError("empty query set")
    sizes = db.class_sizes()
    relevant_counts = []
    recalls = []
    precisions = []
    zero_results = 0
    for vector, label in queries:
        class_size = sizes.get(label)
        if not class_size:
            raise EvalError(f"query class {label!r} has no records in the database")
        hits = db.search_top_t(vector, class_size)
        relevant = sum(1 for hit in hits if hit.class_label == label)
        relevant_counts.append(relevant)
        recalls.append(relevant / class_size)
        precisions.append(relevant / len(hits))
        if relevant == 0:
            zero_results += 1
    return EvalRow(
        test_set=test_set,
        algorithm=algorithm,
        avg_relevant=float(np.mean(relevant_counts)),
        zero_result_queries=zero_results,
        recall_pct=100.0 * float(np.mean(recalls)),
        precision_pct=100.0 * float(np.mean(precisions)),
    )


def mandala_baseline_features(grid: CoefficientGrid) -> np.ndarray:
    """9-D baseline vector: per-position variance of the first nine zigzag AC
    coefficients across all blocks of the original image's grid.

    Padding blocks outside the component's true extent are excluded.
    """
    rows = ceil(grid.samples_high / BLOCK)
    cols = ceil(grid.samples_wide / BLOCK)
    blocks = grid.blocks[:rows, :cols].reshape(rows * cols, 64)
    if blocks.shape[0] < 2:
        raise EvalError("need at least 2 blocks to compute coefficient variances")
    return blocks[:, MANDALA_POSITIONS].var(axis=0)


def write_report_csv(rows: Sequence[EvalRow], path) -> None:
    with open(path, "w", newline="") as fh:
        _write_rows(rows, fh)


def report_csv_text(rows: Sequence[EvalRow]) -> str:
    buf = io.StringIO()
    _write_rows(rows, buf)
    return buf.getvalue()


def _write_rows(rows: Sequence[EvalRow], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.test_set,
                row.algorithm,
                f"{row.avg_relevant:.4f}",
                row.zero_result_queries,
                f"{row.recall_pct:.2f}",
                f"{row.precision_pct:.2f}",
            ]
        )


def format_report(rows: Sequence[EvalRow]) -> str:
    """Human-readable table of experiment rows."""
    header = ["Test Set", "Algorithm", "Avg Relevant", "Zero Results", "Recall %", "Precision %"]
    table = [header] + [
        [
            row.test_set,
            row.algorithm,
            f"{row.avg_relevant:.2f}",
            str(row.zero_result_queries),
            f"{row.recall_pct:.2f}",
            f"{row.precision_pct:.2f}",
        ]
        for row in rows
    ]
    widths = [max(len(line[i]) for line in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip() for line in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
