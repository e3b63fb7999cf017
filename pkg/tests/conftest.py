import csv

import numpy as np
import pytest

from synthcorpus import GRID_K, TILE_SIZE, gray_sources

from mcbir.cli import main as cli_main
from mcbir.evaluate import tile_overlapping
from mcbir.ingest.pixels import save_pixel_image


@pytest.fixture(scope="session")
def corpus12():
    """12-class synthetic corpus in memory: sources and their 5x5 tile grids."""
    sources = gray_sources(12, seed=42)
    tiles = {
        label: tile_overlapping(image, TILE_SIZE, GRID_K) for label, image in sources
    }
    return {"sources": sources, "tiles": tiles}


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, corpus12):
    """The same corpus on disk, tiled through the CLI, plus a query manifest."""
    root = tmp_path_factory.mktemp("corpus12")
    src_dir = root / "sources"
    src_dir.mkdir()
    for label, image in corpus12["sources"]:
        save_pixel_image(image, src_dir / f"{label}.pgm")
    tiles_dir = root / "tiles"
    rc = cli_main(
        [
            "corpus",
            "--input", str(src_dir),
            "--out", str(tiles_dir),
            "--tile", str(TILE_SIZE),
            "--grid", str(GRID_K),
        ]
    )
    assert rc == 0
    queries_csv = root / "queries.csv"
    with open(queries_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "id", "label"])
        for label, _ in corpus12["sources"]:
            writer.writerow([f"sources/{label}.pgm", f"query_{label}", label])
    return {
        "root": root,
        "sources": src_dir,
        "tiles": tiles_dir,
        "manifest": tiles_dir / "manifest.csv",
        "queries": queries_csv,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
