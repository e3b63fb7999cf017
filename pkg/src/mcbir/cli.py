"""Command-line front end: corpus tiling, indexing, querying, evaluation.

Exit codes: 0 on success, 2 for usage errors (argparse), 1 for data errors
(unreadable files, malformed databases, failed preconditions).
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .evaluate import (
    EvalError,
    MANDALA_DIMENSION,
    format_report,
    run_experiment,
    tile_overlapping,
    write_report_csv,
)
from .features import COLOR_DIMENSION, GRAY_DIMENSION, feature_csv_row
from .index import DatabaseError, DatabaseFormatError, FeatureDatabase, IndexRecord
from .ingest.jpeg import JpegError
from .ingest.pixels import PnmError, load_pixel_image_file, save_pixel_image
from .miniature import dc_image_from_grid, dump_dc_image, reduction_chain
from .pipeline import (
    PipelineError,
    coefficient_grids_from_file,
    features_from_grids,
    mandala_features_from_file,
    proposed_features_from_file,
)

MANIFEST_COLUMNS = ["path", "id", "label"]

_DATA_ERRORS = (
    PnmError,
    JpegError,
    DatabaseError,
    DatabaseFormatError,
    EvalError,
    PipelineError,
    OSError,
    ValueError,
)


class ManifestError(ValueError):
    pass


def read_manifest(path) -> list[dict]:
    """Rows of a (path,id,label) manifest; relative paths resolve against it."""
    path = Path(path)
    base = path.parent
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != MANIFEST_COLUMNS:
            raise ManifestError(
                f"manifest {path} must have header {','.join(MANIFEST_COLUMNS)}"
            )
        seen = set()
        for line in reader:
            image_id = line["id"].strip()
            if not image_id:
                raise ManifestError(f"manifest {path}: empty id")
            if image_id in seen:
                raise ManifestError(f"manifest {path}: duplicate id {image_id!r}")
            seen.add(image_id)
            file_path = Path(line["path"].strip())
            if not file_path.is_absolute():
                file_path = base / file_path
            rows.append(
                {"path": file_path, "id": image_id, "label": line["label"].strip() or None}
            )
    return rows


def cmd_corpus(args) -> int:
    in_dir = Path(args.input)
    out_dir = Path(args.out)
    sources = sorted(
        p for p in in_dir.iterdir() if p.suffix.lower() in (".pgm", ".ppm", ".pnm")
    )
    if not sources:
        print(f"error: no PGM/PPM sources in {in_dir}", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.csv"
    count = 0
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for source in sources:
            image = load_pixel_image_file(source)
            try:
                tiles = tile_overlapping(image, args.tile, args.grid)
            except EvalError as exc:
                print(f"error: {source.name}: {exc}", file=sys.stderr)
                return 1
            suffix = ".pgm" if image.components == 1 else ".ppm"
            for x, y, tile in tiles:
                name = f"{source.stem}_x{x:04d}_y{y:04d}{suffix}"
                save_pixel_image(tile, out_dir / name)
                writer.writerow([name, Path(name).stem, source.stem])
                count += 1
    print(f"wrote {count} tiles from {len(sources)} sources to {out_dir} (seed {args.seed})")
    return 0


def _extract_for_index(task):
    path, mode, algorithm = task
    try:
        if algorithm == "mandala":
            vector = mandala_features_from_file(path)
            return ("ok", vector, "gray")
        vector, kind = proposed_features_from_file(path, mode)
        return ("ok", vector, kind)
    except _DATA_ERRORS as exc:
        return ("error", f"{path}: {exc}", None)


def cmd_index(args) -> int:
    started = time.monotonic()
    rows = read_manifest(args.manifest)
    tasks = [(row["path"], args.mode, args.algorithm) for row in rows]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_for_index, tasks, chunksize=8))
    else:
        results = [_extract_for_index(task) for task in tasks]

    failures = [payload for status, payload, _ in results if status == "error"]
    db = None
    for row, (status, vector, kind) in zip(rows, results):
        if status != "ok":
            continue
        if db is None:
            dimension = MANDALA_DIMENSION if args.algorithm == "mandala" else len(vector)
            db = FeatureDatabase(kind=kind, dimension=dimension)
        try:
            db.insert(IndexRecord(image_id=row["id"], class_label=row["label"], feature=vector))
        except DatabaseError as exc:
            failures.append(f"{row['path']}: {exc}")
    if db is None:
        if not rows:
            print("warning: empty manifest, writing empty database", file=sys.stderr)
            kind = "gray" if args.mode != "color" else "color"
            dimension = (
                MANDALA_DIMENSION
                if args.algorithm == "mandala"
                else (GRAY_DIMENSION if kind == "gray" else COLOR_DIMENSION)
            )
            db = FeatureDatabase(kind=kind, dimension=dimension)
        else:
            for failure in failures:
                print(f"error: {failure}", file=sys.stderr)
            return 1
    db.save(args.db)
    elapsed = time.monotonic() - started
    print(f"indexed {len(db)} images ({db.kind}, {db.dimension}-D) in {elapsed:.2f}s -> {args.db}")
    if failures:
        for failure in failures:
            print(f"error: {failure}", file=sys.stderr)
        return 1
    return 0


def _query_vector(db: FeatureDatabase, image_path, dump_dc=None):
    if db.dimension == MANDALA_DIMENSION:
        return mandala_features_from_file(image_path)
    grids = coefficient_grids_from_file(image_path)
    if db.kind == "color" and len(grids) == 1:
        raise PipelineError("kind mismatch: gray query image against a color database")
    if dump_dc is not None:
        _dump_chains(grids, dump_dc)
    vector, _ = features_from_grids(grids, mode=db.kind)
    return vector


def _dump_chains(grids, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for grid in grids:
        chain = reduction_chain(dc_image_from_grid(grid))
        for step, img in enumerate(chain):
            dump_dc_image(img, out_dir / f"component{grid.component_id}_dc{step}.pgm")


def cmd_query(args) -> int:
    db = FeatureDatabase.load(args.db)
    if not len(db):
        print("error: database is empty", file=sys.stderr)
        return 1
    vector = _query_vector(db, args.image, dump_dc=args.dump_dc)
    hits = db.search_top_t(vector, args.top)
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["rank", "image_id", "distance"])
        for rank, hit in enumerate(hits, start=1):
            writer.writerow([rank, hit.image_id, repr(hit.distance)])
    else:
        for rank, hit in enumerate(hits, start=1):
            label = f"  [{hit.class_label}]" if hit.class_label else ""
            print(f"{rank:4d}  {hit.image_id}  {hit.distance:.6f}{label}")
    return 0


def cmd_features(args) -> int:
    vector, _ = proposed_features_from_file(args.image, mode=args.mode)
    print(feature_csv_row(vector))
    return 0


def cmd_eval(args) -> int:
    db = FeatureDatabase.load(args.db)
    rows = read_manifest(args.queries)
    if not rows:
        print("error: empty query manifest", file=sys.stderr)
        return 1
    for row in rows:
        if row["label"] is None:
            print(f"error: query {row['id']} has no class label", file=sys.stderr)
            return 1
    if args.sample_per_class:
        rng = random.Random(args.seed)
        by_label: dict[str, list[dict]] = {}
        for row in rows:
            by_label.setdefault(row["label"], []).append(row)
        rows = [rng.choice(group) for _, group in sorted(by_label.items())]
    if args.algorithm == "mandala" and db.dimension != MANDALA_DIMENSION:
        print(
            f"error: mandala evaluation needs a {MANDALA_DIMENSION}-D database, "
            f"this one is {db.dimension}-D",
            file=sys.stderr,
        )
        return 1
    queries = []
    for row in rows:
        if args.algorithm == "mandala":
            vector = mandala_features_from_file(row["path"])
        else:
            vector, _ = proposed_features_from_file(row["path"], mode=db.kind)
        queries.append((vector, row["label"]))
    report_row = run_experiment(
        db, queries, test_set=args.test_set or Path(args.queries).stem, algorithm=args.algorithm
    )
    if args.out:
        write_report_csv([report_row], args.out)
    print(format_report([report_row]))
    print(f"queries: {len(queries)}  seed: {args.seed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcbir", description="Miniature-based compressed-domain image retrieval"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="cut sources into overlapping tiles plus a manifest")
    corpus.add_argument("--input", required=True, help="directory of PGM/PPM source images")
    corpus.add_argument("--tile", type=int, default=512, help="tile edge in pixels")
    corpus.add_argument("--grid", type=int, default=5, help="tiles per axis (k, giving k*k tiles)")
    corpus.add_argument("--out", required=True, help="output directory for tiles + manifest.csv")
    corpus.add_argument("--seed", type=int, default=0, help="recorded for reproducibility")
    corpus.set_defaults(func=cmd_corpus)

    index = sub.add_parser("index", help="extract features for every manifest row")
    index.add_argument("--manifest", required=True, help="CSV with header path,id,label")
    index.add_argument("--db", required=True, help="output database file")
    index.add_argument("--mode", choices=["gray", "color", "auto"], default="auto")
    index.add_argument(
        "--algorithm", choices=["proposed", "mandala"], default="proposed",
        help="feature extractor (mandala = 9 AC-variance baseline)",
    )
    index.add_argument("--jobs", type=int, default=1, help="parallel extraction processes")
    index.set_defaults(func=cmd_index)

    query = sub.add_parser("query", help="rank database images against a query image")
    query.add_argument("--db", required=True)
    query.add_argument("--image", required=True)
    query.add_argument("--top", type=int, default=10)
    query.add_argument("--format", choices=["text", "csv"], default="text")
    query.add_argument("--dump-dc", metavar="DIR", help="write intermediate DC images as PGM")
    query.set_defaults(func=cmd_query)

    features = sub.add_parser("features", help="print one feature vector as a CSV row")
    features.add_argument("--image", required=True)
    features.add_argument("--mode", choices=["gray", "color", "auto"], default="auto")
    features.set_defaults(func=cmd_features)

    evaluate = sub.add_parser("eval", help="run a query manifest and report recall/precision")
    evaluate.add_argument("--db", required=True)
    evaluate.add_argument("--queries", required=True, help="query manifest (path,id,label)")
    evaluate.add_argument("--algorithm", choices=["proposed", "mandala"], default="proposed")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--out", help="write the report CSV here")
    evaluate.add_argument("--test-set", help="test set name for the report (default: manifest stem)")
    evaluate.add_argument(
        "--sample-per-class", action="store_true",
        help="randomly keep one query per class (seeded)",
    )
    evaluate.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
