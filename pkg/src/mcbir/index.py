"""Feature database: insertion, exhaustive top-T Euclidean search, persistence.

Databases are small enough (thousands of records, tens of dimensions) that an
exact linear scan is the right search strategy. Ties in distance are broken by
insertion order, which keeps query results and evaluation tables reproducible.

File format (little-endian): magic "MCBR", uint16 version (=1), uint8 kind
(0 gray, 1 color), uint16 dimension, uint64 record count; per record uint16 id
length + UTF-8 id, uint16 label length + UTF-8 label (length 0 = no label),
then dimension float64 feature values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

MAGIC = b"MCBR"
FORMAT_VERSION = 1
_KIND_CODES = {"gray": 0, "color": 1}
_KIND_NAMES = {code: name for name, code in _KIND_CODES.items()}


class DatabaseError(ValueError):
    """Invalid database operation (duplicate id, dimension mismatch, empty search)."""


class DatabaseFormatError(ValueError):
    """Database file is not readable as the current format."""


@dataclass(frozen=True)
class IndexRecord:
    """One indexed image: unique id, optional class label, feature vector."""

    image_id: str
    class_label: str | None
    feature: np.ndarray

    def __post_init__(self):
        if not self.image_id:
            raise DatabaseError("image_id must be non-empty")
        vector = np.asarray(self.feature, dtype=np.float64)
        if vector.ndim != 1:
            raise DatabaseError("feature must be a 1-D vector")
        object.__setattr__(self, "feature", vector)


class SearchHit(NamedTuple):
    image_id: str
    class_label: str | None
    distance: float


def euclidean_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DatabaseError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sqrt(np.dot(diff, diff)))


@dataclass
class FeatureDatabase:
    """Ordered collection of IndexRecords sharing one feature kind/dimension."""

    kind: str
    dimension: int
    records: list[IndexRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise DatabaseError(f"kind must be 'gray' or 'color', got {self.kind!r}")
        if self.dimension < 1:
            raise DatabaseError("dimension must be positive")
        self._ids = {r.image_id for r in self.records}
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.records)

    def insert(self, record: IndexRecord) -> None:
        if record.feature.shape != (self.dimension,):
            raise DatabaseError(
                f"dimension mismatch: database holds {self.dimension}-D vectors, "
                f"got {record.feature.shape[0]}-D"
            )
        if record.image_id in self._ids:
            raise DatabaseError(f"duplicate image_id {record.image_id!r}")
        self.records.append(record)
        self._ids.add(record.image_id)
        self._matrix = None

    def _feature_matrix(self) -> np.ndarray:
        if self._matrix is None or self._matrix.shape[0] != len(self.records):
            self._matrix = np.stack([r.feature for r in self.records])
        return self._matrix

    def search_top_t(self, query: np.ndarray, t: int) -> list[SearchHit]:
        """The t nearest records by Euclidean distance, ascending.

        Ties rank earlier-inserted records first. Returns all records when the
        database holds fewer than t.
        """
        if not self.records:
            raise DatabaseError("cannot search an empty database")
        if t < 1:
            raise DatabaseError("t must be >= 1")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dimension,):
            raise DatabaseError(
                f"dimension mismatch: database holds {self.dimension}-D vectors, "
                f"got {query.shape}"
            )
        diff = self._feature_matrix() - query
        distances = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        order = np.argsort(distances, kind="stable")[:t]
        return [
            SearchHit(self.records[i].image_id, self.records[i].class_label, float(distances[i]))
            for i in order
        ]

    def class_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for record in self.records:
            if record.class_label is not None:
                sizes[record.class_label] = sizes.get(record.class_label, 0) + 1
        return sizes

    def save(self, path) -> None:
        parts = [
            MAGIC,
            struct.pack("<HBHQ", FORMAT_VERSION, _KIND_CODES[self.kind], self.dimension, len(self.records)),
        ]
        for record in self.records:
            rid = record.image_id.encode("utf-8")
            label = (record.class_label or "").encode("utf-8")
            parts.append(struct.pack("<H", len(rid)))
            parts.append(rid)
            parts.append(struct.pack("<H", len(label)))
            parts.append(label)
            parts.append(record.feature.astype("<f8").tobytes())
        Path(path).write_bytes(b"".join(parts))

    @classmethod
    def load(cls, path) -> "FeatureDatabase":
        data = Path(path).read_bytes()
        view = _FileView(data)
        magic = view.take(4, "magic")
        if magic != MAGIC:
            raise DatabaseFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, kind_code, dimension, count = struct.unpack("<HBHQ", view.take(13, "header"))
        if version != FORMAT_VERSION:
            raise DatabaseFormatError(f"unsupported version {version}, expected {FORMAT_VERSION}")
        kind = _KIND_NAMES.get(kind_code)
        if kind is None:
            raise DatabaseFormatError(f"unknown kind code {kind_code}")
        db = cls(kind=kind, dimension=dimension)
        for _ in range(count):
            (id_len,) = struct.unpack("<H", view.take(2, "record id length"))
            image_id = view.take(id_len, "record id").decode("utf-8")
            (label_len,) = struct.unpack("<H", view.take(2, "record label length"))
            label = view.take(label_len, "record label").decode("utf-8") if label_len else None
            vector = np.frombuffer(view.take(8 * dimension, "feature values"), dtype="<f8")
            db.insert(IndexRecord(image_id=image_id, class_label=label, feature=vector.copy()))
        return db


class _FileView:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise DatabaseFormatError(f"truncated file while reading {what}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk
