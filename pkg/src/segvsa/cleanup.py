"""
Cleanup memory: a labeled codebook with exact near-neighbor search by overlap.

Two interchangeable scoring backends produce identical rankings:

* ``"index"`` -- an inverted index keyed by (segment, offset).  A probe hits
  exactly M posting lists; accumulating the hits per entry yields each
  entry's overlap in O(M + hits).
* ``"brute"`` -- a direct comparison of the probe against every stored row.

Rankings order by overlap (descending), then label (ascending code point
order), and number ranks densely from 1.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from typing import BinaryIO, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .core import OFFSET_DTYPE, Hypervector, SpaceConfig, SpaceMismatchError, read_exact

CODEBOOK_MAGIC = b"HVB1"
BACKENDS = ("index", "brute")


@dataclass(frozen=True)
class Match:
    label: str
    overlap: int
    rank: int


class Codebook:
    """Append-only map label -> Hypervector with near-neighbor search.

    Readers and a writer may share an instance across threads; inserts and
    index rebuilds are serialized by an internal lock, so a query never
    sees half an entry.
    """

    def __init__(self, space: SpaceConfig):
        self.space = space
        self._labels: List[str] = []
        self._ids: Dict[str, int] = {}
        self._rows: List[np.ndarray] = []
        self._lock = threading.RLock()
        # lazily rebuilt caches
        self._matrix: Optional[np.ndarray] = None
        self._label_arr: Optional[np.ndarray] = None
        self._indptr: Optional[np.ndarray] = None
        self._postings: Optional[np.ndarray] = None

    # -- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def __getitem__(self, label: str) -> Hypervector:
        return Hypervector._trusted(self.space, self._rows[self._ids[label]])

    def __iter__(self) -> Iterator[str]:
        return iter(list(self._labels))

    @property
    def labels(self) -> List[str]:
        return list(self._labels)

    def items(self) -> Iterator[Tuple[str, Hypervector]]:
        for label in list(self._labels):
            yield label, self[label]

    # -- mutation -----------------------------------------------------------

    def insert(self, label: str, code: Hypervector) -> "Codebook":
        if code.space != self.space:
            raise SpaceMismatchError(f"{code.space} vs {self.space}")
        if not isinstance(label, str) or not label:
            raise ValueError("labels must be non-empty strings")
        if len(label.encode("utf-8")) > 0xFFFF:
            raise ValueError("label longer than 65535 UTF-8 bytes")
        with self._lock:
            if label in self._ids:
                raise KeyError(f"duplicate label {label!r}")
            self._ids[label] = len(self._labels)
            self._labels.append(label)
            self._rows.append(code.offsets)
            self._matrix = self._label_arr = self._indptr = self._postings = None
        return self

    def get_or_insert(self, label: str, make) -> Hypervector:
        """Atomic get-or-create; ``make()`` builds the code on a miss."""
        with self._lock:
            if label not in self._ids:
                self.insert(label, make())
            return self[label]

    # -- index --------------------------------------------------------------

    def _snapshot(self):
        """Consistent (matrix, indptr, postings, labels) view, rebuilt if stale."""
        with self._lock:
            if self._matrix is None:
                self._rebuild()
            return self._matrix, self._indptr, self._postings, self._label_arr

    def _rebuild(self) -> None:
        m = self.space.segment_count
        if self._rows:
            matrix = np.stack(self._rows)
        else:
            matrix = np.zeros((0, m), dtype=np.uint16)
        keys = (np.arange(m, dtype=np.int64) * self.space.segment_width + matrix).ravel()
        order = np.argsort(keys, kind="stable")  # ids stay in insertion order per key
        n_keys = self.space.dimension
        indptr = np.zeros(n_keys + 1, dtype=np.int64)
        np.cumsum(np.bincount(keys, minlength=n_keys), out=indptr[1:])
        self._postings = (order // m).astype(np.int64)
        self._indptr = indptr
        self._label_arr = np.array(self._labels, dtype=str)
        self._matrix = matrix

    def postings(self, segment: int, offset: int) -> np.ndarray:
        """Entry ids posted under (segment, offset), in insertion order."""
        _, indptr, postings, _ = self._snapshot()
        key = segment * self.space.segment_width + offset
        return postings[indptr[key] : indptr[key + 1]].copy()

    @property
    def posting_count(self) -> int:
        return int(self._snapshot()[1][-1])

    # -- search -------------------------------------------------------------

    def scores(self, probe: Hypervector, backend: str = "index") -> np.ndarray:
        """Overlap of ``probe`` with every entry, in insertion order."""
        return self._scores(probe, backend, self._snapshot())

    def _scores(self, probe: Hypervector, backend: str, snap) -> np.ndarray:
        if probe.space != self.space:
            raise SpaceMismatchError(f"{probe.space} vs {self.space}")
        matrix, indptr, postings, _ = snap
        n = matrix.shape[0]
        if backend == "brute":
            return np.count_nonzero(matrix == probe.offsets, axis=1)
        if backend != "index":
            raise ValueError(f"unknown backend {backend!r}; pick one of {BACKENDS}")
        keys = np.arange(self.space.segment_count, dtype=np.int64) * self.space.segment_width
        keys += probe.offsets
        hits = np.concatenate([postings[indptr[k] : indptr[k + 1]] for k in keys])
        return np.bincount(hits, minlength=n)

    @staticmethod
    def _rank(label_arr: np.ndarray, scores: np.ndarray, candidates: np.ndarray, k: Optional[int]) -> List[Match]:
        labels = label_arr[candidates]
        order = np.lexsort((labels, -scores[candidates]))
        if k is not None:
            order = order[:k]
        return [
            Match(str(labels[i]), int(scores[candidates[i]]), r)
            for r, i in enumerate(order, start=1)
        ]

    def nearest(self, probe: Hypervector, k: int = 1, backend: str = "index") -> List[Match]:
        """Top-``k`` entries by overlap with ``probe``."""
        if k < 1:
            raise ValueError("k must be >= 1")
        snap = self._snapshot()
        if snap[0].shape[0] == 0:
            raise LookupError("empty codebook")
        scores = self._scores(probe, backend, snap)
        if k < scores.size:
            cut = np.partition(scores, scores.size - k)[scores.size - k]
            candidates = np.flatnonzero(scores >= cut)
        else:
            candidates = np.arange(scores.size)
        return self._rank(snap[3], scores, candidates, k)

    def matches_above(self, probe: Hypervector, min_overlap: int, backend: str = "index") -> List[Match]:
        """Every entry whose overlap with ``probe`` is at least ``min_overlap``."""
        snap = self._snapshot()
        if snap[0].shape[0] == 0:
            raise LookupError("empty codebook")
        scores = self._scores(probe, backend, snap)
        return self._rank(snap[3], scores, np.flatnonzero(scores >= min_overlap), None)

    # -- persistence --------------------------------------------------------

    def write(self, fp: BinaryIO) -> None:
        """HVB1 layout; the inverted index is not stored."""
        with self._lock:
            fp.write(CODEBOOK_MAGIC)
            fp.write(struct.pack("<IIQ", self.space.dimension, self.space.segment_width, len(self)))
            for label, row in zip(self._labels, self._rows):
                raw = label.encode("utf-8")
                fp.write(struct.pack("<H", len(raw)))
                fp.write(raw)
                fp.write(row.astype(OFFSET_DTYPE).tobytes())

    @classmethod
    def read(cls, fp: BinaryIO) -> "Codebook":
        magic = fp.read(4)
        if magic != CODEBOOK_MAGIC:
            raise ValueError(f"not a codebook file (magic {magic!r})")
        n, d, count = struct.unpack("<IIQ", read_exact(fp, 16))
        book = cls(SpaceConfig(n, d))
        width = 2 * book.space.segment_count
        for _ in range(count):
            (size,) = struct.unpack("<H", read_exact(fp, 2))
            label = read_exact(fp, size).decode("utf-8")
            book.insert(label, Hypervector.from_bytes(book.space, read_exact(fp, width)))
        return book

    def save(self, path) -> None:
        with open(path, "wb") as fp:
            self.write(fp)

    @classmethod
    def load(cls, path) -> "Codebook":
        with open(path, "rb") as fp:
            return cls.read(fp)
