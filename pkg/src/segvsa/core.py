"""
Segmented sparse binary hypervectors.

A hypervector of dimension N with sparsity s = 1/d is split into M = N/d
segments of width d, each holding exactly one ON bit.  Only the per-segment
offsets are stored (M small integers), so a default code (N = 65536,
d = 256) takes 256 bytes.

Similarity is the overlap (count of shared ON bits, i.e. the inner product);
Hamming distance follows from it through 2*overlap + hamming = 2M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

OFFSET_DTYPE = np.dtype("<u2")


class SpaceMismatchError(ValueError):
    """Raised when hypervectors from different spaces are combined."""


@dataclass(frozen=True)
class SpaceConfig:
    """Dimensional parameters of a segmented hypervector space.

    Args:
        dimension: total bit count N.
        segment_width: bits per segment d (sparsity s = 1/d).
    """

    dimension: int = 65536
    segment_width: int = 256

    def __post_init__(self):
        if self.segment_width < 2:
            raise ValueError(f"segment width must be >= 2, got {self.segment_width}")
        if self.segment_width > 1 << 16:
            raise ValueError("segment width must fit a 16-bit offset")
        if self.dimension < self.segment_width or self.dimension % self.segment_width:
            raise ValueError(
                f"dimension {self.dimension} is not a positive multiple of "
                f"segment width {self.segment_width}"
            )

    @property
    def segment_count(self) -> int:
        return self.dimension // self.segment_width

    @property
    def sparsity(self) -> float:
        return 1.0 / self.segment_width

    @property
    def noise_floor(self) -> float:
        """Expected overlap of two independent random codes (N s^2 = M s)."""
        return self.segment_count / self.segment_width

    def __str__(self) -> str:
        return f"N={self.dimension} d={self.segment_width} M={self.segment_count}"


DEFAULT_SPACE = SpaceConfig()


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def mix64(value: int) -> int:
    """Scalar splitmix64 finalizer."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """Counter-based deterministic random stream.

    Draw number ``i`` (0-based, counted from the stream start) is
    ``mix64(seed + (i + 1) * GOLDEN_GAMMA)``, which is exactly the
    splitmix64 output sequence seeded with ``seed``.  A stream is therefore
    fully described by ``(seed, counter)`` and reproduces bit-for-bit on
    every platform.

    A stream has one owner.  Use :meth:`derive` to hand independent
    substreams to other consumers.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int = 0, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter & MASK64

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def next_u64(self, n: int) -> np.ndarray:
        """Return ``n`` raw 64-bit draws and advance the counter by ``n``."""
        idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + idx * np.uint64(GOLDEN_GAMMA)
            out = _mix64(state)
        self.counter = (self.counter + n) & MASK64
        return out

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) built from the top 53 bits of each draw."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def integers(self, bound: int, n: int) -> np.ndarray:
        """``n`` integers in [0, bound) by 32-bit multiply-shift.

        Exact for power-of-two bounds; otherwise biased by at most
        bound / 2**32.
        """
        if not 0 < bound <= 1 << 32:
            raise ValueError(f"bound out of range: {bound}")
        hi = self.next_u64(n) >> np.uint64(32)
        return ((hi * np.uint64(bound)) >> np.uint64(32)).astype(np.int64)

    def derive(self, key: int) -> "RngStream":
        """Independent stream keyed by ``key``; does not advance this one."""
        return RngStream(mix64(self.seed ^ mix64((key + GOLDEN_GAMMA) & MASK64)), 0)

    def copy(self) -> "RngStream":
        return RngStream(self.seed, self.counter)


class Hypervector:
    """A point of the segmented space, stored as M per-segment offsets.

    Instances are immutable: the offset array is read-only.
    """

    __slots__ = ("space", "offsets")

    def __init__(self, space: SpaceConfig, offsets: Iterable[int] | np.ndarray):
        arr = np.array(offsets, dtype=np.int64).reshape(-1)
        if arr.shape[0] != space.segment_count:
            raise ValueError(
                f"expected {space.segment_count} offsets, got {arr.shape[0]}"
            )
        if arr.size and (arr.min() < 0 or arr.max() >= space.segment_width):
            raise ValueError(f"offsets must lie in [0, {space.segment_width})")
        arr = arr.astype(np.uint16)
        arr.flags.writeable = False
        self.space = space
        self.offsets = arr

    @classmethod
    def _trusted(cls, space: SpaceConfig, offsets: np.ndarray) -> "Hypervector":
        # skips validation; callers guarantee shape and range
        hv = object.__new__(cls)
        arr = np.ascontiguousarray(offsets, dtype=np.uint16)
        arr.flags.writeable = False
        hv.space = space
        hv.offsets = arr
        return hv

    def __len__(self) -> int:
        return self.offsets.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.offsets, other.offsets)

    def __hash__(self) -> int:
        return hash((self.space, self.offsets.tobytes()))

    def __repr__(self) -> str:
        head = ", ".join(str(int(v)) for v in self.offsets[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"Hypervector({self.space}, ({head}{more}))"

    def to_bytes(self) -> bytes:
        """M little-endian uint16 offsets, no header."""
        return self.offsets.astype(OFFSET_DTYPE).tobytes()

    @classmethod
    def from_bytes(cls, space: SpaceConfig, data: bytes) -> "Hypervector":
        expected = 2 * space.segment_count
        if len(data) != expected:
            raise ValueError(f"expected {expected} bytes, got {len(data)}")
        return cls(space, np.frombuffer(data, dtype=OFFSET_DTYPE))

    def to_dense(self) -> np.ndarray:
        """Expand to the full N-bit 0/1 array (debugging only)."""
        dense = np.zeros(self.space.dimension, dtype=np.uint8)
        starts = np.arange(len(self), dtype=np.int64) * self.space.segment_width
        dense[starts + self.offsets] = 1
        return dense

    @classmethod
    def from_dense(cls, space: SpaceConfig, bits: np.ndarray) -> "Hypervector":
        seg = np.asarray(bits, dtype=np.uint8).reshape(space.segment_count, space.segment_width)
        if not np.all(seg.sum(axis=1) == 1):
            raise ValueError("every segment needs exactly one ON bit")
        return cls(space, seg.argmax(axis=1))


def check_same_space(*codes: Hypervector) -> SpaceConfig:
    space = codes[0].space
    for c in codes[1:]:
        if c.space != space:
            raise SpaceMismatchError(f"{c.space} vs {space}")
    return space


def random_code(space: SpaceConfig, rng: RngStream) -> Hypervector:
    """Draw every offset independently and uniformly from [0, d)."""
    offsets = rng.integers(space.segment_width, space.segment_count)
    return Hypervector._trusted(space, offsets)


def overlap(a: Hypervector, b: Hypervector) -> int:
    """Count of shared ON bits, equal to the inner product <a, b>."""
    check_same_space(a, b)
    return int(np.count_nonzero(a.offsets == b.offsets))


def hamming(a: Hypervector, b: Hypervector) -> int:
    return 2 * (a.space.segment_count - overlap(a, b))


def cosine(a: Hypervector, b: Hypervector) -> float:
    return overlap(a, b) / a.space.segment_count


def read_exact(fp, n: int) -> bytes:
    data = fp.read(n)
    if len(data) != n:
        raise ValueError(f"truncated file: wanted {n} bytes, got {len(data)}")
    return data
