"""
Online bundling learner and probabilistic decomposition over a frame.

The learner keeps a running average of its input stream:

    L(0) = C_0,   L(k) = k/(k+1) L(k-1) (+) 1/(k+1) C_k

so each update rewrites on average M/(k+1) segments.  Projecting a bundled
code onto a nearly orthogonal set recovers, per member, the empirical
probability of that member among the bundled experiences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO, List, Optional, Sequence

import numpy as np

from .algebra import bundle_offsets
from .core import (
    Hypervector,
    RngStream,
    SpaceConfig,
    SpaceMismatchError,
    check_same_space,
    overlap,
    random_code,
    read_exact,
)

LEARNER_MAGIC = b"HVL1"
NOS_MAX_RELATIVE_OVERLAP = 5  # in units of the sparsity s


class OnlineLearner:
    """Running-average bundler.

    ``count`` is the number of absorbed codes; ``code`` is ``None`` until the
    first feed.  Copy a snapshot with :meth:`snapshot` for concurrent readers.
    """

    __slots__ = ("code", "count")

    def __init__(self, code: Optional[Hypervector] = None, count: int = 0):
        if (code is None) != (count == 0):
            raise ValueError("a learner has a code exactly when count > 0")
        if count < 0:
            raise ValueError("count must be non-negative")
        self.code = code
        self.count = count

    def __repr__(self) -> str:
        return f"OnlineLearner(count={self.count})"

    @property
    def space(self) -> Optional[SpaceConfig]:
        return None if self.code is None else self.code.space

    def snapshot(self) -> Optional[Hypervector]:
        # Hypervector is immutable, so handing out the reference is safe
        return self.code

    def feed(self, code: Hypervector, rng: RngStream) -> "OnlineLearner":
        """Absorb one code; returns ``self`` for chaining."""
        if self.code is None:
            self.code = code
            self.count = 1
            return self
        if code.space != self.code.space:
            raise SpaceMismatchError(f"{code.space} vs {self.code.space}")
        k = self.count
        stack = np.stack([self.code.offsets, code.offsets])
        weights = np.array([k / (k + 1), 1.0 / (k + 1)])
        self.code = Hypervector._trusted(code.space, bundle_offsets(stack, weights, rng))
        self.count = k + 1
        return self

    def write(self, fp: BinaryIO) -> None:
        """HVL1: magic, u32 N, u32 d, u64 count, M u16 offsets (little-endian).

        Unseeded learners have no code and cannot be written.
        """
        if self.code is None:
            raise ValueError("cannot persist an unseeded learner")
        space = self.code.space
        fp.write(LEARNER_MAGIC)
        fp.write(struct.pack("<IIQ", space.dimension, space.segment_width, self.count))
        fp.write(self.code.to_bytes())

    @classmethod
    def read(cls, fp: BinaryIO) -> "OnlineLearner":
        magic = fp.read(4)
        if magic != LEARNER_MAGIC:
            raise ValueError(f"not a learner file (magic {magic!r})")
        n, d, count = struct.unpack("<IIQ", read_exact(fp, 16))
        space = SpaceConfig(n, d)
        code = Hypervector.from_bytes(space, read_exact(fp, 2 * space.segment_count))
        if count == 0:
            raise ValueError("learner file with zero count")
        return cls(code, count)

    def save(self, path) -> None:
        with open(path, "wb") as fp:
            self.write(fp)

    @classmethod
    def load(cls, path) -> "OnlineLearner":
        with open(path, "rb") as fp:
            return cls.read(fp)


def feed(learner: OnlineLearner, code: Hypervector, rng: RngStream) -> OnlineLearner:
    return learner.feed(code, rng)


@dataclass
class NearlyOrthogonalSet:
    """Ordered frame of codes whose pairwise overlaps sit at the noise floor.

    Construction rejects any pair whose relative overlap exceeds ``5 s``.
    """

    members: List[Hypervector]
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.members:
            raise ValueError("a frame needs at least one member")
        space = check_same_space(*self.members)
        if not self.labels:
            self.labels = [f"p{i}" for i in range(len(self.members))]
        if len(self.labels) != len(self.members):
            raise ValueError("labels and members differ in length")
        bad = correlated_pairs(self.members)
        if bad:
            i, j, o = bad[0]
            raise ValueError(
                f"members {self.labels[i]!r} and {self.labels[j]!r} overlap in {o} "
                f"segments (limit {max_noise_overlap(space)})"
            )

    @classmethod
    def random(cls, space: SpaceConfig, count: int, rng: RngStream, labels=None) -> "NearlyOrthogonalSet":
        """Draw ``count`` random members, redrawing any that lands above the limit."""
        limit = max_noise_overlap(space)
        members: List[Hypervector] = []
        while len(members) < count:
            c = random_code(space, rng)
            if all(overlap(c, m) <= limit for m in members):
                members.append(c)
        return cls(members, list(labels) if labels else [])

    @property
    def space(self) -> SpaceConfig:
        return self.members[0].space

    def __len__(self) -> int:
        return len(self.members)


def max_noise_overlap(space: SpaceConfig) -> float:
    return NOS_MAX_RELATIVE_OVERLAP * space.sparsity * space.segment_count


def correlated_pairs(codes: Sequence[Hypervector]) -> list[tuple[int, int, int]]:
    """Pairs (i, j, overlap) whose relative overlap exceeds 5 s."""
    if len(codes) < 2:
        return []
    limit = max_noise_overlap(codes[0].space)
    stack = np.stack([c.offsets for c in codes])
    out = []
    for i in range(len(codes) - 1):
        counts = np.count_nonzero(stack[i + 1 :] == stack[i], axis=1)
        for j in np.flatnonzero(counts > limit):
            out.append((i, i + 1 + int(j), int(counts[j])))
    return out


@dataclass(frozen=True)
class FrameProjection:
    """Per-member coefficients of a code over a frame.

    ``coefficients`` are clamped to [0, 1]; ``raw`` keeps the unclamped
    affine estimates.  For a true bundle over the frame they sum to about 1.
    """

    coefficients: np.ndarray
    raw: np.ndarray
    labels: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.coefficients.tolist()))


def frame_inner_product_from_overlap(o: float, space: SpaceConfig) -> float:
    s = space.sparsity
    ns = space.segment_count
    return o / (ns * (1 - s)) - s / (1 - s)


def frame_inner_product(a: Hypervector, b: Hypervector, space: Optional[SpaceConfig] = None) -> float:
    """Bias-corrected inner product of the frame coefficients of ``a`` and ``b``.

    ``<A,B>* = <A,B> / (N s (1 - s)) - s / (1 - s)``; equals 1 for ``a == b``
    and is about 0 (possibly negative) for unrelated codes.
    """
    space = space or a.space
    if a.space != space:
        raise SpaceMismatchError(f"{a.space} vs {space}")
    return frame_inner_product_from_overlap(overlap(a, b), space)


def project(code: Hypervector, frame: NearlyOrthogonalSet) -> FrameProjection:
    """Empirical probability of every frame member within ``code``."""
    if len(frame) == 0:
        raise ValueError("empty frame")
    check_same_space(code, frame.members[0])
    stack = np.stack([m.offsets for m in frame.members])
    counts = np.count_nonzero(stack == code.offsets, axis=1)
    raw = np.array([frame_inner_product_from_overlap(c, code.space) for c in counts])
    return FrameProjection(np.clip(raw, 0.0, 1.0), raw, tuple(frame.labels))
