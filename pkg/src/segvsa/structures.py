"""
Sets and sequences packed into single hypervectors.

A set is the uniform bundle of its members; a sequence bundles each item
bound to a power of a fixed step marker, so position ``k`` is recovered by
releasing ``P_step ** k`` and asking the cleanup memory for the best match.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set

from .algebra import bind, bundle_uniform, power, release, unit
from .cleanup import Codebook
from .core import Hypervector, RngStream, SpaceConfig, check_same_space, random_code
from .learner import correlated_pairs

STEP_LABEL = "__P_step__"
K_MAX = 16


class CorrelatedMembersWarning(UserWarning):
    """Set members are not nearly orthogonal; decoding may degrade."""


def default_threshold(space: SpaceConfig, k_max: int = K_MAX) -> int:
    """Recovery cutoff M / (2 K_max): 8 at the default space."""
    return max(1, space.segment_count // (2 * k_max))


@dataclass(frozen=True)
class SequenceCodec:
    step_marker: Hypervector

    def __post_init__(self):
        if self.step_marker == unit(self.step_marker.space):
            raise ValueError("the step marker must not be the unit vector")

    @classmethod
    def generate(cls, space: SpaceConfig, rng: RngStream) -> "SequenceCodec":
        while True:
            p = random_code(space, rng)
            if p != unit(space):
                return cls(p)

    @property
    def space(self) -> SpaceConfig:
        return self.step_marker.space

    def position(self, k: int) -> Hypervector:
        return power(self.step_marker, k)

    def store(self, book: Codebook) -> None:
        book.insert(STEP_LABEL, self.step_marker)

    @classmethod
    def from_book(cls, book: Codebook) -> "SequenceCodec":
        if STEP_LABEL not in book:
            raise KeyError(f"codebook has no {STEP_LABEL!r} entry")
        return cls(book[STEP_LABEL])


def encode_set(members: Sequence[Hypervector], rng: RngStream) -> Hypervector:
    if not members:
        raise ValueError("cannot encode an empty set")
    check_same_space(*members)
    bad = correlated_pairs(members)
    if bad:
        warnings.warn(
            f"{len(bad)} member pair(s) exceed the near-orthogonality limit",
            CorrelatedMembersWarning,
            stacklevel=2,
        )
    return bundle_uniform(members, rng)


def decode_set(s: Hypervector, book: Codebook, threshold: Optional[int] = None) -> Set[str]:
    """Labels of every codebook entry overlapping ``s`` in at least ``threshold`` segments."""
    if threshold is None:
        threshold = default_threshold(s.space)
    return {m.label for m in book.matches_above(s, threshold) if m.label != STEP_LABEL}


def encode_sequence(items: Sequence[Hypervector], codec: SequenceCodec, rng: RngStream) -> Hypervector:
    if not items:
        raise ValueError("cannot encode an empty sequence")
    check_same_space(codec.step_marker, *items)
    return bundle_uniform([bind([c, codec.position(k)]) for k, c in enumerate(items)], rng)


def decode_sequence(
    s: Hypervector,
    book: Codebook,
    codec: SequenceCodec,
    threshold: Optional[int] = None,
    max_length: Optional[int] = None,
) -> List[str]:
    """Walk positions 0, 1, 2, ... until the best match falls below ``threshold``.

    ``max_length`` defaults to the segment width, the longest period a
    marker power can have.
    """
    if threshold is None:
        threshold = default_threshold(s.space)
    if max_length is None:
        max_length = s.space.segment_width
    if len(book) == 0:
        return []
    out: List[str] = []
    for k in range(max_length):
        probe = release(s, codec.position(k))
        best = next((m for m in book.nearest(probe, 2) if m.label != STEP_LABEL), None)
        if best is None or best.overlap < threshold:
            break
        out.append(best.label)
    return out
