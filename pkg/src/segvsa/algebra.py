"""
Bundle, bind, release and friends over segmented hypervectors.

bind adds offsets segment-wise modulo the segment width, which makes the
space an abelian group with the all-zero code as identity.  bundle is the
probabilistic superposition: each output segment copies the offset of one
operand, picked with probability equal to that operand's weight.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from .core import Hypervector, RngStream, SpaceConfig, check_same_space

WeightedOperand = Tuple[float, Hypervector]

WEIGHT_TOL = 1e-9


def normalize_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("need at least one weight")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights sum to zero")
    return w / total


def select_segments(weights: np.ndarray, segment_count: int, rng: RngStream) -> np.ndarray:
    """Per-segment operand index by inverse-CDF over the normalized weights."""
    cdf = np.cumsum(weights)
    u = rng.uniform(segment_count)
    if cdf.size == 2:
        pick = (u >= cdf[0]).astype(np.intp)
    else:
        pick = np.searchsorted(cdf, u, side="right")
    # cdf[-1] may round below 1.0; zero-weight operands are never picked
    last = cdf.size - 1
    while weights[last] <= 0:
        last -= 1
    return np.minimum(pick, last)


def bundle_offsets(stack: np.ndarray, weights: np.ndarray, rng: RngStream) -> np.ndarray:
    """bundle on a raw (K, M) offset stack; returns an M offset row."""
    k, m = stack.shape
    if k == 1:
        rng.uniform(m)  # keep stream consumption independent of K
        return stack[0].copy()
    pick = select_segments(weights, m, rng)
    return np.take_along_axis(stack, pick[None, :], axis=0)[0]


def bundle(operands: Sequence[WeightedOperand], rng: RngStream) -> Hypervector:
    """Weighted probabilistic bundle.

    Every segment independently copies the offset of operand ``k`` with
    probability ``w_k`` (weights are normalized first), so the expected
    overlap of the result with operand ``k`` is about ``w_k * M`` plus
    the random-match noise.

    Raises:
        ValueError: empty operand list or all-zero weights.
        SpaceMismatchError: operands from different spaces.
    """
    if not operands:
        raise ValueError("bundle needs at least one operand")
    weights = normalize_weights([w for w, _ in operands])
    codes = [c for _, c in operands]
    space = check_same_space(*codes)
    stack = np.stack([c.offsets for c in codes])
    return Hypervector._trusted(space, bundle_offsets(stack, weights, rng))


def bundle_uniform(codes: Sequence[Hypervector], rng: RngStream) -> Hypervector:
    """Equal-weight bundle, ``C_0 (+) C_1 (+) ... (+) C_{K-1}``."""
    if not codes:
        raise ValueError("bundle needs at least one operand")
    return bundle([(1.0, c) for c in codes], rng)


def bind(codes: Sequence[Hypervector]) -> Hypervector:
    """Segment-wise offset sum modulo the segment width."""
    if not codes:
        raise ValueError("bind needs at least one operand")
    space = check_same_space(*codes)
    total = np.zeros(space.segment_count, dtype=np.int64)
    for c in codes:
        total += c.offsets
    return Hypervector._trusted(space, total % space.segment_width)


def unit(space: SpaceConfig) -> Hypervector:
    """The bind identity: every segment ON at offset 0."""
    return Hypervector._trusted(space, np.zeros(space.segment_count, dtype=np.uint16))


def inverse(code: Hypervector) -> Hypervector:
    d = code.space.segment_width
    return Hypervector._trusted(code.space, (d - code.offsets.astype(np.int64)) % d)


def release(a: Hypervector, b: Hypervector) -> Hypervector:
    """Unbind ``b`` from ``a``: ``a (x) b^-1``."""
    check_same_space(a, b)
    d = a.space.segment_width
    diff = a.offsets.astype(np.int64) - b.offsets.astype(np.int64)
    return Hypervector._trusted(a.space, diff % d)


def power(code: Hypervector, k: int) -> Hypervector:
    """``code`` bound with itself ``k`` times; negative ``k`` uses the inverse."""
    d = code.space.segment_width
    return Hypervector._trusted(code.space, (code.offsets.astype(np.int64) * (k % d)) % d)
