"""
Streaming word embeddings from context observations.

Each occurrence of a word ``w`` produces one observation: the uniform bundle
of ``w``'s own base code and each context word's base code bound to
``P_step ** j`` for its relative position ``j`` in [-h, h].  Windows shrink
at document edges rather than padding.  Every word owns an online learner
that absorbs its observations exactly once, in a single pass; the learner
snapshot is the word's embedding and can be queried at any time.
"""

from __future__ import annotations

import hashlib
import re
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from .algebra import bundle_offsets, release
from .cleanup import Codebook, Match
from .core import Hypervector, RngStream, SpaceConfig, random_code, read_exact
from .learner import OnlineLearner, frame_inner_product
from .structures import STEP_LABEL, SequenceCodec

MODEL_MAGIC = b"HVM1"
DEFAULT_WINDOW = 2

_TOKEN_RE = re.compile(r"[^\W_]+")
_DOC_BREAK_RE = re.compile(r"\n[ \t\r\f\v]*\n")


class UnknownWordError(KeyError):
    pass


@dataclass
class TokenStream:
    """Normalized tokens grouped into documents; windows never span two documents."""

    documents: List[List[str]] = field(default_factory=list)

    @property
    def tokens(self) -> List[str]:
        return [t for doc in self.documents for t in doc]

    def __iter__(self) -> Iterator[str]:
        for doc in self.documents:
            yield from doc

    def __len__(self) -> int:
        return sum(len(d) for d in self.documents)


def tokenize_document(text: str) -> List[str]:
    return _TOKEN_RE.findall(text.lower())


def tokenize(text: str) -> TokenStream:
    """Lowercase, split on non-alphanumeric runs; blank lines separate documents."""
    docs = (tokenize_document(chunk) for chunk in _DOC_BREAK_RE.split(text))
    return TokenStream([d for d in docs if d])


def iter_documents(paths: Iterable[Union[str, Path]]) -> Iterator[List[str]]:
    """Stream tokenized documents from UTF-8 files without holding a whole file."""
    for path in paths:
        doc: List[str] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    if doc:
                        yield doc
                        doc = []
                    continue
                doc.extend(tokenize_document(line))
        if doc:
            yield doc


def word_key(word: str) -> int:
    return int.from_bytes(hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest(), "little")


class VocabularyModel:
    """Word base codes, the shared step marker and one learner per word.

    Base codes are a pure function of ``(seed, word)``, so two models with
    the same seed agree on every word no matter the order words appear.
    """

    def __init__(
        self,
        space: SpaceConfig = SpaceConfig(),
        seed: int = 0,
        window: int = DEFAULT_WINDOW,
        codec: Optional[SequenceCodec] = None,
    ):
        if window < 1:
            raise ValueError("window half-size must be >= 1")
        self.space = space
        self.seed = seed
        self.window = window
        self.words = Codebook(space)
        self._rows: Dict[str, np.ndarray] = {}
        self.learners: Dict[str, OnlineLearner] = {}
        self._root = RngStream(seed)
        self.codec = codec or SequenceCodec.generate(space, self._root.derive(word_key(STEP_LABEL)))
        if self.codec.space != space:
            raise ValueError("codec lives in a different space")
        self._lock = threading.Lock()
        d = space.segment_width
        marker = self.codec.step_marker.offsets.astype(np.int64)
        self._shift = {j: (marker * (j % d)) % d for j in range(-window, window + 1)}

    def __repr__(self) -> str:
        return f"VocabularyModel({self.space}, words={len(self.words)}, window={self.window})"

    def base_code(self, word: str) -> Hypervector:
        return Hypervector._trusted(self.space, self._base_row(word))

    def _base_row(self, word: str) -> np.ndarray:
        row = self._rows.get(word)
        if row is None:
            code = self.words.get_or_insert(
                word, lambda: random_code(self.space, self._root.derive(word_key(word)))
            )
            row = self._rows.setdefault(word, code.offsets)
        return row

    def learner(self, word: str) -> OnlineLearner:
        try:
            return self.learners[word]
        except KeyError:
            raise UnknownWordError(word) from None

    # -- persistence --------------------------------------------------------

    def write(self, fp: BinaryIO) -> None:
        """HVB1 codebook (step marker first, then words) followed by the HVM1 learner table."""
        book = Codebook(self.space)
        self.codec.store(book)
        for label, code in self.words.items():
            book.insert(label, code)
        book.write(fp)
        fp.write(MODEL_MAGIC)
        with self._lock:
            learners = list(self.learners.items())
        fp.write(struct.pack("<Q", len(learners)))
        for word, lrn in learners:
            raw = word.encode("utf-8")
            fp.write(struct.pack("<H", len(raw)))
            fp.write(raw)
            fp.write(struct.pack("<Q", lrn.count))
            fp.write(lrn.code.to_bytes())

    @classmethod
    def read(cls, fp: BinaryIO, seed: int = 0, window: int = DEFAULT_WINDOW) -> "VocabularyModel":
        book = Codebook.read(fp)
        model = cls(book.space, seed=seed, window=window, codec=SequenceCodec.from_book(book))
        for label, code in book.items():
            if label != STEP_LABEL:
                model.words.insert(label, code)
        magic = fp.read(4)
        if magic != MODEL_MAGIC:
            raise ValueError(f"missing learner table (magic {magic!r})")
        (n,) = struct.unpack("<Q", read_exact(fp, 8))
        width = 2 * book.space.segment_count
        for _ in range(n):
            (size,) = struct.unpack("<H", read_exact(fp, 2))
            word = read_exact(fp, size).decode("utf-8")
            (count,) = struct.unpack("<Q", read_exact(fp, 8))
            code = Hypervector.from_bytes(book.space, read_exact(fp, width))
            if word not in model.words:
                raise ValueError(f"learner {word!r} has no base code")
            model.learners[word] = OnlineLearner(code, count)
        return model

    def save(self, path) -> None:
        with open(path, "wb") as fp:
            self.write(fp)

    @classmethod
    def load(cls, path, seed: int = 0, window: int = DEFAULT_WINDOW) -> "VocabularyModel":
        with open(path, "rb") as fp:
            return cls.read(fp, seed=seed, window=window)


def observe(center: int, tokens: Sequence[str], model: VocabularyModel, rng: RngStream) -> Hypervector:
    """Observation hypervector for ``tokens[center]`` within one document."""
    if not 0 <= center < len(tokens):
        raise IndexError(f"center {center} outside document of length {len(tokens)}")
    d = model.space.segment_width
    lo = max(0, center - model.window)
    hi = min(len(tokens), center + model.window + 1)
    rows = []
    for i in range(lo, hi):
        base = model._base_row(tokens[i])
        j = i - center
        rows.append(base if j == 0 else (base + model._shift[j]) % d)
    stack = np.stack(rows)
    weights = np.full(len(rows), 1.0 / len(rows))
    return Hypervector._trusted(model.space, bundle_offsets(stack, weights, rng))


def train_stream(
    stream: Union[TokenStream, Iterable[Sequence[str]]],
    model: VocabularyModel,
    rng: RngStream,
) -> VocabularyModel:
    """Single pass: every token position feeds its center word's learner once."""
    documents = stream.documents if isinstance(stream, TokenStream) else stream
    for doc in documents:
        for i, word in enumerate(doc):
            obs = observe(i, doc, model, rng)
            with model._lock:
                lrn = model.learners.setdefault(word, OnlineLearner())
            lrn.feed(obs, rng)
    return model


def query_context(model: VocabularyModel, word: str, position: int, k: int = 1) -> List[Match]:
    """Words most likely found at relative ``position`` from ``word``."""
    if position == 0 or abs(position) > model.window:
        raise ValueError(f"position must be non-zero and within +-{model.window}, got {position}")
    snap = model.learner(word).snapshot()
    probe = release(snap, model.codec.position(position))
    return model.words.nearest(probe, k)


def word_similarity(model: VocabularyModel, w1: str, w2: str) -> float:
    a = model.learner(w1).snapshot()
    b = model.learner(w2).snapshot()
    return frame_inner_product(a, b)
