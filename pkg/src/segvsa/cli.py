"""
Command-line interface.

Reports are line-oriented ``key<TAB>value`` text.  Exit codes:
0 success, 2 validation error, 3 I/O error, 4 demo check failed,
5 word not found.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from typing import List, Optional

import numpy as np

from . import algebra
from .analogy import dollar_of_mexico
from .cleanup import CODEBOOK_MAGIC, Codebook
from .core import RngStream, SpaceConfig, overlap, random_code
from .embedding import (
    MODEL_MAGIC,
    UnknownWordError,
    VocabularyModel,
    iter_documents,
    query_context,
    train_stream,
    word_similarity,
)
from .learner import LEARNER_MAGIC, OnlineLearner
from .structures import (
    STEP_LABEL,
    SequenceCodec,
    decode_sequence,
    decode_set,
    default_threshold,
    encode_sequence,
    encode_set,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_DEMO_FAILED = 4
EXIT_NOT_FOUND = 5

SMALL_BOOK = 32


def _out(key: str, *values) -> None:
    print("\t".join([key, *(str(v) for v in values)]))


def _space(args) -> SpaceConfig:
    return SpaceConfig(args.dim, args.segwidth)


def _write_atomic(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as fp:
        fp.write(payload)
    os.replace(tmp, path)


def _book_bytes(book: Codebook) -> bytes:
    buf = io.BytesIO()
    book.write(buf)
    return buf.getvalue()


# -- commands ---------------------------------------------------------------


def cmd_rand(args) -> int:
    space = _space(args)
    rng = RngStream(args.seed)
    book = Codebook(space)
    for i in range(args.count):
        book.insert(f"{args.prefix}{i}", random_code(space, rng))
    _write_atomic(args.out, _book_bytes(book))
    _out("space", space)
    _out("entries", len(book))
    _out("written", args.out)
    return EXIT_OK


ARITY = {"bundle": None, "bind": None, "release": 2, "inverse": 1, "power": 1}


def _merged_books(paths: List[str]) -> Codebook:
    books = [Codebook.load(p) for p in paths]
    merged = Codebook(books[0].space)
    for b in books:
        if b.space != merged.space:
            raise ValueError(f"codebooks disagree on space: {b.space} vs {merged.space}")
        for label, code in b.items():
            merged.insert(label, code)
    return merged


def cmd_algebra(args) -> int:
    book = _merged_books(args.book)
    missing = [lbl for lbl in args.inputs + (args.compare or []) if lbl not in book]
    if missing:
        raise KeyError(f"unknown label(s): {', '.join(missing)}")
    want = ARITY[args.op]
    if want is not None and len(args.inputs) != want:
        raise ValueError(f"{args.op} takes {want} input(s), got {len(args.inputs)}")
    codes = [book[lbl] for lbl in args.inputs]
    if args.op == "bundle":
        weights = args.weights or [1.0] * len(codes)
        if len(weights) != len(codes):
            raise ValueError("one weight per input is required")
        result = algebra.bundle(list(zip(weights, codes)), RngStream(args.seed))
    elif args.op == "bind":
        result = algebra.bind(codes)
    elif args.op == "release":
        result = algebra.release(codes[0], codes[1])
    elif args.op == "inverse":
        result = algebra.inverse(codes[0])
    else:
        if args.exponent is None:
            raise ValueError("power needs --exponent")
        result = algebra.power(codes[0], args.exponent)

    out = Codebook(book.space)
    out.insert(args.label, result)
    _write_atomic(args.out, _book_bytes(out))
    _out("op", args.op)
    _out("space", book.space)
    for lbl in dict.fromkeys(args.inputs + (args.compare or [])):
        _out("overlap", lbl, overlap(result, book[lbl]))
    _out("unit", "yes" if result == algebra.unit(book.space) else "no")
    _out("written", args.out)
    return EXIT_OK


def cmd_demo_mexico(args) -> int:
    results = dollar_of_mexico(args.seed, _space(args), topk=args.topk)
    failed = 0
    for r in results:
        tops = " ".join(f"{m.label}:{m.overlap}" for m in r.matches)
        _out(r.name.replace(" ", "_"), f"expected={r.expected}", tops, "ok" if r.ok else "FAIL")
        failed += not r.ok
    _out("result", "pass" if not failed else f"fail ({failed})")
    return EXIT_OK if not failed else EXIT_DEMO_FAILED


def cmd_roundtrip(args) -> int:
    book = _merged_books(args.book)
    missing = [lbl for lbl in args.inputs if lbl not in book]
    if missing:
        raise KeyError(f"unknown label(s): {', '.join(missing)}")
    codes = [book[lbl] for lbl in args.inputs]
    rng = RngStream(args.seed)
    threshold = args.threshold if args.threshold is not None else default_threshold(book.space)
    _out("kind", args.kind)
    _out("threshold", threshold)
    if args.kind == "set":
        packed = encode_set(codes, rng)
        for lbl in dict.fromkeys(args.inputs):
            _out("overlap", lbl, overlap(packed, book[lbl]))
        found = sorted(decode_set(packed, book, threshold))
        ok = set(found) == set(args.inputs)
    else:
        codec = SequenceCodec.from_book(book) if STEP_LABEL in book else SequenceCodec.generate(
            book.space, rng.derive(0)
        )
        packed = encode_sequence(codes, codec, rng)
        found = decode_sequence(packed, book, codec, threshold)
        ok = found == list(args.inputs)
    _out("recovered", " ".join(found))
    _out("count", len(found))
    _out("exact", "yes" if ok else "no")
    return EXIT_OK


def cmd_embed_train(args) -> int:
    if args.resume and os.path.exists(args.model):
        model = VocabularyModel.load(args.model, seed=args.seed, window=args.window)
    else:
        model = VocabularyModel(_space(args), seed=args.seed, window=args.window)
    for path in args.corpus:
        if not os.path.isfile(path):
            raise FileNotFoundError(path)
    docs = tokens = 0

    def counted():
        nonlocal docs, tokens
        for doc in iter_documents(args.corpus):
            docs += 1
            tokens += len(doc)
            yield doc

    train_stream(counted(), model, RngStream(args.seed))
    buf = io.BytesIO()
    model.write(buf)
    _write_atomic(args.model, buf.getvalue())
    _out("documents", docs)
    _out("tokens", tokens)
    _out("words", len(model.words))
    _out("written", args.model)
    return EXIT_OK


def cmd_embed_query(args) -> int:
    model = VocabularyModel.load(args.model, seed=args.seed, window=args.window)
    try:
        if args.similar:
            _out("similarity", args.word, args.similar, f"{word_similarity(model, args.word, args.similar):.6f}")
        else:
            for m in query_context(model, args.word, args.position, args.topk):
                _out("match", m.rank, m.label, m.overlap)
    except UnknownWordError as e:
        print(f"not found: {e.args[0]}", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def _overlap_matrix(book: Codebook) -> None:
    labels = book.labels
    stack = np.stack([book[lbl].offsets for lbl in labels])
    for i, lbl in enumerate(labels):
        row = np.count_nonzero(stack == stack[i], axis=1)
        _out("overlap", lbl, *row.tolist())


def _stats_book(book: Codebook) -> None:
    _out("dimension", book.space.dimension)
    _out("segment_width", book.space.segment_width)
    _out("segment_count", book.space.segment_count)
    _out("entries", len(book))
    if 0 < len(book) <= SMALL_BOOK:
        for label, code in book.items():
            zeros = int(np.count_nonzero(code.offsets == 0))
            kind = "unit" if zeros == book.space.segment_count else f"zero_offsets={zeros}"
            _out("entry", label, kind)
        _overlap_matrix(book)


def cmd_stats(args) -> int:
    probe_book = _merged_books(args.book) if args.book else None
    for path in args.paths:
        _out("file", path)
        with open(path, "rb") as fp:
            magic = fp.read(4)
            fp.seek(0)
            if magic == CODEBOOK_MAGIC:
                book = Codebook.read(fp)
                tail = fp.read(4)
                if tail == MODEL_MAGIC:
                    fp.seek(0)
                    model = VocabularyModel.read(fp, seed=args.seed, window=args.window)
                    _out("format", "HVM1")
                    _out("dimension", model.space.dimension)
                    _out("segment_width", model.space.segment_width)
                    _out("segment_count", model.space.segment_count)
                    _out("words", len(model.words))
                    _out("learners", len(model.learners))
                    _out("feeds", sum(lr.count for lr in model.learners.values()))
                    for word, lr in list(model.learners.items())[:SMALL_BOOK]:
                        _out("learner", word, lr.count)
                else:
                    _out("format", "HVB1")
                    _stats_book(book)
            elif magic == LEARNER_MAGIC:
                lr = OnlineLearner.read(fp)
                _out("format", "HVL1")
                _out("dimension", lr.space.dimension)
                _out("segment_width", lr.space.segment_width)
                _out("count", lr.count)
                if probe_book is not None:
                    for m in probe_book.nearest(lr.snapshot(), args.topk):
                        _out("match", m.rank, m.label, m.overlap)
            else:
                raise ValueError(f"{path}: unrecognized magic {magic!r}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=65536, help="hypervector dimension N")
    common.add_argument("--segwidth", type=int, default=256, help="segment width d = 1/s")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threshold", type=int, default=None, help="recovery threshold override")
    common.add_argument("--window", type=int, default=2, help="embedding window half-size")
    common.add_argument("--topk", type=int, default=3)

    parser = argparse.ArgumentParser(prog="segvsa", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rand", parents=[common], help="write labeled random codes")
    p.add_argument("count", type=int)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--prefix", default="c")
    p.set_defaults(func=cmd_rand)

    p = sub.add_parser("algebra", parents=[common], help="apply an operation to stored codes")
    p.add_argument("op", choices=sorted(ARITY))
    p.add_argument("--book", action="append", required=True, help="input codebook (repeatable)")
    p.add_argument("--inputs", nargs="+", required=True, metavar="LABEL")
    p.add_argument("--weights", nargs="+", type=float)
    p.add_argument("--exponent", type=int, help="power exponent")
    p.add_argument("--compare", nargs="+", metavar="LABEL", help="extra labels to report overlaps for")
    p.add_argument("--label", default="result")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("demo-mexico", parents=[common], help="run the dollar-of-Mexico analogies")
    p.set_defaults(func=cmd_demo_mexico)

    p = sub.add_parser("roundtrip", parents=[common], help="encode stored codes as a set or sequence and decode")
    p.add_argument("kind", choices=["set", "sequence"])
    p.add_argument("--book", action="append", required=True)
    p.add_argument("--inputs", nargs="+", required=True, metavar="LABEL")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("embed", help="train or query word embeddings")
    esub = p.add_subparsers(dest="embed_command", required=True)
    t = esub.add_parser("train", parents=[common])
    t.add_argument("corpus", nargs="+")
    t.add_argument("-m", "--model", required=True)
    t.add_argument("--resume", action="store_true", help="continue training an existing model")
    t.set_defaults(func=cmd_embed_train)
    q = esub.add_parser("query", parents=[common])
    q.add_argument("-m", "--model", required=True)
    q.add_argument("--word", required=True)
    q.add_argument("--position", type=int, default=1)
    q.add_argument("--similar", metavar="WORD", help="report similarity to WORD instead")
    q.set_defaults(func=cmd_embed_query)

    p = sub.add_parser("stats", parents=[common], help="describe HVB1/HVL1/HVM1 files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--book", action="append", help="codebook for learner top-k matches")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
