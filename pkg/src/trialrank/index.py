"""Immutable inverted index over one field view, with a versioned binary format.

File layout (all integers little-endian)::

    magic      8 bytes   b"TRIALIDX"
    version    uint32
    hdr_len    uint32
    header     hdr_len bytes of UTF-8 JSON (stats and section sizes)
    doc_lens   int32[N]
    offsets    int64[T + 1]
    post_docs  int32[P]
    post_tfs   int32[P]
    doc_ids    UTF-8, newline separated
    terms      UTF-8, newline separated
    crc32      uint32 over every preceding byte
"""
from __future__ import annotations

import json
import struct
import zlib
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import cached_property, partial
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import VIEW_NAMES, FieldViews, read_corpus
from .errors import FormatVersionMismatch, IoFailure, UnknownDocument, UnknownView
from .kernels import doc_lengths_sum
from .textproc import analyze

MAGIC = b"TRIALIDX"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


class PostingsIndex:
    """Term dictionary plus document table for one field view.

    Postings are stored CSR-style: the postings of term ``t`` are
    ``post_docs[offsets[t]:offsets[t + 1]]`` with matching ``post_tfs``,
    sorted by document ordinal.
    """

    def __init__(self, field_name, doc_ids, doc_lens, terms, offsets, post_docs, post_tfs):
        self.field_name = field_name
        self.doc_ids = tuple(doc_ids)
        self.terms = tuple(terms)
        self.doc_lens = _frozen(doc_lens, np.int32)
        self.offsets = _frozen(offsets, np.int64)
        self.post_docs = _frozen(post_docs, np.int32)
        self.post_tfs = _frozen(post_tfs, np.int32)
        self.N = len(self.doc_ids)
        self.total_len = doc_lengths_sum(self.doc_lens)
        self.avg_doc_len = self.total_len / self.N if self.N else 0.0

    def __repr__(self) -> str:
        return (
            f"PostingsIndex(field={self.field_name!r}, N={self.N}, "
            f"terms={len(self.terms)}, avg_doc_len={self.avg_doc_len:.3f})"
        )

    @cached_property
    def _term_ids(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    @cached_property
    def _ordinals(self) -> dict[str, int]:
        return {d: i for i, d in enumerate(self.doc_ids)}

    @cached_property
    def doc_id_rank(self) -> np.ndarray:
        """Position of each ordinal in lexicographic doc_id order (for tie-breaking)."""
        order = sorted(range(self.N), key=self.doc_ids.__getitem__)
        rank = np.empty(self.N, dtype=np.int64)
        rank[order] = np.arange(self.N)
        return rank

    def term_id(self, term: str) -> int | None:
        return self._term_ids.get(term)

    def ordinal(self, doc_id: str) -> int:
        try:
            return self._ordinals[doc_id]
        except KeyError:
            raise UnknownDocument(doc_id) from None

    def df(self, term: str) -> int:
        tid = self.term_id(term)
        return 0 if tid is None else int(self.offsets[tid + 1] - self.offsets[tid])

    def postings(self, term: str) -> tuple[np.ndarray, np.ndarray]:
        tid = self.term_id(term)
        if tid is None:
            empty = np.empty(0, dtype=np.int32)
            return empty, empty
        lo, hi = self.offsets[tid], self.offsets[tid + 1]
        return self.post_docs[lo:hi], self.post_tfs[lo:hi]

    def tf(self, term: str, ordinal: int) -> int:
        docs, tfs = self.postings(term)
        pos = int(np.searchsorted(docs, ordinal))
        if pos < len(docs) and docs[pos] == ordinal:
            return int(tfs[pos])
        return 0

    @property
    def term_dictionary(self) -> dict[str, tuple[int, list[tuple[int, int]]]]:
        """term -> (df, [(ordinal, tf), ...]); materialised, meant for inspection."""
        out = {}
        for tid, term in enumerate(self.terms):
            lo, hi = self.offsets[tid], self.offsets[tid + 1]
            plist = list(zip(self.post_docs[lo:hi].tolist(), self.post_tfs[lo:hi].tolist()))
            out[term] = (len(plist), plist)
        return out

    @property
    def doc_table(self) -> list[tuple[str, int]]:
        return list(zip(self.doc_ids, self.doc_lens.tolist()))

    def same_as(self, other: "PostingsIndex") -> bool:
        return (
            self.field_name == other.field_name
            and self.doc_ids == other.doc_ids
            and self.terms == other.terms
            and np.array_equal(self.doc_lens, other.doc_lens)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.post_docs, other.post_docs)
            and np.array_equal(self.post_tfs, other.post_tfs)
        )


# ---------------------------------------------------------------------------
# building


def _count(text: str, stoplist) -> Counter:
    return Counter(analyze(text, stoplist))


def build_index(
    corpus: str | Path | Iterable[FieldViews],
    view: str,
    stoplist: frozenset[str] | None = None,
    workers: int = 1,
) -> PostingsIndex:
    """Index one view of a corpus file (or an iterable of FieldViews).

    Documents keep their order of appearance as ordinals; empty views are
    kept with length 0.
    """
    if view not in VIEW_NAMES:
        raise UnknownView(f"unknown view {view!r}; expected one of {', '.join(VIEW_NAMES)}")
    if isinstance(corpus, (str, Path)):
        corpus = read_corpus(corpus)

    doc_ids: list[str] = []
    texts: list[str] = []
    for fv in corpus:
        doc_ids.append(fv.doc_id)
        texts.append(getattr(fv, view))

    count = partial(_count, stoplist=stoplist)
    if workers > 1 and len(texts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counters = list(pool.map(count, texts, chunksize=256))
    else:
        counters = [count(t) for t in texts]

    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lens = np.zeros(len(doc_ids), dtype=np.int32)
    for ordinal, counter in enumerate(counters):
        doc_lens[ordinal] = sum(counter.values())
        for term, tf in counter.items():
            postings.setdefault(term, []).append((ordinal, tf))

    terms = sorted(postings)
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    for i, t in enumerate(terms):
        offsets[i + 1] = offsets[i] + len(postings[t])
    flat = [p for t in terms for p in postings[t]]
    post_docs = np.fromiter((d for d, _ in flat), dtype=np.int32, count=len(flat))
    post_tfs = np.fromiter((tf for _, tf in flat), dtype=np.int32, count=len(flat))
    return PostingsIndex(view, doc_ids, doc_lens, terms, offsets, post_docs, post_tfs)


def index_path(directory: str | Path, collection: str, view: str) -> Path:
    return Path(directory) / f"{collection}.{view}.idx"


# ---------------------------------------------------------------------------
# persistence


def _blob(strings) -> bytes:
    return "\n".join(strings).encode("utf-8")


def save_index(index: PostingsIndex, path: str | Path) -> None:
    for s in index.doc_ids:
        if not s or any(c.isspace() for c in s):
            raise ValueError(f"doc_id {s!r} cannot be stored (empty or contains whitespace)")
    ids_blob = _blob(index.doc_ids)
    terms_blob = _blob(index.terms)
    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "field_name": index.field_name,
            "N": index.N,
            "avg_doc_len": index.avg_doc_len,
            "num_terms": len(index.terms),
            "num_postings": int(index.post_docs.shape[0]),
            "doc_ids_bytes": len(ids_blob),
            "terms_bytes": len(terms_blob),
        },
        sort_keys=True,
    ).encode("utf-8")
    body = b"".join(
        [
            _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)),
            header,
            index.doc_lens.astype("<i4").tobytes(),
            index.offsets.astype("<i8").tobytes(),
            index.post_docs.astype("<i4").tobytes(),
            index.post_tfs.astype("<i4").tobytes(),
            ids_blob,
            terms_blob,
        ]
    )
    data = body + struct.pack("<I", zlib.crc32(body))
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoFailure(f"cannot write index {path}: {exc}") from None


def load_index(path: str | Path) -> PostingsIndex:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read index {path}: {exc}") from None

    if len(data) < _PREFIX.size + 4:
        raise FormatVersionMismatch(f"{path}: file too short")
    magic, version, hdr_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise FormatVersionMismatch(f"{path}: not an index file")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise FormatVersionMismatch(f"{path}: checksum mismatch (truncated or corrupt)")

    pos = _PREFIX.size
    try:
        hdr = json.loads(body[pos : pos + hdr_len].decode("utf-8"))
        n, t, p = hdr["N"], hdr["num_terms"], hdr["num_postings"]
        pos += hdr_len

        def take(dtype: str, count: int) -> np.ndarray:
            nonlocal pos
            arr = np.frombuffer(body, dtype=dtype, count=count, offset=pos)
            pos += arr.nbytes
            return arr

        doc_lens = take("<i4", n)
        offsets = take("<i8", t + 1)
        post_docs = take("<i4", p)
        post_tfs = take("<i4", p)
        ids_raw = body[pos : pos + hdr["doc_ids_bytes"]]
        pos += hdr["doc_ids_bytes"]
        terms_raw = body[pos : pos + hdr["terms_bytes"]]
        pos += hdr["terms_bytes"]
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise FormatVersionMismatch(f"{path}: corrupt index ({exc})") from None
    if pos != len(body):
        raise FormatVersionMismatch(f"{path}: section sizes do not match file length")

    doc_ids = ids_raw.decode("utf-8").split("\n") if n else []
    terms = terms_raw.decode("utf-8").split("\n") if t else []
    if len(doc_ids) != n or len(terms) != t:
        raise FormatVersionMismatch(f"{path}: string table sizes disagree with header")
    return PostingsIndex(hdr["field_name"], doc_ids, doc_lens, terms, offsets, post_docs, post_tfs)
