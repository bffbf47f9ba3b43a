"""BM25 scoring, top-k search, re-ranking hook and TREC run files."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, NamedTuple, Protocol, Sequence

import numpy as np

from .errors import EmptyIndex, InvalidConfig, MalformedRun, RerankerUnavailable, UnknownDocument
from .index import PostingsIndex
from .kernels import bm25_accumulate
from .textproc import analyze

DEFAULT_DEPTH = 1000


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise InvalidConfig(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise InvalidConfig(f"b must lie in [0, 1], got {self.b}")


@dataclass(frozen=True)
class Query:
    query_id: str
    qd_text: str
    qk_terms: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.query_id or not self.qd_text.strip():
            raise ValueError("query_id and qd_text must be non-empty")

    def text(self, representation: str) -> str:
        """Text for the ``Qd`` (verbose) or ``Qk`` (keyword) representation."""
        if representation == "Qd":
            return self.qd_text
        if representation == "Qk":
            if self.qk_terms is None:
                raise InvalidConfig(f"query {self.query_id} has no keyword representation")
            return " ".join(self.qk_terms)
        raise InvalidConfig(f"unknown query representation {representation!r}")


class Hit(NamedTuple):
    doc_id: str
    score: float
    rank: int


@dataclass
class ScoredRun:
    query_id: str
    hits: list[Hit] = field(default_factory=list)
    run_tag: str = "run"

    @classmethod
    def from_ranked(cls, query_id: str, pairs: Iterable[tuple[str, float]], run_tag: str) -> "ScoredRun":
        """Build a run from (doc_id, score) pairs already in rank order."""
        hits = [Hit(d, float(s), r) for r, (d, s) in enumerate(pairs, 1)]
        return cls(query_id, hits, run_tag)

    def __len__(self) -> int:
        return len(self.hits)

    @property
    def doc_ids(self) -> list[str]:
        return [h.doc_id for h in self.hits]

    def scores(self) -> dict[str, float]:
        return {h.doc_id: h.score for h in self.hits}

    def validate(self) -> None:
        seen = set()
        for i, h in enumerate(self.hits):
            if h.rank != i + 1:
                raise MalformedRun(f"query {self.query_id}: ranks not contiguous at {h.rank}")
            if i and h.score > self.hits[i - 1].score:
                raise MalformedRun(f"query {self.query_id}: scores increase at rank {h.rank}")
            if h.doc_id in seen:
                raise MalformedRun(f"query {self.query_id}: duplicate doc {h.doc_id}")
            seen.add(h.doc_id)


# ---------------------------------------------------------------------------
# scoring


def idf(n_docs: int, df: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def bm25_score(
    query_terms: Sequence[str], doc_ordinal: int, index: PostingsIndex, params: Bm25Params = Bm25Params()
) -> float:
    """BM25 of one document; ``query_terms`` are already pipeline-processed.

    Repeated query terms count once per occurrence.
    """
    if not 0 <= doc_ordinal < index.N:
        raise UnknownDocument(f"ordinal {doc_ordinal} not in index of {index.N} docs")
    k1, b = params.k1, params.b
    dl = float(index.doc_lens[doc_ordinal])
    score = 0.0
    for term in query_terms:
        tf = float(index.tf(term, doc_ordinal))
        if tf == 0.0:
            continue
        w = idf(index.N, index.df(term))
        score += w * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / index.avg_doc_len))
    return score


def score_all(query_terms: Sequence[str], index: PostingsIndex, params: Bm25Params = Bm25Params()) -> np.ndarray:
    """BM25 of every document in the index, accumulated term by term."""
    scores = np.zeros(index.N, dtype=np.float64)
    for term in query_terms:
        docs, tfs = index.postings(term)
        if len(docs) == 0:
            continue
        w = idf(index.N, len(docs))
        bm25_accumulate(scores, docs, tfs, index.doc_lens, w, params.k1, params.b, index.avg_doc_len)
    return scores


def rank_scores(scores: np.ndarray, index: PostingsIndex, k: int) -> list[tuple[str, float]]:
    """Top-k (doc_id, score) with score > 0, ties by ascending doc_id."""
    nz = np.flatnonzero(scores > 0)
    if len(nz) > k:
        # keep everything tied with the k-th best so tie-breaking stays exact
        kth = np.partition(scores[nz], len(nz) - k)[len(nz) - k]
        nz = nz[scores[nz] >= kth]
    order = np.lexsort((index.doc_id_rank[nz], -scores[nz]))[:k]
    return [(index.doc_ids[i], float(scores[i])) for i in nz[order]]


def search(
    query_terms: Sequence[str],
    index: PostingsIndex,
    k: int = DEFAULT_DEPTH,
    run_tag: str = "bm25",
    params: Bm25Params = Bm25Params(),
    query_id: str = "q",
) -> ScoredRun:
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    if index.N == 0:
        raise EmptyIndex(f"index over {index.field_name} has no documents")
    scores = score_all(query_terms, index, params)
    return ScoredRun.from_ranked(query_id, rank_scores(scores, index, k), run_tag)


def search_text(query_id: str, text: str, index: PostingsIndex, k: int = DEFAULT_DEPTH,
                run_tag: str = "bm25", params: Bm25Params = Bm25Params(), stoplist=None) -> ScoredRun:
    return search(analyze(text, stoplist), index, k, run_tag, params, query_id)


# ---------------------------------------------------------------------------
# re-ranking plug point


class Reranker(Protocol):
    def scores(self, run: ScoredRun, query_text: str) -> Sequence[float]:
        """One score per hit of ``run``, in hit order."""


class IdentityReranker:
    def scores(self, run: ScoredRun, query_text: str) -> list[float]:
        return [h.score for h in run.hits]


class ScoreFileReranker:
    """Scores precomputed by an external model, read from ``qid docid score`` lines.

    TREC run files are accepted too (the score is taken from column 5).
    """

    def __init__(self, path: str | Path):
        self.table: dict[tuple[str, str], float] = {}
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise RerankerUnavailable(f"cannot read reranker scores {path}: {exc}") from None
        for lineno, line in enumerate(lines, 1):
            cols = line.split()
            if not cols:
                continue
            try:
                if len(cols) == 3:
                    self.table[(cols[0], cols[1])] = float(cols[2])
                elif len(cols) == 6:
                    self.table[(cols[0], cols[2])] = float(cols[4])
                else:
                    raise ValueError("expected 3 or 6 columns")
            except ValueError as exc:
                raise RerankerUnavailable(f"{path}:{lineno}: {exc}") from None

    def scores(self, run: ScoredRun, query_text: str) -> list[float]:
        try:
            return [self.table[(run.query_id, h.doc_id)] for h in run.hits]
        except KeyError as exc:
            raise RerankerUnavailable(f"no reranker score for {exc.args[0]}") from None


def rerank_hook(run: ScoredRun, reranker: Reranker | None, query_text: str = "") -> ScoredRun:
    """Reorder a run by reranker scores; equal scores keep their original order."""
    if reranker is None:
        raise RerankerUnavailable("no reranker configured")
    try:
        new_scores = [float(s) for s in reranker.scores(run, query_text)]
    except RerankerUnavailable:
        raise
    except Exception as exc:
        raise RerankerUnavailable(f"reranker failed: {exc}") from exc
    if len(new_scores) != len(run.hits):
        raise RerankerUnavailable(
            f"reranker returned {len(new_scores)} scores for {len(run.hits)} hits"
        )
    order = sorted(range(len(new_scores)), key=lambda i: -new_scores[i])
    return ScoredRun.from_ranked(
        run.query_id, ((run.hits[i].doc_id, new_scores[i]) for i in order), run.run_tag
    )


# ---------------------------------------------------------------------------
# TREC run format


def format_run(run: ScoredRun) -> str:
    return "".join(
        f"{run.query_id} Q0 {h.doc_id} {h.rank} {h.score:.6f} {run.run_tag}\n" for h in run.hits
    )


def write_run(dest: str | Path | IO[str], runs: Iterable[ScoredRun]) -> None:
    if isinstance(dest, (str, Path)):
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        with Path(dest).open("w", encoding="utf-8") as fh:
            write_run(fh, runs)
        return
    for run in runs:
        dest.write(format_run(run))


def parse_run(path: str | Path) -> dict[str, ScoredRun]:
    """Read a TREC run file; hits are ordered by their rank column."""
    rows: dict[str, list[tuple[int, str, float, str]]] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MalformedRun(f"cannot read run {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        cols = line.split()
        if not cols:
            continue
        if len(cols) != 6:
            raise MalformedRun(f"{path}:{lineno}: expected 6 columns, got {len(cols)}")
        qid, _, doc, rank, score, tag = cols
        try:
            rows.setdefault(qid, []).append((int(rank), doc, float(score), tag))
        except ValueError:
            raise MalformedRun(f"{path}:{lineno}: bad rank or score") from None

    runs = {}
    for qid, entries in rows.items():
        entries.sort(key=lambda e: e[0])
        hits = [Hit(doc, score, i) for i, (_, doc, score, _) in enumerate(entries, 1)]
        run = ScoredRun(qid, hits, entries[0][3])
        if len({h.doc_id for h in hits}) != len(hits):
            raise MalformedRun(f"{path}: duplicate doc_id in query {qid}")
        runs[qid] = run
    return runs
