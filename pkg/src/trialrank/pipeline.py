"""End-to-end execution of a RunConfig."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Sequence

from .config import RunConfig
from .corpus import FieldViews, read_corpus
from .errors import InvalidConfig, MissingIndex
from .fusion import fuse
from .index import PostingsIndex, build_index, index_path, load_index, save_index
from .keywords import Embedder, extract_keywords, make_embedder, read_keyword_dump, write_keyword_dump
from .queries import read_queries, with_keywords
from .retrieval import (
    IdentityReranker,
    Query,
    Reranker,
    ScoredRun,
    ScoreFileReranker,
    rerank_hook,
    search,
    write_run,
)
from .textproc import analyze, load_stoplist

log = logging.getLogger(__name__)


@contextmanager
def stage(name: str):
    t0 = time.perf_counter()
    yield
    log.info("%s: %.2fs", name, time.perf_counter() - t0)


def ensure_indexes(config: RunConfig, build_missing: bool = False, workers: int = 1,
                   corpus: Sequence[FieldViews] | None = None) -> dict[str, PostingsIndex]:
    """Load the config's view indexes, optionally building absent ones from the corpus."""
    if config.index_dir is None:
        raise InvalidConfig("config has no index_dir")
    stoplist = load_stoplist(config.stoplist)
    out = {}
    for view in config.views:
        path = index_path(config.index_dir, config.collection, view)
        if path.exists():
            out[view] = load_index(path)
            continue
        if not build_missing:
            raise MissingIndex(f"index {path} not found; run build-index first")
        if corpus is None:
            if config.corpus is None:
                raise InvalidConfig("cannot build indexes: config has no corpus")
            corpus = list(read_corpus(config.corpus))
        with stage(f"build {view}"):
            idx = build_index(corpus, view, stoplist, workers=workers)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_index(idx, path)
        log.info("built %s (%d docs, %d terms)", path, idx.N, len(idx.terms))
        out[view] = idx
    return out


def keyword_queries(queries: Sequence[Query], config: RunConfig, embedder: Embedder | None = None) -> list[Query]:
    """Attach keyword representations, from the config's dump or by extraction."""
    if config.keywords is not None and Path(config.keywords).exists():
        return with_keywords(list(queries), read_keyword_dump(config.keywords))
    if embedder is None:
        embedder = make_embedder(config.embedding_provider, config.embedding_cache, config.embedding_endpoint)
    stoplist = load_stoplist(config.stoplist)
    out = [
        Query(q.query_id, q.qd_text, tuple(extract_keywords(q.qd_text, embedder, config.keyword_config, stoplist)))
        for q in queries
    ]
    if config.keywords is not None:
        write_keyword_dump(config.keywords, [(q.query_id, q.qk_terms) for q in out])
    return out


def make_reranker(config: RunConfig) -> Reranker:
    if config.reranker == "identity":
        return IdentityReranker()
    return ScoreFileReranker(config.reranker)


def run_query(query: Query, config: RunConfig, indexes: dict[str, PostingsIndex],
              reranker: Reranker | None = None, stoplist: frozenset[str] | None = None) -> ScoredRun:
    terms = analyze(query.text(config.query_representation), stoplist)
    params = config.bm25_params
    if config.relevance_model == "TT_MW":
        runs = {
            v: search(terms, indexes[v], config.pool_depth, config.run_tag, params, query.query_id)
            for v in ("i_in", "i_ex", "i_main")
        }
        return fuse(runs["i_in"], runs["i_ex"], runs["i_main"], config.criteria,
                    config.pool_depth, config.depth, config.run_tag)
    run = search(terms, indexes[config.views[0]], config.depth, config.run_tag, params, query.query_id)
    if config.relevance_model == "BM25+rerank":
        run = rerank_hook(run, reranker, query.text(config.query_representation))
    return run


def run_pipeline(
    config: RunConfig,
    queries: Sequence[Query] | None = None,
    indexes: dict[str, PostingsIndex] | None = None,
    embedder: Embedder | None = None,
    reranker: Reranker | None = None,
    build_missing: bool = False,
    threads: int = 1,
) -> Path:
    """Execute one configured run and write its TREC run file."""
    if queries is None:
        if config.queries is None:
            raise InvalidConfig("config has no queries file")
        queries = read_queries(config.queries)
    if indexes is None:
        with stage("load indexes"):
            indexes = ensure_indexes(config, build_missing, workers=threads)
    if config.query_representation == "Qk" and any(q.qk_terms is None for q in queries):
        with stage("keyword extraction"):
            queries = keyword_queries(queries, config, embedder)
    if config.relevance_model == "BM25+rerank" and reranker is None:
        reranker = make_reranker(config)
    stoplist = load_stoplist(config.stoplist)

    with stage(f"retrieval ({len(queries)} queries)"):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                runs = list(pool.map(lambda q: run_query(q, config, indexes, reranker, stoplist), queries))
        else:
            runs = [run_query(q, config, indexes, reranker, stoplist) for q in queries]

    out = Path(config.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_run(out, runs)
    log.info("wrote %s (%d rows)", out, sum(len(r) for r in runs))
    return out
