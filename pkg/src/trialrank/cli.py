"""Command-line entry point: ``trialrank <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import load_config
from .corpus import VIEW_NAMES, ingest, read_corpus
from .errors import ConfigError, DataError, InvalidConfig
from .evaluation import compare_to_median, evaluate, parse_medians, parse_qrels
from .fusion import fuse, tt_mw_criteria
from .index import build_index, index_path, load_index, save_index
from .keywords import KeywordConfig, extract_keywords, make_embedder, read_keyword_dump, write_keyword_dump
from .pipeline import run_pipeline, stage
from .queries import read_queries, with_keywords
from .retrieval import DEFAULT_DEPTH, Bm25Params, ScoredRun, parse_run, search, write_run
from .textproc import analyze, load_stoplist

log = logging.getLogger("trialrank")

EXIT_CONFIG = 2
EXIT_DATA = 3


def _weights(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated weights (in, ex, main)")
    try:
        return tuple(float(Fraction(p)) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _qid_key(q: str):
    return (0, int(q), q) if q.isdigit() else (1, 0, q)


def cmd_ingest(args) -> None:
    with stage("ingest"):
        n = ingest(args.input, args.output, workers=args.threads)
    log.info("wrote %d trials to %s", n, args.output)


def cmd_build_index(args) -> None:
    views = [v.strip() for v in args.views.split(",")] if args.views else list(VIEW_NAMES)
    stoplist = load_stoplist(args.stoplist)
    corpus = list(read_corpus(args.corpus))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for view in views:
        with stage(f"index {view}"):
            idx = build_index(corpus, view, stoplist, workers=args.threads)
            path = index_path(out_dir, args.collection, view)
            save_index(idx, path)
        log.info("%s: %d docs, %d terms, avg len %.1f", path, idx.N, len(idx.terms), idx.avg_doc_len)


def cmd_extract_keywords(args) -> None:
    queries = read_queries(args.queries)
    embedder = make_embedder(args.provider, args.cache, args.endpoint, args.timeout, args.max_in_flight)
    config = KeywordConfig(args.lam, args.length_policy, budget_unit=args.budget_unit,
                           standardized=args.standardized)
    stoplist = load_stoplist(args.stoplist)
    with stage("extract keywords"):
        dump = [(q.query_id, extract_keywords(q.qd_text, embedder, config, stoplist)) for q in queries]
    write_keyword_dump(args.output, dump)
    log.info("wrote keywords for %d queries to %s", len(dump), args.output)


def cmd_search(args) -> None:
    index = load_index(args.index)
    queries = read_queries(args.queries)
    if args.representation == "Qk":
        if not args.keywords:
            raise InvalidConfig("--representation Qk needs --keywords")
        queries = with_keywords(queries, read_keyword_dump(args.keywords))
    params = Bm25Params(args.k1, args.b)
    stoplist = load_stoplist(args.stoplist)
    tag = args.run_tag or f"bm25_{index.field_name}"
    with stage("search"):
        runs = [
            search(analyze(q.text(args.representation), stoplist), index, args.k, tag, params, q.query_id)
            for q in queries
        ]
    write_run(args.output, runs)


def cmd_fuse(args) -> None:
    runs_in, runs_ex, runs_main = (parse_run(p) for p in (args.run_in, args.run_ex, args.run_main))
    criteria = tt_mw_criteria(*args.weights)
    qids = sorted(set(runs_in) | set(runs_ex) | set(runs_main), key=_qid_key)
    fused = []
    for qid in qids:
        parts = [r.get(qid) or ScoredRun(qid, []) for r in (runs_in, runs_ex, runs_main)]
        fused.append(fuse(*parts, criteria=criteria, pool_depth=args.pool_depth, depth=args.depth,
                          run_tag=args.run_tag, diagnostics_dir=args.diagnostics))
    write_run(args.output, fused)


def cmd_evaluate(args) -> None:
    runs = parse_run(args.run)
    qrels = parse_qrels(args.qrels)
    report = evaluate(runs, qrels, k=args.k, threshold=args.threshold, gain=args.gain)
    if args.median:
        metric = args.median_metric or f"ndcg_cut_{args.k}"
        if metric not in report.mean:
            raise InvalidConfig(f"unknown metric {metric!r}; choose from {', '.join(report.mean)}")
        values = {q: v[metric] for q, v in report.per_query.items()}
        report.improved[metric] = compare_to_median(values, parse_medians(args.median))
    sys.stdout.write(report.table())
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")


def cmd_run(args) -> None:
    config = load_config(args.config)
    out = run_pipeline(config, build_missing=args.build_indexes, threads=args.threads)
    log.info("run %s written to %s", config.run_name, out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trialrank", description="Clinical-trial retrieval with BM25 and TOPSIS fusion.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel stages")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="parse trial records into a field-view corpus file")
    s.add_argument("--input", required=True, help="directory of XML records or line-delimited file")
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("build-index", help="index field views of a corpus file")
    s.add_argument("--corpus", required=True)
    s.add_argument("--views", help=f"comma-separated subset of {','.join(VIEW_NAMES)} (default: all)")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--collection", default="trials")
    s.add_argument("--stoplist")
    s.set_defaults(func=cmd_build_index)

    s = sub.add_parser("extract-keywords", help="reduce verbose queries to keyword queries")
    s.add_argument("--queries", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--length-policy", default="dynamic-half", choices=["dynamic-half", "fixed"])
    s.add_argument("--budget-unit", default="tokens", choices=["tokens", "phrases"])
    s.add_argument("--standardized", action="store_true", help="use standardised MMR similarities")
    s.add_argument("--provider", default="hash", choices=["hash", "http", "cache"])
    s.add_argument("--cache", help="embedding cache file")
    s.add_argument("--endpoint", help="embedding service URL (default: $TRIALRANK_EMBED_URL)")
    s.add_argument("--timeout", type=float, default=30.0)
    s.add_argument("--max-in-flight", type=int, default=8)
    s.add_argument("--stoplist")
    s.set_defaults(func=cmd_extract_keywords)

    s = sub.add_parser("search", help="BM25 search over one index")
    s.add_argument("--index", required=True)
    s.add_argument("--queries", required=True)
    s.add_argument("--representation", default="Qd", choices=["Qd", "Qk"])
    s.add_argument("--keywords", help="keyword dump for Qk")
    s.add_argument("--k", type=int, default=DEFAULT_DEPTH)
    s.add_argument("--k1", type=float, default=1.2)
    s.add_argument("--b", type=float, default=0.75)
    s.add_argument("--run-tag")
    s.add_argument("--stoplist")
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("fuse", help="TOPSIS fusion of inclusion/exclusion/main runs")
    s.add_argument("--run-in", required=True)
    s.add_argument("--run-ex", required=True)
    s.add_argument("--run-main", required=True)
    s.add_argument("--weights", type=_weights, default=(1 / 3, 1 / 3, 1 / 3), help="w_in,w_ex,w_main (fractions ok)")
    s.add_argument("--pool-depth", type=int, default=DEFAULT_DEPTH)
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    s.add_argument("--run-tag", default="tt_mw")
    s.add_argument("--diagnostics", help="directory for per-query TOPSIS dumps")
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_fuse)

    s = sub.add_parser("evaluate", help="NDCG, P@k and RR against qrels")
    s.add_argument("--run", required=True)
    s.add_argument("--qrels", required=True)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--threshold", type=int, default=1, help="minimum grade counted relevant for P and RR")
    s.add_argument("--gain", default="linear", choices=["linear", "exponential"])
    s.add_argument("--median", help="per-query median file (query_id value)")
    s.add_argument("--median-metric", help="metric compared with the medians (default NDCG@k)")
    s.add_argument("--json", help="also write the report as JSON")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("run", help="execute a run configuration end to end")
    s.add_argument("--config", required=True)
    s.add_argument("--build-indexes", action="store_true", help="build missing indexes from the config's corpus")
    s.set_defaults(func=cmd_run)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
