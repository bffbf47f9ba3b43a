"""Acceptance suite: one test per criterion, each timed against its budget.

Every test prints a single PASS/FAIL line (visible with ``pytest -v`` or
``-s``) and fails if either the check or the runtime budget fails.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import VOCAB, index_of
from oracles import bm25_brute_force, random_matrix, topsis_reference
from trialrank.config import load_config
from trialrank.corpus import ingest, read_corpus
from trialrank.evaluation import evaluate, ndcg_at_k, parse_qrels
from trialrank.fusion import DecisionMatrix, topsis_rank, tt_mw_criteria
from trialrank.index import build_index, index_path, load_index
from trialrank.keywords import CandidatePhrase, KeywordConfig, mmr_select, read_keyword_dump
from trialrank.pipeline import run_pipeline
from trialrank.queries import read_queries
from trialrank.retrieval import ScoredRun, bm25_score, parse_run, score_all, search
from trialrank.textproc import analyze, stem

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def criterion(capsys):
    """Run ``check`` under a time budget and print one PASS/FAIL line."""

    def run(name, budget_s, check):
        t0 = time.perf_counter()
        error = None
        try:
            detail = check()
        except AssertionError as exc:
            error, detail = exc, str(exc).splitlines()[0] if str(exc) else "assertion failed"
        elapsed = time.perf_counter() - t0
        over = budget_s is not None and elapsed >= budget_s
        ok = error is None and not over
        limit = f" < {budget_s:g}s" if budget_s is not None else ""
        note = "; over budget" if over else ""
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.2f}s{limit}{note})")
        if error is not None:
            raise error
        assert not over, f"{name} took {elapsed:.2f}s, budget {budget_s}s"

    return run


def _matrix(values, ids=None):
    ids = ids or [f"d{i}" for i in range(len(values))]
    return DecisionMatrix("q", ids, np.asarray(values, dtype=float), tt_mw_criteria())


def test_topsis_matches_reference(criterion):
    def check():
        rng = np.random.default_rng(20211)
        worst = 0.0
        for _ in range(500):
            values = random_matrix(rng, max_docs=6)
            got = {a.doc_id: a.closeness for a in topsis_rank(_matrix(values))}
            ref = topsis_reference(values.tolist())
            worst = max(worst, max(abs(got[f"d{i}"] - r) for i, r in enumerate(ref)))
        assert worst <= 1e-9, f"max closeness deviation {worst:.3g}"
        ranking = topsis_rank(_matrix([[3, 2, 4], [1, 0, 2]], ["A", "B"]))
        close = {a.doc_id: a.closeness for a in ranking}
        assert abs(close["A"] - 0.4365) < 5e-5 and abs(close["B"] - 0.5635) < 5e-5, close
        assert ranking[0].doc_id == "B"
        return f"500 matrices, max deviation {worst:.2g}; A={close['A']:.4f} B={close['B']:.4f}"

    criterion("TOPSIS oracle equivalence", 5, check)


def test_topsis_scale_invariance(criterion):
    def check():
        rng = np.random.default_rng(7)
        for _ in range(200):
            values = random_matrix(rng, max_docs=6)
            base = [a.doc_id for a in topsis_rank(_matrix(values))]
            for col in range(3):
                scaled = values.copy()
                scaled[:, col] *= math.exp(rng.uniform(-7, 7))
                assert [a.doc_id for a in topsis_rank(_matrix(scaled))] == base, (values, col)
        return "200 matrices x 3 columns, orderings identical"

    criterion("TOPSIS scale invariance", 5, check)


def test_bm25_brute_force(criterion):
    def check():
        rng = np.random.default_rng(3)
        for _ in range(300):
            n_docs = int(rng.integers(1, 51))
            texts = [" ".join(rng.choice(VOCAB, size=int(rng.integers(0, 12)))) for _ in range(n_docs)]
            if not any(texts):
                texts[0] = VOCAB[0]
            query = list(rng.choice(VOCAB + ["absent"], size=int(rng.integers(1, 6))))
            k = int(rng.integers(1, 60))
            run = search([stem(q) for q in query], index_of(texts), k=k)
            expected = bm25_brute_force(texts, query, k)
            assert run.doc_ids == [d for d, _ in expected], (texts, query, k)
            assert np.allclose([h.score for h in run.hits], [s for _, s in expected], rtol=1e-12, atol=0)
        ln2 = bm25_score(["aspirin"], 0, index_of(["aspirin", "heart"]))
        assert abs(ln2 - math.log(2)) < 1e-12, ln2
        return f"300 random corpora (<=50 docs) match; single-term score {ln2:.4f}"

    criterion("BM25 brute-force equivalence", 10, check)


def test_mmr_correctness(criterion):
    def check():
        # hand example realised as vectors with the stated cosines
        gram = np.array([[1, .9, .85, .3], [.9, 1, .95, 0], [.85, .95, 1, 0], [.3, 0, 0, 1]])
        rows = np.linalg.cholesky(gram)
        cands = [CandidatePhrase(s, 1, v) for s, v in zip(("1", "2", "3"), rows[1:])]
        picked = mmr_select(rows[0], cands, KeywordConfig(lam=0.5), budget=2)
        assert picked == ["1", "3"], picked

        rng = np.random.default_rng(5)
        for _ in range(300):
            n = int(rng.integers(1, 13))
            vecs = rng.standard_normal((n, 8))
            q = rng.standard_normal(8)
            counts = rng.integers(1, 3, n)
            cands = [CandidatePhrase(f"p{i}" + " x" * (c - 1), int(c), v) for i, (c, v) in enumerate(zip(counts, vecs))]
            budget = int(rng.integers(1, 16))

            # lambda = 1 over unigrams equals the top-budget similarity sort
            uni = [CandidatePhrase(f"p{i}", 1, v) for i, v in enumerate(vecs)]
            sims = vecs @ q / (np.linalg.norm(vecs, axis=1) * np.linalg.norm(q))
            expected = [f"p{i}" for i in sorted(range(n), key=lambda i: (-sims[i], f"p{i}"))][:budget]
            assert mmr_select(q, uni, KeywordConfig(lam=1.0), budget=budget) == expected

            lam = float(rng.uniform())
            picked = mmr_select(q, cands, KeywordConfig(lam=lam), budget=budget)
            tokens = {c.surface: c.token_count for c in cands}
            covered = sum(tokens[s] for s in picked)
            assert len(set(picked)) == len(picked)
            assert covered >= budget or len(picked) == n
            assert covered - tokens[picked[-1]] < budget
        return "hand example selects {1,3}; 300 random lambda=1 and budget checks hold"

    criterion("MMR correctness", 5, check)


def test_metric_parity(criterion):
    def check():
        d = FIXTURES / "metrics"
        expected = json.loads((d / "expected.json").read_text())
        report = evaluate(parse_run(d / "run.txt"), parse_qrels(d / "qrels.txt"), k=10)
        worst = 0.0
        for qid, metrics in expected.items():
            for name in ("ndcg_cut_10", "P_10", "recip_rank"):
                worst = max(worst, abs(report.per_query[qid][name] - metrics[name]))
        assert worst <= 1e-6, f"max deviation {worst:.3g}"
        rank2 = ndcg_at_k(ScoredRun.from_ranked("1", [("x", 2.0), ("rel", 1.0)], "t"), {"rel": 2}, 10)
        assert abs(rank2 - 0.6309) < 1e-4, rank2
        return f"3 queries x 20 judged docs, max deviation {worst:.2g}; rank-2 NDCG {rank2:.4f}"

    criterion("Metric parity", 1, check)


def test_porter_fixture(criterion):
    def check():
        pairs = [l.split("\t") for l in (FIXTURES / "porter_pairs.tsv").read_text().splitlines() if l]
        assert len(pairs) == 200
        wrong = [(w, stem(w), s) for w, s in pairs if stem(w) != s]
        assert not wrong, f"{len(wrong)} mismatches, first {wrong[0]}"
        return "200/200 pairs exact"

    criterion("Porter stemmer fixture", None, check)


def test_end_to_end(criterion, minicorpus):
    def check():
        d = minicorpus
        assert ingest(d / "trials", d / "work" / "corpus.jsonl") == 20
        outputs = {}
        for name in ("r1", "r2", "r3"):
            cfg = load_config(d / f"{name}.cfg")
            first = run_pipeline(cfg, build_missing=True).read_bytes()
            again = run_pipeline(cfg).read_bytes()
            assert first == again, f"{name} not deterministic"
            runs = parse_run(cfg.output)
            assert set(runs) == {"1", "2", "3"}, name
            for r in runs.values():
                r.validate()
                assert 0 < len(r) <= 1000
            outputs[name] = runs
        for name in ("r2", "r3"):
            top = outputs[name]["1"].doc_ids[0]
            assert top == "NCT90000001", f"{name} ranks {top} first"

        cfg = load_config(d / "r2.cfg")
        corpus = list(read_corpus(d / "work" / "corpus.jsonl"))
        keyword_terms = [" ".join(v) for v in read_keyword_dump(d / "work" / "keywords.jsonl").values()]
        texts = [q.qd_text for q in read_queries(d / "topics.xml")] + keyword_terms
        for view in ("i_comb", "i_in", "i_ex", "i_main"):
            in_memory = build_index(corpus, view)
            loaded = load_index(index_path(cfg.index_dir, cfg.collection, view))
            assert loaded.same_as(in_memory), view
            for text in texts:
                terms = analyze(text)
                assert np.array_equal(score_all(terms, loaded), score_all(terms, in_memory)), view
        return "R1/R2/R3 valid and byte-identical on rerun; dominating trial first; index round-trip exact"

    criterion("End-to-end mini-corpus", 30, check)
