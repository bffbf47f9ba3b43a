"""Compare the compiled BM25 accumulation kernel with the numpy fallback.

    python benchmarks/bench_kernels.py --docs 500000 --terms 20 --repeat 5
"""
import argparse
import time

import numpy as np

from trialrank import _kernels_py

try:
    from trialrank import _kernels
except ImportError:
    _kernels = None


def make_postings(rng, n_docs, n_terms, max_df):
    postings = []
    for _ in range(n_terms):
        df = int(rng.integers(1, max_df))
        docs = np.sort(rng.choice(n_docs, df, replace=False)).astype(np.int32)
        tfs = rng.integers(1, 12, df).astype(np.int32)
        postings.append((docs, tfs, float(rng.uniform(0.1, 8.0))))
    return postings


def bench(kernel, postings, doc_lens, avgdl, repeat):
    best = float("inf")
    scores = None
    for _ in range(repeat):
        scores = np.zeros(doc_lens.shape[0])
        t0 = time.perf_counter()
        for docs, tfs, idf in postings:
            kernel.bm25_accumulate(scores, docs, tfs, doc_lens, idf, 1.2, 0.75, avgdl)
        best = min(best, time.perf_counter() - t0)
    return best, scores


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--docs", type=int, default=375_000, help="collection size (TREC 2021 has ~375k trials)")
    p.add_argument("--terms", type=int, default=30, help="query terms")
    p.add_argument("--max-df", type=int, default=60_000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    doc_lens = rng.integers(20, 2000, args.docs).astype(np.int32)
    avgdl = float(doc_lens.mean())
    postings = make_postings(rng, args.docs, args.terms, args.max_df)
    n_post = sum(len(d) for d, _, _ in postings)
    print(f"{args.docs} docs, {args.terms} terms, {n_post} postings, best of {args.repeat}")

    t_py, s_py = bench(_kernels_py, postings, doc_lens, avgdl, args.repeat)
    print(f"numpy    {t_py * 1e3:9.2f} ms  {n_post / t_py / 1e6:7.1f} Mpostings/s")
    if _kernels is None:
        print("compiled kernel not built; install with the extension to compare")
        return
    t_cy, s_cy = bench(_kernels, postings, doc_lens, avgdl, args.repeat)
    print(f"cython   {t_cy * 1e3:9.2f} ms  {n_post / t_cy / 1e6:7.1f} Mpostings/s")
    print(f"speed-up {t_py / t_cy:.2f}x, scores identical: {np.array_equal(s_py, s_cy)}")


if __name__ == "__main__":
    main()
