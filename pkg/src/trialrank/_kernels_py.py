"""Numpy fallback for the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def bm25_accumulate(scores, docs, tfs, doc_lens, idf, k1, b, avgdl):
    """Add one query term's BM25 contribution to ``scores`` in place.

    ``docs`` holds distinct ordinals, so fancy-index ``+=`` is safe.
    """
    tf = np.asarray(tfs, dtype=np.float64)
    dl = np.asarray(doc_lens, dtype=np.float64)[docs]
    scores[docs] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))


def doc_lengths_sum(doc_lens):
    return int(np.asarray(doc_lens, dtype=np.int64).sum())
