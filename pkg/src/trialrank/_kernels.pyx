# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled BM25 accumulation kernel.

The arithmetic mirrors ``_kernels_py`` operation for operation so both
backends produce bit-identical scores.
"""


def bm25_accumulate(double[::1] scores, const int[::1] docs, const int[::1] tfs,
                    const int[::1] doc_lens, double idf, double k1, double b,
                    double avgdl):
    """Add one query term's BM25 contribution to ``scores`` in place."""
    cdef Py_ssize_t i, n = docs.shape[0]
    cdef int d
    cdef double tf, dl
    with nogil:
        for i in range(n):
            d = docs[i]
            tf = tfs[i]
            dl = doc_lens[d]
            scores[d] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))


def doc_lengths_sum(const int[::1] doc_lens):
    cdef Py_ssize_t i
    cdef long long total = 0
    with nogil:
        for i in range(doc_lens.shape[0]):
            total += doc_lens[i]
    return total
