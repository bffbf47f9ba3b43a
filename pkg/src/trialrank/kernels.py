"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded.  Set ``TRIALRANK_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("TRIALRANK_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import bm25_accumulate, doc_lengths_sum

    BACKEND = "python"
else:
    try:
        from ._kernels import bm25_accumulate, doc_lengths_sum

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import bm25_accumulate, doc_lengths_sum

        BACKEND = "python"

__all__ = ["BACKEND", "bm25_accumulate", "doc_lengths_sum"]
