"""Clinical-trial retrieval: multi-field BM25, keyword query reduction and TOPSIS fusion."""

__version__ = "0.1.0"
