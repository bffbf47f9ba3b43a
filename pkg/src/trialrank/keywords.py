"""Verbose-query reduction by embedding similarity and maximal marginal relevance.

Embeddings come from a provider behind a small protocol (``embed(text)``).
Three providers ship: a deterministic hashed bag-of-words model for offline
use, an HTTP client for an external model service, and a cache-only mode.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyQuery, InvalidConfig, ProviderUnavailable, ZeroVector
from .textproc import default_stoplist, remove_stopwords, tokenize

log = logging.getLogger(__name__)

ENDPOINT_ENV = "TRIALRANK_EMBED_URL"


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> np.ndarray: ...


class HashingProvider:
    """Deterministic bag-of-words embedding for tests and offline runs.

    Each token maps to a standard-normal vector drawn from a generator seeded
    with ``blake2b(token, key=seed)``; a text embeds to the sum over its tokens.
    The default seed is 20211 and the default dimension 256.
    """

    def __init__(self, dim: int = 256, seed: int = 20211):
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little")

    def _token_vector(self, token: str) -> np.ndarray:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        return rng.standard_normal(self.dim)

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text) or [text]
        vec = np.zeros(self.dim)
        for tok in tokens:
            vec += self._token_vector(tok)
        return vec


class HttpProvider:
    """POSTs ``{"text": ...}`` and expects ``{"vector": [...]}`` back."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps({"text": text}).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
            return np.asarray(payload["vector"], dtype=np.float64)
        except (urllib.error.URLError, OSError, ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"embedding service at {self.endpoint} failed: {exc}") from None


class Embedder:
    """Caching front-end over a provider.

    Results are cached by exact text.  With ``cache_path`` set, the cache is
    loaded from and appended to a line-delimited JSON file of
    ``{"text", "dim", "values"}`` records.  ``provider=None`` means
    cache-only: a miss raises ProviderUnavailable.
    """

    def __init__(self, provider: EmbeddingProvider | None, cache_path: str | Path | None = None,
                 dim: int | None = None, max_in_flight: int = 8):
        self.provider = provider
        self.dim = dim
        self.max_in_flight = max(1, max_in_flight)
        self.cache_path = Path(cache_path) if cache_path else None
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        self.provider_calls = 0
        if self.cache_path and self.cache_path.exists():
            self._load_cache()

    def _load_cache(self) -> None:
        with self.cache_path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                rec = json.loads(line)
                vec = np.asarray(rec["values"], dtype=np.float64)
                if vec.shape != (rec["dim"],):
                    raise DimensionMismatch(f"{self.cache_path}:{lineno}: dim field disagrees with values")
                self._check_dim(vec)
                self._cache[rec["text"]] = vec

    def _check_dim(self, vec: np.ndarray) -> None:
        if vec.ndim != 1 or vec.size == 0:
            raise DimensionMismatch(f"embedding must be a non-empty 1-d vector, got shape {vec.shape}")
        if self.dim is None:
            self.dim = vec.shape[0]
        elif vec.shape[0] != self.dim:
            raise DimensionMismatch(f"expected dim {self.dim}, got {vec.shape[0]}")

    def _store(self, text: str, vec: np.ndarray) -> None:
        with self._lock:
            self._check_dim(vec)
            if text in self._cache:
                return
            self._cache[text] = vec
            if self.cache_path:
                rec = {"text": text, "dim": int(vec.shape[0]), "values": vec.tolist()}
                with self.cache_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")

    def _fetch(self, text: str) -> np.ndarray:
        if self.provider is None:
            raise ProviderUnavailable(f"no provider configured and {text!r} is not cached")
        with self._lock:
            self.provider_calls += 1
        return np.asarray(self.provider.embed(text), dtype=np.float64)

    def embed(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is not None:
            return vec
        vec = self._fetch(text)
        self._store(text, vec)
        return self._cache[text]

    def embed_many(self, texts: Sequence[str]) -> list[np.ndarray]:
        missing = list(dict.fromkeys(t for t in texts if t not in self._cache))
        if missing:
            if self.max_in_flight > 1 and len(missing) > 1:
                with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                    fetched = list(pool.map(self._fetch, missing))
            else:
                fetched = [self._fetch(t) for t in missing]
            # stored in request order so the cache file is deterministic
            for text, vec in zip(missing, fetched):
                self._store(text, vec)
        return [self._cache[t] for t in texts]


def embed(text: str, provider: Embedder) -> np.ndarray:
    return provider.embed(text)


def make_embedder(kind: str = "hash", cache_path: str | Path | None = None,
                  endpoint: str | None = None, timeout: float = 30.0,
                  max_in_flight: int = 8, dim: int = 256, seed: int = 20211) -> Embedder:
    """Build an Embedder from config: kind is ``hash``, ``http`` or ``cache``."""
    if kind == "hash":
        return Embedder(HashingProvider(dim, seed), cache_path, dim=dim, max_in_flight=max_in_flight)
    if kind == "http":
        url = endpoint or os.environ.get(ENDPOINT_ENV)
        if not url:
            raise InvalidConfig(f"http embedding provider needs an endpoint (or ${ENDPOINT_ENV})")
        return Embedder(HttpProvider(url, timeout), cache_path, max_in_flight=max_in_flight)
    if kind == "cache":
        if not cache_path:
            raise InvalidConfig("cache-only embedding provider needs a cache file")
        return Embedder(None, cache_path, max_in_flight=max_in_flight)
    raise InvalidConfig(f"unknown embedding provider {kind!r}")


# ---------------------------------------------------------------------------
# candidates and similarity


@dataclass(frozen=True)
class CandidatePhrase:
    surface: str
    token_count: int
    vector: np.ndarray


def candidate_surfaces(qd_text: str, stoplist: frozenset[str] | None = None) -> tuple[list[str], list[str]]:
    """Return (stopword-filtered tokens, distinct unigram then bigram surfaces)."""
    tokens = remove_stopwords(tokenize(qd_text), stoplist if stoplist is not None else default_stoplist())
    unigrams = list(dict.fromkeys(tokens))
    bigrams = list(dict.fromkeys(f"{a} {b}" for a, b in zip(tokens, tokens[1:])))
    return tokens, unigrams + bigrams


def generate_candidates(qd_text: str, embedder: Embedder,
                        stoplist: frozenset[str] | None = None) -> list[CandidatePhrase]:
    _, surfaces = candidate_surfaces(qd_text, stoplist)
    if not surfaces:
        raise EmptyQuery("no candidate keywords survive stopword removal")
    vectors = embedder.embed_many(surfaces)
    return [CandidatePhrase(s, s.count(" ") + 1, v) for s, v in zip(surfaces, vectors)]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity of an all-zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroVector("candidate embedding is all-zero")
    return m / norms


def _standardize(sim: np.ndarray, axis=None) -> np.ndarray:
    # z-score around 0.5, the normalised-MMR variant; its max-scaling step cancels
    # under z-scoring (and would flip the order if the peak were negative), so it is skipped
    mean = np.nanmean(sim, axis=axis, keepdims=axis is not None)
    std = np.nanstd(sim, axis=axis, keepdims=axis is not None)
    return 0.5 + (sim - mean) / np.where(std > 1e-12, std, 1.0)


# ---------------------------------------------------------------------------
# selection


@dataclass(frozen=True)
class KeywordConfig:
    lam: float = 0.5
    length_policy: str = "dynamic-half"  # or "fixed"
    fixed_count: int = 10
    budget_unit: str = "tokens"  # or "phrases"
    standardized: bool = False

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidConfig(f"lambda must lie in [0, 1], got {self.lam}")
        if self.length_policy not in ("dynamic-half", "fixed"):
            raise InvalidConfig(f"unknown length policy {self.length_policy!r}")
        if self.budget_unit not in ("tokens", "phrases"):
            raise InvalidConfig(f"unknown budget unit {self.budget_unit!r}")

    def budget(self, n_filtered_tokens: int) -> int:
        if self.length_policy == "fixed":
            return self.fixed_count
        return math.ceil(n_filtered_tokens / 2)


def _argmax(scores: np.ndarray, surfaces: Sequence[str], available: Iterable[int]) -> int:
    best = None
    for i in available:
        if best is None or scores[i] > scores[best] or (
            scores[i] == scores[best] and surfaces[i] < surfaces[best]
        ):
            best = i
    return best


def mmr_select(query_vec: np.ndarray, candidates: Sequence[CandidatePhrase],
               config: KeywordConfig = KeywordConfig(), budget: int = 1) -> list[str]:
    """Greedy MMR: relevance to the query traded against redundancy by ``config.lam``.

    Stops once the selected phrases cover ``budget`` (tokens or phrases, per
    ``config.budget_unit``) or candidates run out.  Returns surfaces in
    selection order.
    """
    if not candidates:
        raise EmptyQuery("no candidates to select from")
    q = np.asarray(query_vec, dtype=np.float64)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ZeroVector("query embedding is all-zero")
    emb = np.vstack([c.vector for c in candidates])
    if emb.shape[1] != q.shape[0]:
        raise DimensionMismatch(f"candidate dim {emb.shape[1]} != query dim {q.shape[0]}")
    unit = _unit_rows(emb)
    to_query = np.clip(unit @ (q / qn), -1.0, 1.0)
    between = np.clip(unit @ unit.T, -1.0, 1.0)
    if config.standardized and len(candidates) > 1:
        to_query = _standardize(to_query)
        masked = between.copy()
        np.fill_diagonal(masked, np.nan)
        between = _standardize(masked, axis=0)

    surfaces = [c.surface for c in candidates]
    lam = config.lam
    remaining = set(range(len(candidates)))
    redundancy = np.full(len(candidates), -np.inf)
    selected: list[int] = []
    covered = 0
    while remaining and covered < budget:
        if selected:
            score = lam * to_query - (1.0 - lam) * redundancy
        else:
            score = to_query
        pick = _argmax(score, surfaces, sorted(remaining))
        selected.append(pick)
        remaining.discard(pick)
        covered += candidates[pick].token_count if config.budget_unit == "tokens" else 1
        redundancy = np.maximum(redundancy, between[:, pick])
    return [surfaces[i] for i in selected]


def flatten_terms(phrases: Iterable[str]) -> list[str]:
    """Split phrases into tokens, dropping repeats but keeping first occurrence order."""
    return list(dict.fromkeys(tok for p in phrases for tok in p.split()))


def extract_keywords(qd_text: str, embedder: Embedder, config: KeywordConfig = KeywordConfig(),
                     stoplist: frozenset[str] | None = None) -> list[str]:
    """Reduce a verbose query to its keyword representation (flattened terms)."""
    tokens, _ = candidate_surfaces(qd_text, stoplist)
    candidates = generate_candidates(qd_text, embedder, stoplist)
    query_vec = embedder.embed(qd_text)
    phrases = mmr_select(query_vec, candidates, config, config.budget(len(tokens)))
    return flatten_terms(phrases)


# ---------------------------------------------------------------------------
# keyword dump


def write_keyword_dump(path: str | Path, keywords: Iterable[tuple[str, Sequence[str]]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for qid, terms in keywords:
            fh.write(json.dumps({"query_id": qid, "terms": list(terms)}, ensure_ascii=False) + "\n")


def read_keyword_dump(path: str | Path) -> dict[str, list[str]]:
    out = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out[str(rec["query_id"])] = list(rec["terms"])
    return out
