"""Run configurations.

A config file is flat ``key = value`` text (``#`` comments allowed), one run
per file.  Relative paths resolve against the config file's directory.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .errors import InvalidConfig
from .fusion import tt_mw_criteria
from .keywords import KeywordConfig
from .retrieval import DEFAULT_DEPTH, Bm25Params

TT_MW_VIEWS = ("i_in", "i_ex", "i_main")
MODELS = ("BM25", "TT_MW", "BM25+rerank")
_MODEL_ALIASES = {"BM25+BERT": "BM25+rerank"}
_PATH_KEYS = ("corpus", "queries", "index_dir", "keywords", "embedding_cache", "output", "stoplist", "reranker")


@dataclass
class RunConfig:
    run_name: str
    query_representation: str
    views: list[str]
    relevance_model: str
    output: Path
    run_tag: str = ""
    k1: float = 1.2
    b: float = 0.75
    lam: float = 0.5
    length_policy: str = "dynamic-half"
    budget_unit: str = "tokens"
    standardized: bool = False
    w_in: float = 1 / 3
    w_ex: float = 1 / 3
    w_main: float = 1 / 3
    pool_depth: int = DEFAULT_DEPTH
    depth: int = DEFAULT_DEPTH
    corpus: Path | None = None
    queries: Path | None = None
    index_dir: Path | None = None
    collection: str = "trials"
    keywords: Path | None = None
    embedding_provider: str = "hash"
    embedding_cache: Path | None = None
    embedding_endpoint: str | None = None
    stoplist: Path | None = None
    reranker: Path | str = "identity"

    def __post_init__(self):
        self.relevance_model = _MODEL_ALIASES.get(self.relevance_model, self.relevance_model)
        if not self.run_tag:
            self.run_tag = self.run_name
        self.validate()

    def validate(self) -> None:
        if self.query_representation not in ("Qd", "Qk"):
            raise InvalidConfig(f"query_representation must be Qd or Qk, got {self.query_representation!r}")
        if self.relevance_model not in MODELS:
            raise InvalidConfig(f"relevance_model must be one of {', '.join(MODELS)}")
        if self.relevance_model == "TT_MW":
            if sorted(self.views) != sorted(TT_MW_VIEWS) or len(self.views) != 3:
                raise InvalidConfig(f"TT_MW needs exactly the views {', '.join(TT_MW_VIEWS)}; got {self.views}")
        elif len(self.views) != 1:
            raise InvalidConfig(f"{self.relevance_model} needs exactly one view; got {self.views}")
        if self.pool_depth < 1 or self.depth < 1:
            raise InvalidConfig("pool_depth and depth must be >= 1")
        # these raise InvalidConfig on bad values
        self.bm25_params
        self.keyword_config
        self.criteria

    @property
    def bm25_params(self) -> Bm25Params:
        return Bm25Params(self.k1, self.b)

    @property
    def keyword_config(self) -> KeywordConfig:
        return KeywordConfig(self.lam, self.length_policy, budget_unit=self.budget_unit,
                             standardized=self.standardized)

    @property
    def criteria(self):
        return tt_mw_criteria(self.w_in, self.w_ex, self.w_main)


def _number(text: str) -> float:
    # accepts fractions such as 1/3 so equal weights sum to exactly 1
    return float(Fraction(text.strip()))


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise InvalidConfig(f"cannot parse config: {exc}") from None
    raw = dict(parser["run"])

    known = {f.name: f for f in fields(RunConfig)}
    kwargs: dict = {}
    extra = {}
    for key, value in raw.items():
        key = key.replace("-", "_")
        if key == "lambda":
            key = "lam"
        if key not in known:
            extra[key] = value
            continue
        try:
            if key in ("k1", "b", "lam", "w_in", "w_ex", "w_main"):
                kwargs[key] = _number(value)
            elif key in ("pool_depth", "depth"):
                kwargs[key] = int(value)
            elif key == "standardized":
                kwargs[key] = _bool(value)
            elif key == "views":
                kwargs[key] = [v.strip() for v in value.split(",") if v.strip()]
            elif key in _PATH_KEYS:
                if key == "reranker" and value.strip() == "identity":
                    kwargs[key] = "identity"
                else:
                    p = Path(value.strip())
                    kwargs[key] = p if p.is_absolute() or base_dir is None else base_dir / p
            else:
                kwargs[key] = value.strip()
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidConfig(f"bad value for {key}: {exc}") from None
    if extra:
        raise InvalidConfig(f"unknown config keys: {', '.join(sorted(extra))}")
    missing = [k for k in ("run_name", "query_representation", "views", "relevance_model", "output") if k not in kwargs]
    if missing:
        raise InvalidConfig(f"config lacks required keys: {', '.join(missing)}")
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
