"""TOPSIS aggregation of per-view BM25 runs.

Inclusion and main-section scores are benefit criteria, exclusion scores a
cost criterion.  The cost direction enters only through the choice of ideal
solutions; raw scores are never inverted.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyMatrix, InvalidConfig, QueryIdMismatch
from .retrieval import DEFAULT_DEPTH, ScoredRun

BENEFIT = "benefit"
COST = "cost"

_EXPECTED_DIRECTION = {"R_in": BENEFIT, "R_ex": COST, "R_main": BENEFIT}


@dataclass(frozen=True)
class CriterionSpec:
    name: str
    direction: str
    weight: float

    def __post_init__(self):
        if self.direction not in (BENEFIT, COST):
            raise InvalidConfig(f"criterion {self.name}: direction must be benefit or cost")
        expected = _EXPECTED_DIRECTION.get(self.name)
        if expected and expected != self.direction:
            raise InvalidConfig(f"criterion {self.name} must be a {expected} criterion")
        if not 0.0 < self.weight < 1.0:
            raise InvalidConfig(f"criterion {self.name}: weight must lie in (0, 1), got {self.weight}")


def tt_mw_criteria(w_in: float = 1 / 3, w_ex: float = 1 / 3, w_main: float = 1 / 3) -> tuple[CriterionSpec, ...]:
    """The inclusion/exclusion/main criteria set, equal weights by default."""
    criteria = (
        CriterionSpec("R_in", BENEFIT, w_in),
        CriterionSpec("R_ex", COST, w_ex),
        CriterionSpec("R_main", BENEFIT, w_main),
    )
    check_weights(criteria)
    return criteria


def check_weights(criteria: Sequence[CriterionSpec]) -> None:
    total = sum(c.weight for c in criteria)
    if abs(total - 1.0) > 1e-9:
        raise InvalidConfig(f"criterion weights sum to {total}, expected 1")


@dataclass
class DecisionMatrix:
    query_id: str
    doc_ids: list[str]
    values: np.ndarray  # (n_docs, n_criteria), raw scores >= 0
    criteria: tuple[CriterionSpec, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.doc_ids), len(self.criteria))
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("duplicate doc_id in decision matrix")
        if np.any(self.values < 0):
            raise ValueError("decision matrix scores must be >= 0")
        check_weights(self.criteria)

    def __len__(self) -> int:
        return len(self.doc_ids)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.criteria])

    @property
    def is_benefit(self) -> np.ndarray:
        return np.array([c.direction == BENEFIT for c in self.criteria])


class Alternative(NamedTuple):
    doc_id: str
    d_plus: float
    d_minus: float
    closeness: float


def build_decision_matrix(
    run_in: ScoredRun,
    run_ex: ScoredRun,
    run_main: ScoredRun,
    pool_depth: int = DEFAULT_DEPTH,
    criteria: tuple[CriterionSpec, ...] | None = None,
) -> DecisionMatrix:
    """Pool the top ``pool_depth`` docs of each run; absent scores are 0."""
    if not run_in.query_id == run_ex.query_id == run_main.query_id:
        raise QueryIdMismatch(
            f"runs are for different queries: {run_in.query_id}, {run_ex.query_id}, {run_main.query_id}"
        )
    if pool_depth < 1:
        raise InvalidConfig(f"pool_depth must be >= 1, got {pool_depth}")
    runs = (run_in, run_ex, run_main)
    tops = [{h.doc_id: h.score for h in r.hits[:pool_depth]} for r in runs]
    pool = sorted(set().union(*tops))
    # scores for pooled docs come from the full run, not just its top slice
    full = [r.scores() for r in runs]
    values = np.array([[f.get(d, 0.0) for f in full] for d in pool], dtype=np.float64).reshape(len(pool), 3)
    return DecisionMatrix(run_in.query_id, pool, values, criteria or tt_mw_criteria())


def normalize_and_weight(matrix: DecisionMatrix) -> np.ndarray:
    """Vector-normalise each column, then scale by its weight; zero columns stay zero."""
    if len(matrix) == 0:
        raise EmptyMatrix(f"query {matrix.query_id}: empty decision matrix")
    x = matrix.values
    norms = np.sqrt(np.sum(x * x, axis=0))
    safe = np.where(norms > 0, norms, 1.0)
    return matrix.weights * (x / safe)


def ideal_solutions(weighted: np.ndarray, is_benefit: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Positive ideal takes the best value per criterion, the negative ideal the worst."""
    if weighted.shape[0] == 0:
        raise EmptyMatrix("empty weighted matrix")
    hi, lo = weighted.max(axis=0), weighted.min(axis=0)
    return np.where(is_benefit, hi, lo), np.where(is_benefit, lo, hi)


def topsis_rank(matrix: DecisionMatrix) -> list[Alternative]:
    """Rank documents by relative closeness to the positive ideal.

    Ties break on ascending doc_id.  A document whose distances to both
    ideals are zero gets closeness 0.5.
    """
    weighted = normalize_and_weight(matrix)
    pos, neg = ideal_solutions(weighted, matrix.is_benefit)
    d_plus = np.sqrt(np.sum((weighted - pos) ** 2, axis=1))
    d_minus = np.sqrt(np.sum((weighted - neg) ** 2, axis=1))
    denom = d_plus + d_minus
    closeness = np.divide(d_minus, denom, out=np.full_like(denom, 0.5), where=denom > 0)
    alts = [
        Alternative(d, float(p), float(m), float(c))
        for d, p, m, c in zip(matrix.doc_ids, d_plus, d_minus, closeness)
    ]
    alts.sort(key=lambda a: (-a.closeness, a.doc_id))
    return alts


def ranking_to_run(query_id: str, ranking: Sequence[Alternative], run_tag: str,
                   depth: int = DEFAULT_DEPTH) -> ScoredRun:
    return ScoredRun.from_ranked(query_id, ((a.doc_id, a.closeness) for a in ranking[:depth]), run_tag)


def fuse(
    run_in: ScoredRun,
    run_ex: ScoredRun,
    run_main: ScoredRun,
    criteria: tuple[CriterionSpec, ...] | None = None,
    pool_depth: int = DEFAULT_DEPTH,
    depth: int = DEFAULT_DEPTH,
    run_tag: str = "tt_mw",
    diagnostics_dir: str | Path | None = None,
) -> ScoredRun:
    """Fuse three per-view runs of one query; empty pools give an empty run."""
    matrix = build_decision_matrix(run_in, run_ex, run_main, pool_depth, criteria)
    if len(matrix) == 0:
        return ScoredRun(matrix.query_id, [], run_tag)
    ranking = topsis_rank(matrix)
    if diagnostics_dir is not None:
        write_diagnostics(Path(diagnostics_dir) / f"{matrix.query_id}.topsis.json", matrix)
    return ranking_to_run(matrix.query_id, ranking, run_tag, depth)


def write_diagnostics(path: str | Path, matrix: DecisionMatrix) -> None:
    """Dump the weighted matrix, both ideals and per-document distances as JSON."""
    weighted = normalize_and_weight(matrix)
    pos, neg = ideal_solutions(weighted, matrix.is_benefit)
    ranking = {a.doc_id: a for a in topsis_rank(matrix)}
    names = [c.name for c in matrix.criteria]
    doc = {
        "query_id": matrix.query_id,
        "criteria": [{"name": c.name, "direction": c.direction, "weight": c.weight} for c in matrix.criteria],
        "positive_ideal": dict(zip(names, pos.tolist())),
        "negative_ideal": dict(zip(names, neg.tolist())),
        "rows": [
            {
                "doc_id": d,
                "raw": dict(zip(names, matrix.values[i].tolist())),
                "weighted": dict(zip(names, weighted[i].tolist())),
                "d_plus": ranking[d].d_plus,
                "d_minus": ranking[d].d_minus,
                "closeness": ranking[d].closeness,
            }
            for i, d in enumerate(matrix.doc_ids)
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
