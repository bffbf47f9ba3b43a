"""TREC-style evaluation: qrels, NDCG@k, P@k, reciprocal rank, median comparison.

Definitions follow trec_eval's ``ndcg_cut``, ``P`` and ``recip_rank`` over
the run's rank order.  Unjudged documents count as grade 0.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import DataError, MalformedQrels
from .retrieval import ScoredRun

log = logging.getLogger(__name__)

def metric_names(k: int = 10) -> tuple[str, ...]:
    return tuple(dict.fromkeys((f"ndcg_cut_{k}", "ndcg_cut_5", f"P_{k}", "recip_rank")))


def metric_label(name: str) -> str:
    if name.startswith("ndcg_cut_"):
        return f"NDCG@{name[9:]}"
    if name.startswith("P_"):
        return f"P@{name[2:]}"
    return {"recip_rank": "RR"}.get(name, name)


class QrelSet(dict):
    """Maps (query_id, doc_id) -> grade (0 not relevant, 1 excluded, 2 eligible)."""

    def for_query(self, query_id: str) -> dict[str, int]:
        return self.by_query().get(query_id, {})

    def by_query(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for (qid, doc), grade in self.items():
            out.setdefault(qid, {})[doc] = grade
        return out


def parse_qrels(path: str | Path) -> QrelSet:
    """Read 4-column ``query_id iter doc_id grade`` qrels."""
    qrels = QrelSet()
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, 1):
        cols = line.split()
        if not cols:
            continue
        if len(cols) != 4:
            raise MalformedQrels(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
        qid, _, doc, grade_s = cols
        try:
            grade = int(grade_s)
        except ValueError:
            raise MalformedQrels(f"{path}:{lineno}: grade {grade_s!r} is not an integer") from None
        if grade < 0:
            raise MalformedQrels(f"{path}:{lineno}: negative grade {grade}")
        prev = qrels.get((qid, doc))
        if prev is not None and prev != grade:
            raise MalformedQrels(f"{path}:{lineno}: ({qid}, {doc}) judged {prev} and {grade}")
        qrels[(qid, doc)] = grade
    if not qrels:
        log.warning("qrels file %s is empty", path)
    return qrels


def _grades(qrels: Mapping, query_id: str) -> dict[str, int]:
    if isinstance(qrels, QrelSet):
        return qrels.for_query(query_id)
    return dict(qrels)


def _gain(grade: int, gain: str) -> float:
    if gain == "linear":
        return float(grade)
    if gain == "exponential":
        return 2.0**grade - 1.0
    raise ValueError(f"unknown gain {gain!r}")


def ndcg_at_k(run: ScoredRun, qrels: Mapping, k: int, gain: str = "linear") -> float:
    """NDCG@k; the ideal ordering ranks all judged documents of the query."""
    if k < 1:
        raise ValueError("k must be >= 1")
    grades = _grades(qrels, run.query_id)
    dcg = sum(
        _gain(grades.get(h.doc_id, 0), gain) / math.log2(i + 2) for i, h in enumerate(run.hits[:k])
    )
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)[:k]
    idcg = sum(_gain(g, gain) / math.log2(i + 2) for i, g in enumerate(ideal))
    return dcg / idcg if idcg > 0 else 0.0


def prec_at_k(run: ScoredRun, qrels: Mapping, k: int, threshold: int = 1) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    grades = _grades(qrels, run.query_id)
    return sum(1 for h in run.hits[:k] if grades.get(h.doc_id, 0) >= threshold) / k


def reciprocal_rank(run: ScoredRun, qrels: Mapping, threshold: int = 1) -> float:
    grades = _grades(qrels, run.query_id)
    for i, h in enumerate(run.hits, 1):
        if grades.get(h.doc_id, 0) >= threshold:
            return 1.0 / i
    return 0.0


@dataclass
class EvalReport:
    per_query: dict[str, dict[str, float]]
    mean: dict[str, float]
    improved: dict[str, tuple[int, float]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean": self.mean,
                "per_query": self.per_query,
                "improved_over_median": {m: {"count": c, "fraction": f} for m, (c, f) in self.improved.items()},
            },
            indent=1,
            sort_keys=True,
        )

    def table(self) -> str:
        qids = sorted(self.per_query, key=_qid_key)
        metrics = list(self.mean)
        header = ["query"] + [metric_label(m) for m in metrics]
        rows = [[q] + [f"{self.per_query[q][m]:.4f}" for m in metrics] for q in qids]
        rows.append(["mean"] + [f"{self.mean[m]:.4f}" for m in metrics])
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header] + rows]
        for m, (count, frac) in self.improved.items():
            lines.append(f"{metric_label(m)} improved over median: {count} ({frac:.1%})")
        return "\n".join(lines) + "\n"


def _qid_key(q: str):
    return (0, int(q), q) if q.isdigit() else (1, 0, q)


def evaluate(runs: Mapping[str, ScoredRun], qrels: QrelSet, k: int = 10, threshold: int = 1,
             gain: str = "linear") -> EvalReport:
    """Score every judged query; queries with no run entry score 0."""
    per_query = {}
    for qid, grades in qrels.by_query().items():
        run = runs.get(qid) or ScoredRun(qid, [])
        values = {
            f"ndcg_cut_{k}": ndcg_at_k(run, grades, k, gain),
            "ndcg_cut_5": ndcg_at_k(run, grades, 5, gain),
            f"P_{k}": prec_at_k(run, grades, k, threshold),
            "recip_rank": reciprocal_rank(run, grades, threshold),
        }
        per_query[qid] = {m: values[m] for m in metric_names(k)}
    n = len(per_query)
    mean = {m: (sum(v[m] for v in per_query.values()) / n if n else 0.0) for m in metric_names(k)}
    return EvalReport(per_query, mean)


def parse_medians(path: str | Path) -> dict[str, float]:
    """Read 2-column ``query_id value`` lines."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        cols = line.split()
        if not cols:
            continue
        if len(cols) != 2:
            raise DataError(f"{path}:{lineno}: expected 2 columns")
        try:
            out[cols[0]] = float(cols[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad median value {cols[1]!r}") from None
    return out


def compare_to_median(values: Mapping[str, float], medians: Mapping[str, float]) -> tuple[int, float]:
    """Count queries strictly above their median; fraction is over the median file's queries."""
    count = 0
    for qid, value in values.items():
        if qid not in medians:
            log.warning("no median value for query %s; excluded", qid)
            continue
        if value > medians[qid]:
            count += 1
    return count, (count / len(medians) if medians else 0.0)
