"""Regenerate tests/fixtures/metrics/{qrels.txt,run.txt,expected.json}.

Expected values come from pytrec_eval (the trec_eval C code) with measures
ndcg_cut.5, ndcg_cut.10, P.10 and recip_rank at the default relevance level
of 1.  pytrec_eval is not a dependency of the package.
"""
import json
import random
from pathlib import Path

import pytrec_eval

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "metrics"


def main() -> None:
    rng = random.Random(2021)
    qrels, run = {}, {}
    for qid in ("1", "2", "3"):
        judged = [f"NCT{qid}{i:06d}" for i in range(20)]
        grades = [rng.choice([0, 0, 0, 1, 2]) for _ in judged]
        if qid == "3":
            grades = [0] * 20  # no relevant document at all
        qrels[qid] = dict(zip(judged, grades))
        unjudged = [f"NCT9{qid}{i:05d}" for i in range(8)]
        ranked = judged[:15] + unjudged
        rng.shuffle(ranked)
        # distinct, strictly decreasing scores so score order == rank order
        run[qid] = {d: round(30.0 - 0.37 * r, 6) for r, d in enumerate(ranked)}

    measures = {"ndcg_cut.5", "ndcg_cut.10", "P.10", "recip_rank"}
    res = pytrec_eval.RelevanceEvaluator(qrels, measures).evaluate(run)

    OUT.mkdir(parents=True, exist_ok=True)
    with (OUT / "qrels.txt").open("w") as fh:
        for qid, docs in qrels.items():
            for d, g in docs.items():
                fh.write(f"{qid} 0 {d} {g}\n")
    with (OUT / "run.txt").open("w") as fh:
        for qid, docs in run.items():
            for rank, (d, s) in enumerate(sorted(docs.items(), key=lambda x: -x[1]), 1):
                fh.write(f"{qid} Q0 {d} {rank} {s:.6f} fixture\n")
    expected = {
        qid: {k: v for k, v in sorted(vals.items()) if k in {"ndcg_cut_5", "ndcg_cut_10", "P_10", "recip_rank"}}
        for qid, vals in sorted(res.items())
    }
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")


if __name__ == "__main__":
    main()
