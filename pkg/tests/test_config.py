from pathlib import Path

import pytest

from trialrank.config import load_config, parse_config
from trialrank.errors import InvalidConfig

BASE = """
run_name = X
query_representation = Qd
output = out.trec
"""


def test_fixture_configs_load(fixtures):
    d = fixtures / "minicorpus"
    r1, r2, r3, r4, r5 = (load_config(d / f"r{i}.cfg") for i in range(1, 6))
    assert (r1.query_representation, r1.views, r1.relevance_model) == ("Qk", ["i_comb"], "BM25")
    assert (r2.query_representation, r2.relevance_model) == ("Qd", "TT_MW")
    assert (r3.query_representation, r3.relevance_model) == ("Qk", "TT_MW")
    assert r4.views == r5.views == ["i_comb_star"] and r4.relevance_model == "BM25+rerank"
    assert r2.w_in + r2.w_ex + r2.w_main == pytest.approx(1.0, abs=1e-12)
    assert r1.lam == 0.5 and r1.output == d / "work/runs/r1.trec"


def test_two_view_tt_mw_rejected():
    with pytest.raises(InvalidConfig):
        parse_config(BASE + "views = i_in, i_main\nrelevance_model = TT_MW\n")


def test_bm25_needs_one_view():
    with pytest.raises(InvalidConfig):
        parse_config(BASE + "views = i_comb, i_main\nrelevance_model = BM25\n")


def test_alias_and_defaults():
    c = parse_config(BASE + "views = i_comb_star\nrelevance_model = BM25+BERT\n")
    assert c.relevance_model == "BM25+rerank" and c.reranker == "identity"
    assert (c.k1, c.b, c.pool_depth, c.depth) == (1.2, 0.75, 1000, 1000)
    assert c.run_tag == "X"


@pytest.mark.parametrize(
    "extra",
    [
        "views = i_comb\nrelevance_model = BM25\nbogus_key = 1\n",
        "views = i_comb\nrelevance_model = BM25\nk1 = abc\n",
        "views = i_comb\nrelevance_model = BM25\nlambda = 2\n",
        "views = i_in,i_ex,i_main\nrelevance_model = TT_MW\nw_in = 0.33\nw_ex = 0.33\nw_main = 0.33\n",
        "views = i_comb\nrelevance_model = Neural\n",
        "views = i_comb\n",
    ],
)
def test_invalid(extra):
    with pytest.raises(InvalidConfig):
        parse_config(BASE + extra)


def test_unreadable(tmp_path):
    with pytest.raises(InvalidConfig):
        load_config(tmp_path / "missing.cfg")


def test_trec2021_configs_load():
    d = Path(__file__).resolve().parents[1] / "configs" / "trec2021"
    models = [load_config(d / f"r{i}.cfg").relevance_model for i in range(1, 6)]
    assert models == ["BM25", "TT_MW", "TT_MW", "BM25+rerank", "BM25+rerank"]
