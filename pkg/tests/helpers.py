"""Small builders shared by the test modules."""
from trialrank.corpus import FieldViews
from trialrank.index import build_index

VOCAB = ["aspirin", "heart", "pain", "fever", "cancer", "diabetes", "insulin", "kidney", "asthma", "stroke"]


def views(texts, view="i_main", prefix="D"):
    """FieldViews whose ``view`` holds each text (other views empty)."""
    out = []
    for i, text in enumerate(texts):
        fields = dict.fromkeys(("i_comb", "i_comb_star", "i_in", "i_ex", "i_main"), "")
        fields[view] = text
        out.append(FieldViews(doc_id=f"{prefix}{i:03d}", **fields))
    return out


def index_of(texts, view="i_main", stoplist=frozenset()):
    return build_index(views(texts, view), view, stoplist)
