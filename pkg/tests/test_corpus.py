import json

import pytest
from hypothesis import given, strategies as st

from trialrank.corpus import (
    VIEW_NAMES,
    TrialDoc,
    build_field_views,
    ingest,
    iter_raw_records,
    parse_collection,
    parse_trial,
    read_corpus,
    split_eligibility,
    write_corpus,
)
from trialrank.errors import CorpusUnreadable, MalformedRecord, MissingId


def xml_record(nct="NCT001", title="Aspirin trial", description="", eligibility=""):
    id_part = f"<id_info><nct_id>{nct}</nct_id></id_info>" if nct else ""
    desc = f"<detailed_description><textblock>{description}</textblock></detailed_description>"
    elig = f"<eligibility><criteria><textblock>{eligibility}</textblock></criteria></eligibility>"
    return f"<clinical_study>{id_part}<brief_title>{title}</brief_title>{desc}{elig}</clinical_study>"


def test_parse_direct_fields():
    doc = parse_trial(xml_record())
    assert doc.doc_id == "NCT001"
    assert doc.title == "Aspirin trial"
    assert doc.description == ""


def test_missing_id():
    with pytest.raises(MissingId):
        parse_trial(xml_record(nct=None))


@pytest.mark.parametrize("raw", ["<clinical_study><oops></clinical_study>", "plain text", '{"doc_id": '])
def test_malformed(raw):
    with pytest.raises(MalformedRecord):
        parse_trial(raw)


def test_json_record():
    doc = parse_trial(json.dumps({"nct_id": "NCT7", "title": " A  B ", "condition": ["X", "Y"]}))
    assert (doc.doc_id, doc.title, doc.condition) == ("NCT7", "A B", "X Y")


def test_nested_markup_flattened(fixtures):
    doc = parse_trial((fixtures / "nested_markup.xml").read_text())
    expected = (fixtures / "nested_markup.expected.txt").read_text().strip()
    assert doc.eligibility == expected
    assert doc.title == "Nested Markup Study"
    assert doc.summary == "Summary with bold text."
    split = split_eligibility(doc.eligibility)
    assert split.inclusion == "Hemoglobin below 10 g/dL\nAge 18 to 65 years"
    assert split.exclusion == "Active bleeding"


def test_split_inline():
    s = split_eligibility("Inclusion Criteria: age > 18 Exclusion Criteria: pregnancy")
    assert (s.inclusion, s.exclusion) == ("age > 18", "pregnancy")
    assert s.inclusion_found and s.exclusion_found


def test_split_no_markers():
    s = split_eligibility("Patients must be ambulatory.")
    assert s.inclusion == s.exclusion == "Patients must be ambulatory."
    assert not s.inclusion_found and not s.exclusion_found


def test_split_inclusion_only():
    text = "Inclusion Criteria: adults only"
    s = split_eligibility(text)
    assert s.inclusion == "adults only" and s.inclusion_found
    assert s.exclusion == text and not s.exclusion_found


def test_split_empty():
    s = split_eligibility("")
    assert s.inclusion == s.exclusion == ""


@pytest.mark.parametrize(
    "text",
    [
        "INCLUSION CRITERIA -\n- adult\nEXCLUSION CRITERIA -\n- pregnant",
        "Key Inclusion Criteria:\n- adult\nKey Exclusion Criteria:\n- pregnant",
        "1. Inclusion criteria\n- adult\n2. Exclusion criteria\n- pregnant",
        "  * inclusion criteria:\nadult\n  * exclusion criteria:\npregnant",
    ],
)
def test_marker_decorations(text):
    s = split_eligibility(text)
    assert s.inclusion.strip("- ") == "adult"
    assert s.exclusion.strip("- ") == "pregnant"


def test_marker_words_in_prose_are_not_markers():
    # no heading position and no colon: plain prose
    text = "Patients meeting inclusion criteria of the parent study are eligible."
    assert not split_eligibility(text).inclusion_found


def test_preamble_goes_to_inclusion():
    s = split_eligibility("Healthy volunteers.\nInclusion Criteria:\nadult\nExclusion Criteria:\nsmoker")
    assert s.inclusion == "Healthy volunteers.\nadult"
    assert s.exclusion == "smoker"


_segment = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789 .,>", min_size=1, max_size=40).filter(
    lambda t: t.strip()
)


@given(_segment, _segment, st.sampled_from([":", " -", "", ":-"]), st.booleans())
def test_split_reassembly_loses_nothing(inc, exc, decor, upper):
    markers = ["Inclusion Criteria" + decor, "Exclusion Criteria" + decor]
    if upper:
        markers = [m.upper() for m in markers]
    text = f"{markers[0]}\n{inc}\n{markers[1]}\n{exc}"
    s = split_eligibility(text)
    assert s.inclusion_found and s.exclusion_found
    assert s.inclusion == inc.strip() and s.exclusion == exc.strip()
    rest = text.replace(markers[0], "").replace(markers[1], "")
    assert "".join((s.inclusion + s.exclusion).split()) == "".join(rest.split())


@given(_segment)
def test_fallback_without_markers(text):
    s = split_eligibility(text)
    assert s.inclusion == s.exclusion == text.strip()


def test_views_all_empty():
    v = build_field_views(TrialDoc("X"))
    assert all(getattr(v, name) == "" for name in VIEW_NAMES)


def test_views_title_summary():
    v = build_field_views(TrialDoc("X", title="T", summary="S"))
    assert v.i_comb_star == "T S"
    assert v.i_main == "T S"


def test_views_order_and_star():
    doc = TrialDoc("X", title="T", summary="S", description="D", condition="C",
                   eligibility="Inclusion Criteria:\nin1\nExclusion Criteria:\nex1")
    v = build_field_views(doc)
    assert v.i_main == "T D C S"
    assert v.i_comb == "T D C S Inclusion Criteria: in1 Exclusion Criteria: ex1"
    assert v.i_comb_star == "T S in1"
    assert (v.i_in, v.i_ex) == ("in1", "ex1")


def test_views_star_without_inclusion_marker():
    doc = TrialDoc("X", title="T", summary="S", eligibility="Exclusion Criteria: smokers")
    v = build_field_views(doc)
    assert v.i_comb_star == "T S"
    assert v.i_in == "Exclusion Criteria: smokers"
    assert v.i_ex == "smokers"


@given(st.builds(TrialDoc, st.just("D1"), st.text(max_size=30), st.text(max_size=30), st.text(max_size=30),
                 st.text(max_size=30), st.text(max_size=80)))
def test_views_deterministic(doc):
    assert build_field_views(doc).to_json() == build_field_views(doc).to_json()


def test_minicorpus_roundtrip(minicorpus, tmp_path):
    out = tmp_path / "corpus.jsonl"
    assert ingest(minicorpus / "trials", out) == 20
    views = list(read_corpus(out))
    assert [v.doc_id for v in views] == sorted(v.doc_id for v in views)
    rec = json.loads(out.read_text().splitlines()[0])
    assert sorted(rec) == sorted(("doc_id",) + VIEW_NAMES)
    by_id = {v.doc_id: v for v in views}
    # no markers: both sides get the full section
    assert by_id["NCT90000008"].i_in == by_id["NCT90000008"].i_ex
    # inclusion only: the exclusion side falls back
    epi = by_id["NCT90000011"]
    assert "Inclusion Criteria" in epi.i_ex and "Inclusion" not in epi.i_in
    # numbered bullets and "Key ..." headings split cleanly
    assert "suicidal" in by_id["NCT90000010"].i_ex and "suicidal" not in by_id["NCT90000010"].i_in
    assert by_id["NCT90000012"].i_ex == "- Medication overuse headache"


def test_parallel_parse_matches_serial(minicorpus):
    raws = list(iter_raw_records(minicorpus / "trials"))
    assert parse_collection(raws, workers=2) == parse_collection(raws, workers=1)


def test_bad_records_skipped_and_duplicates_last_wins(caplog):
    raws = [xml_record("A", title="first"), "junk", xml_record(None), xml_record("B"), xml_record("A", title="second")]
    docs = parse_collection(raws)
    assert [(d.doc_id, d.title) for d in docs] == [("A", "second"), ("B", "Aspirin trial")]
    assert "duplicate" in caplog.text


def test_line_delimited_input(tmp_path):
    src = tmp_path / "records.jsonl"
    src.write_text(json.dumps({"doc_id": "J1", "title": "x"}) + "\n\n" + json.dumps({"doc_id": "J2"}) + "\n")
    out = tmp_path / "c.jsonl"
    assert ingest(src, out) == 2


def test_unreadable_corpus(tmp_path):
    with pytest.raises(CorpusUnreadable):
        list(read_corpus(tmp_path / "missing.jsonl"))
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    with pytest.raises(CorpusUnreadable):
        list(read_corpus(bad))


def test_write_read_identity(tmp_path):
    views = [build_field_views(TrialDoc(f"D{i}", title=f"t{i}", eligibility="é ü")) for i in range(3)]
    write_corpus(tmp_path / "c.jsonl", views)
    assert list(read_corpus(tmp_path / "c.jsonl")) == views
