"""Trial record parsing and derivation of the five indexable field views."""
from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CorpusUnreadable, MalformedRecord, MissingId

log = logging.getLogger(__name__)

VIEW_NAMES = ("i_comb", "i_comb_star", "i_in", "i_ex", "i_main")


@dataclass(frozen=True)
class TrialDoc:
    doc_id: str
    title: str = ""
    summary: str = ""
    description: str = ""
    condition: str = ""
    eligibility: str = ""


@dataclass(frozen=True)
class EligibilitySplit:
    inclusion: str
    exclusion: str
    inclusion_found: bool
    exclusion_found: bool


@dataclass(frozen=True)
class FieldViews:
    doc_id: str
    i_comb: str
    i_comb_star: str
    i_in: str
    i_ex: str
    i_main: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


# ---------------------------------------------------------------------------
# text cleanup

_WS = re.compile(r"\s+")
_HSPACE = re.compile(r"[ \t\r\f\v]+")


def collapse_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()


def _clean_block(text: str) -> str:
    """Strip each line and drop blank ones; line structure is kept for marker detection."""
    lines = (_HSPACE.sub(" ", line).strip() for line in text.splitlines())
    return "\n".join(line for line in lines if line)


def _flat_text(elem: ET.Element | None) -> str:
    if elem is None:
        return ""
    return "".join(elem.itertext())


# ---------------------------------------------------------------------------
# parsing

_JSON_ID_KEYS = ("doc_id", "nct_id", "id")


def parse_trial(raw: str) -> TrialDoc:
    """Parse one registry record.

    Accepts the registry's XML export (``<clinical_study>``) or a JSON
    object with keys ``doc_id``/``nct_id``, ``title``, ``summary``,
    ``description``, ``condition`` and ``eligibility``.
    """
    stripped = raw.lstrip("﻿ \t\r\n")
    if stripped.startswith("<"):
        return _parse_xml(stripped)
    if stripped.startswith("{"):
        return _parse_json(stripped)
    raise MalformedRecord("record is neither XML nor a JSON object")


def _parse_xml(raw: str) -> TrialDoc:
    try:
        root = ET.fromstring(raw)
    except ET.ParseError as exc:
        raise MalformedRecord(f"unparseable XML: {exc}") from None

    id_elem = root.find("id_info/nct_id")
    if id_elem is None:
        id_elem = root.find(".//nct_id")
    doc_id = collapse_ws(_flat_text(id_elem))
    if not doc_id:
        raise MissingId("record has no nct_id")

    title = collapse_ws(_flat_text(root.find("brief_title")))
    if not title:
        title = collapse_ws(_flat_text(root.find("official_title")))
    conditions = [collapse_ws(_flat_text(c)) for c in root.findall("condition")]
    return TrialDoc(
        doc_id=doc_id,
        title=title,
        summary=collapse_ws(_flat_text(root.find("brief_summary"))),
        description=collapse_ws(_flat_text(root.find("detailed_description"))),
        condition=" ".join(c for c in conditions if c),
        eligibility=_clean_block(_flat_text(root.find("eligibility/criteria"))),
    )


def _parse_json(raw: str) -> TrialDoc:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"unparseable JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord("JSON record is not an object")

    doc_id = next((str(obj[k]).strip() for k in _JSON_ID_KEYS if obj.get(k)), "")
    if not doc_id:
        raise MissingId("record has no doc_id")

    def field(name: str) -> str:
        value = obj.get(name) or ""
        if isinstance(value, list):
            value = " ".join(str(v) for v in value)
        return str(value)

    return TrialDoc(
        doc_id=doc_id,
        title=collapse_ws(field("title")),
        summary=collapse_ws(field("summary")),
        description=collapse_ws(field("description")),
        condition=collapse_ws(field("condition")),
        eligibility=_clean_block(field("eligibility")),
    )


# ---------------------------------------------------------------------------
# eligibility splitting

_BULLET = r"(?:[-*•·]|\d+[.)]|[ivx]+[.)])?"
_DECOR = r"[ \t]*[:\-\u2013\u2014]*"

# A marker is recognised either as a line heading or inline when followed by a colon/dash.
MARKER_PATTERNS: tuple[re.Pattern[str], ...] = (
    re.compile(
        rf"^[ \t]*{_BULLET}[ \t]*(?:key[ \t]+)?(?P<side>inclusion|exclusion)[ \t]+criteria\b{_DECOR}",
        re.IGNORECASE | re.MULTILINE,
    ),
    re.compile(
        r"\b(?:key\s+)?(?P<side>inclusion|exclusion)\s+criteria\s*[:\-\u2013\u2014]+",
        re.IGNORECASE,
    ),
)


def _find_markers(text: str, patterns: Sequence[re.Pattern[str]]) -> list[tuple[int, int, str]]:
    found = []
    for pat in patterns:
        for m in pat.finditer(text):
            found.append((m.start(), m.end(), m.group("side").lower()))
    # earliest start first, longest match first on equal start; drop overlaps
    found.sort(key=lambda t: (t[0], -t[1]))
    markers: list[tuple[int, int, str]] = []
    for start, end, side in found:
        if markers and start < markers[-1][1]:
            continue
        markers.append((start, end, side))
    return markers


def split_eligibility(
    eligibility: str, patterns: Sequence[re.Pattern[str]] = MARKER_PATTERNS
) -> EligibilitySplit:
    """Partition eligibility text into inclusion and exclusion parts.

    Each marker owns the text up to the next marker.  Text before the first
    marker is treated as inclusion.  A side whose marker never appears falls
    back to the full eligibility text.
    """
    full = eligibility.strip()
    markers = _find_markers(eligibility, patterns)
    parts: dict[str, list[str]] = {"inclusion": [], "exclusion": []}
    if markers:
        preamble = eligibility[: markers[0][0]].strip()
        if preamble:
            parts["inclusion"].append(preamble)
        bounds = [m[0] for m in markers[1:]] + [len(eligibility)]
        for (_, end, side), stop in zip(markers, bounds):
            seg = eligibility[end:stop].strip()
            if seg:
                parts[side].append(seg)

    found = {side for _, _, side in markers}
    inc_found = "inclusion" in found
    exc_found = "exclusion" in found
    return EligibilitySplit(
        inclusion="\n".join(parts["inclusion"]) if inc_found else full,
        exclusion="\n".join(parts["exclusion"]) if exc_found else full,
        inclusion_found=inc_found,
        exclusion_found=exc_found,
    )


def _join(*parts: str) -> str:
    return " ".join(p for p in (collapse_ws(x) for x in parts) if p)


def build_field_views(
    doc: TrialDoc, patterns: Sequence[re.Pattern[str]] = MARKER_PATTERNS
) -> FieldViews:
    split = split_eligibility(doc.eligibility, patterns)
    i_main = _join(doc.title, doc.description, doc.condition, doc.summary)
    return FieldViews(
        doc_id=doc.doc_id,
        i_comb=_join(i_main, doc.eligibility),
        i_comb_star=_join(doc.title, doc.summary, split.inclusion if split.inclusion_found else ""),
        i_in=collapse_ws(split.inclusion),
        i_ex=collapse_ws(split.exclusion),
        i_main=i_main,
    )


# ---------------------------------------------------------------------------
# collection I/O


def iter_raw_records(path: str | Path) -> Iterator[str]:
    """Yield raw records from a directory of XML files or a line-delimited file."""
    path = Path(path)
    try:
        if path.is_dir():
            for f in sorted(path.rglob("*.xml")):
                yield f.read_text(encoding="utf-8")
        elif path.suffix.lower() == ".xml":
            yield path.read_text(encoding="utf-8")
        else:
            with path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        yield line
    except OSError as exc:
        raise CorpusUnreadable(f"cannot read {path}: {exc}") from None


def _parse_or_error(raw: str) -> TrialDoc | str:
    try:
        return parse_trial(raw)
    except (MalformedRecord, MissingId) as exc:
        return f"{type(exc).__name__}: {exc}"


def parse_collection(raws: Iterable[str], workers: int = 1) -> list[TrialDoc]:
    """Parse records, skipping bad ones; duplicate ids keep the last record."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_parse_or_error, raws, chunksize=64))
    else:
        results = [_parse_or_error(r) for r in raws]

    docs: dict[str, TrialDoc] = {}
    for i, res in enumerate(results):
        if isinstance(res, str):
            log.warning("skipping record #%d: %s", i, res)
            continue
        if res.doc_id in docs:
            log.warning("duplicate doc_id %s; keeping the later record", res.doc_id)
        docs[res.doc_id] = res
    return list(docs.values())


def write_corpus(path: str | Path, views: Iterable[FieldViews]) -> int:
    n = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for v in views:
            fh.write(v.to_json() + "\n")
            n += 1
    return n


def read_corpus(path: str | Path) -> Iterator[FieldViews]:
    try:
        fh = Path(path).open(encoding="utf-8")
    except OSError as exc:
        raise CorpusUnreadable(f"cannot open corpus {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield FieldViews(
                    doc_id=obj["doc_id"], **{name: obj[name] for name in VIEW_NAMES}
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusUnreadable(f"{path}:{lineno}: bad corpus line ({exc})") from None


def ingest(source: str | Path, output: str | Path, workers: int = 1) -> int:
    """Parse a trial collection and write its field views; returns the record count."""
    docs = parse_collection(iter_raw_records(source), workers=workers)
    return write_corpus(output, (build_field_views(d) for d in docs))
