"""Topic (query) file readers."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from .corpus import collapse_ws
from .errors import DataError
from .retrieval import Query


def read_queries(path: str | Path) -> list[Query]:
    """Read ``query_id<TAB>text`` lines or a TREC topics XML file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read queries {path}: {exc}") from None
    if text.lstrip().startswith("<"):
        return _read_topics_xml(text, path)

    queries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        qid, sep, body = line.partition("\t")
        if not sep or not qid.strip() or not body.strip():
            raise DataError(f"{path}:{lineno}: expected 'query_id<TAB>text'")
        queries.append(Query(qid.strip(), collapse_ws(body)))
    return queries


def _read_topics_xml(text: str, path: Path) -> list[Query]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise DataError(f"{path}: bad topics XML: {exc}") from None
    queries = []
    for topic in root.iter("topic"):
        qid = topic.get("number") or topic.get("id")
        body = collapse_ws("".join(topic.itertext()))
        if not qid or not body:
            raise DataError(f"{path}: topic without number or text")
        queries.append(Query(qid, body))
    return queries


def with_keywords(queries: list[Query], keywords: dict[str, list[str]]) -> list[Query]:
    missing = [q.query_id for q in queries if q.query_id not in keywords]
    if missing:
        raise DataError(f"keyword dump lacks queries: {', '.join(missing[:5])}")
    return [Query(q.query_id, q.qd_text, tuple(keywords[q.query_id])) for q in queries]
