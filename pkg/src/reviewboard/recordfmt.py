"""Public record formats: HTML pages with META tags and a ReDIF-style text export.

These formats are the interoperability contract that lets third parties build
their own indexes over a board's published judgements, so emission must be
byte-deterministic and parsing lenient.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlsplit, urlunsplit

from .errors import MalformedUrl, NotReleased, UnparseableDocument
from .model import BoardMeta, ReviewRecord, record_id_for

REDIF_TEMPLATE_TYPE = "ReDIF-Review 1.0"

# Fixed field standard, in emission order. True marks repeatable fields.
FIELD_STANDARD: tuple[tuple[str, bool], ...] = (
    ("paper-title", False),
    ("author-name", True),
    ("author-institution", True),
    ("paper-url", False),
    ("publication-date", False),
    ("keyword", True),
    ("board-title", False),
    ("board-url", False),
    ("classification-code", True),
    ("maintainer-email", False),
    ("number-of-reviewers", False),
    ("review-date", False),
    ("avg-presentation", False),
    ("avg-relevance", False),
    ("avg-soundness", False),
    ("avg-originality", False),
    ("avg-importance-questions", False),
    ("avg-importance-results", False),
    ("comment", True),
)

FIELD_ORDER = tuple(name for name, _ in FIELD_STANDARD)
REPEATABLE_FIELDS = frozenset(name for name, rep in FIELD_STANDARD if rep)
MANDATORY_FIELDS = ("paper-title", "paper-url", "board-title")

_DEFAULT_PORTS = {"http": "80", "https": "443"}


def normalize_paper_url(url: str) -> str:
    """Canonicalize an absolute http/https URL; idempotent.

    Lowercases scheme and host, strips the default port and any fragment,
    and leaves path/query (including a trailing slash) exactly as given.
    """
    try:
        parts = urlsplit(url.strip())
    except ValueError as exc:
        raise MalformedUrl(str(exc)) from exc
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https") or not parts.hostname:
        raise MalformedUrl(f"not an absolute http/https URL: {url!r}")
    host = parts.hostname.lower()
    netloc = host
    if parts.port is not None and str(parts.port) != _DEFAULT_PORTS[scheme]:
        netloc = f"{host}:{parts.port}"
    if parts.username:
        raise MalformedUrl("credentials in URL are not accepted")
    return urlunsplit((scheme, netloc, parts.path, parts.query, ""))


def train_case(field_name: str) -> str:
    return "-".join(part.capitalize() for part in field_name.split("-"))


_TRAIN_TO_FIELD = {train_case(name): name for name in FIELD_ORDER}


class ContentType(str, Enum):
    HTML = "HTML"
    REDIF = "REDIF"


@dataclass(frozen=True)
class RecordDocument:
    content_type: ContentType
    body: str


@dataclass
class ParsedRecord:
    """One record recovered from a document: standard fields plus leniency notes."""

    fields: dict[str, list[str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None

    def first(self, name: str) -> str | None:
        values = self.fields.get(name)
        return values[0] if values else None


def _clean_value(value: str) -> str:
    # Values are single-line on the wire; internal newlines become one space.
    return re.sub(r"[\r\n]+", " ", value)


def record_field_values(record: ReviewRecord) -> list[tuple[str, str]]:
    """Flatten a released record into (field, value) pairs in standard order."""
    if not record.released:
        raise NotReleased(f"record {record.paper.record_id} has no released snapshot")
    paper, board, aggr = record.paper, record.board, record.aggregates
    by_field: dict[str, list[str]] = {
        "paper-title": [paper.title],
        "author-name": list(paper.authors),
        "author-institution": list(paper.institutions),
        "paper-url": [paper.canonical_url],
        "publication-date": [paper.publication_date.isoformat()] if paper.publication_date else [],
        "keyword": list(paper.keywords),
        "board-title": [board.title],
        "board-url": [board.url],
        "classification-code": list(board.classification_codes),
        "maintainer-email": [board.maintainer_email],
        "number-of-reviewers": [str(aggr.reviewer_count)],
        "review-date": [aggr.review_date.isoformat()],
        "comment": list(aggr.comments),
    }
    for dim, avg in aggr.averages.items():
        by_field[f"avg-{dim}"] = [avg]
    pairs = []
    emitted = set()
    for name in FIELD_ORDER:
        for value in by_field.get(name, []):
            pairs.append((name, _clean_value(value)))
        emitted.add(name)
    # Board-specific extra dimensions ride along after the standard block;
    # parsers flag them as unknown fields rather than erroring.
    for name in by_field:
        if name not in emitted:
            for value in by_field[name]:
                pairs.append((name, _clean_value(value)))
    return pairs


def _escape_content(value: str) -> str:
    return value.replace('"', "&quot;")


def _unescape_content(value: str) -> str:
    return value.replace("&quot;", '"')


def _escape_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_html_record(record: ReviewRecord) -> RecordDocument:
    """Render a released record as an HTML page with one META tag per field value."""
    pairs = record_field_values(record)
    meta_lines = [
        f'<META NAME="{name}" CONTENT="{_escape_content(value)}">' for name, value in pairs
    ]
    paper, aggr = record.paper, record.aggregates
    rows = []
    for dim in record.board.dimensions:
        rows.append(
            f"<tr><td>{_escape_text(dim)}</td><td>{aggr.averages[dim]}</td></tr>"
        )
    comment_items = "".join(f"<li>{_escape_text(c)}</li>" for c in aggr.comments)
    body = "\n".join(
        [
            f"<h1>{_escape_text(paper.title)}</h1>",
            f"<p>{_escape_text('; '.join(paper.authors))}</p>",
            f'<p><a href="{_escape_text(paper.canonical_url)}">{_escape_text(paper.canonical_url)}</a></p>',
            f"<p>Reviewers: {aggr.reviewer_count} &mdash; reviewed {aggr.review_date.isoformat()}</p>",
            "<table>" + "".join(rows) + "</table>",
            f"<ul>{comment_items}</ul>" if comment_items else "",
            f"<p>Board: {_escape_text(record.board.title)}</p>",
        ]
    )
    html = "\n".join(
        [
            "<!DOCTYPE html>",
            "<html>",
            "<head>",
            f"<title>{_escape_text(paper.title)}</title>",
            *meta_lines,
            "</head>",
            "<body>",
            body,
            "</body>",
            "</html>",
            "",
        ]
    )
    return RecordDocument(ContentType.HTML, html)


def emit_redif(records: list[ReviewRecord], board: BoardMeta) -> RecordDocument:
    """Render released records as ReDIF-Review templates, one blank line between templates."""
    templates = []
    for record in records:
        lines = [f"Template-Type: {REDIF_TEMPLATE_TYPE}"]
        for name, value in record_field_values(record):
            lines.append(f"{train_case(name)}: {value}")
        templates.append("\n".join(lines))
    body = "\n\n".join(templates)
    if templates:
        body += "\n"
    return RecordDocument(ContentType.REDIF, body)


_META_RE = re.compile(
    r"<META\s+NAME=\"([^\"]+)\"\s+CONTENT=\"([^\"]*)\"\s*/?>", re.IGNORECASE
)
_REDIF_LINE_RE = re.compile(r"^([A-Za-z][A-Za-z0-9-]*):\s?(.*)$")


def _finish(parsed: ParsedRecord) -> ParsedRecord:
    missing = [name for name in MANDATORY_FIELDS if not parsed.fields.get(name)]
    if missing:
        parsed.error = "missing mandatory field(s): " + ", ".join(missing)
    return parsed


def _add_field(parsed: ParsedRecord, name: str, value: str) -> None:
    if name not in _FIELD_SET:
        parsed.warnings.append(f"unknown field {name}")
    parsed.fields.setdefault(name, []).append(value)


_FIELD_SET = frozenset(FIELD_ORDER)


def parse_record_document(doc: RecordDocument) -> list[ParsedRecord]:
    """Recover record fields from an HTML page or a ReDIF export.

    Unknown fields become warnings; a record missing a mandatory field gets a
    per-record error while sibling records still parse.
    """
    if doc.content_type == ContentType.HTML:
        return _parse_html(doc.body)
    return _parse_redif(doc.body)


def _parse_html(body: str) -> list[ParsedRecord]:
    matches = _META_RE.findall(body)
    if not matches:
        raise UnparseableDocument("no META tags found")
    parsed = ParsedRecord()
    for name, content in matches:
        _add_field(parsed, name.lower(), _unescape_content(content))
    return [_finish(parsed)]


def _parse_redif(body: str) -> list[ParsedRecord]:
    stripped = body.strip("\n")
    if not stripped:
        return []
    records = []
    for chunk in re.split(r"\n\s*\n", stripped):
        parsed = ParsedRecord()
        saw_template_type = False
        for line in chunk.splitlines():
            if not line.strip():
                continue
            m = _REDIF_LINE_RE.match(line)
            if m is None:
                parsed.warnings.append(f"unparseable line: {line!r}")
                continue
            key, value = m.group(1), m.group(2)
            if key.lower() == "template-type":
                saw_template_type = True
                if value != REDIF_TEMPLATE_TYPE:
                    parsed.warnings.append(f"unexpected template type {value!r}")
                continue
            _add_field(parsed, key.lower(), value)
        if not saw_template_type and not parsed.fields:
            continue
        records.append(_finish(parsed))
    if not records:
        raise UnparseableDocument("no record boundary found")
    return records


def parsed_record_id(parsed: ParsedRecord) -> str | None:
    """Record identity recomputed from the parsed paper URL."""
    url = parsed.first("paper-url")
    if url is None:
        return None
    try:
        return record_id_for(normalize_paper_url(url))
    except MalformedUrl:
        return record_id_for(url)
