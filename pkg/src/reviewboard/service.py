"""HTTP API and the required public page set.

Public endpoints expose only released snapshots. Reviewer, editor, and admin
actions carry a bearer token; API request/response bodies use the same
canonical key-value object format as the event log.
"""

from __future__ import annotations

import html
import os

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, Response

from . import alerts
from .errors import (
    AuthFailed,
    CorruptLog,
    DuplicateId,
    EmptyInput,
    InvalidReview,
    MalformedUrl,
    NotReady,
    NotReleased,
    ParseError,
    ReviewBoardError,
    UnknownRecord,
    UnknownSubscription,
    UnparseableDocument,
    UnreachablePaper,
)
from .query import parse_query
from .recordfmt import emit_html_record, emit_redif
from .store import BoardStore, Role

DEFAULT_PAGE_LIMIT = 50
MAX_PAGE_LIMIT = 500

_STATUS_BY_ERROR = {
    ParseError: 400,
    InvalidReview: 400,
    MalformedUrl: 400,
    EmptyInput: 400,
    UnparseableDocument: 400,
    AuthFailed: 401,
    UnknownRecord: 404,
    UnknownSubscription: 404,
    NotReleased: 404,
    NotReady: 409,
    DuplicateId: 409,
    UnreachablePaper: 422,
    CorruptLog: 500,
}

_DEFAULT_CRITERIA = """\
Each paper is graded from 1 (lowest) to 5 (highest) on every dimension listed
below by each accredited reviewer. Public records show the number of
reviewers, the average grade per dimension to one decimal place, and the
reviewers' comments. A record is published only after the board's minimum
number of distinct reviews has been collected and an editor has checked and
released it. Re-released records reflect the newest collated judgements.
"""

_DEFAULT_HELP = """\
Searching: combine grade thresholds and text terms, e.g.
    presentation > 2 AND keyword:context
Fields: author, title, keyword, abstract, comment, any. Bare words match any
field. Grade constraints use the dimension name with <, <=, =, >= or >, and
reviewers compares the reviewer count. NOT and OR work as expected;
juxtaposition means AND.
Subscriptions: POST /subscriptions with a contact address and a query to be
notified when matching records are released.
"""


def _as_list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, list):
        return [str(v) for v in value]
    return [str(value)]


def _page(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n"
        f"<title>{html.escape(title)}</title>\n</head>\n<body>\n"
        f"{body}\n</body>\n</html>\n"
    )


def create_app(store: BoardStore, probe=None, sink=None, help_dir=None) -> FastAPI:
    app = FastAPI(title=store.board.title, docs_url=None, redoc_url=None, openapi_url=None)
    sink = sink if sink is not None else alerts.InMemorySink()

    @app.exception_handler(ReviewBoardError)
    async def _handle_error(request: Request, exc: ReviewBoardError):
        status = 500
        for klass, code in _STATUS_BY_ERROR.items():
            if isinstance(exc, klass):
                status = code
                break
        return JSONResponse(
            status_code=status,
            content={"status": status, "code": exc.code, "message": str(exc)},
        )

    def authed(request: Request, roles=None):
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise AuthFailed("missing bearer token")
        principal = store.authenticate(header[7:].strip())
        if roles is not None and principal.role not in roles:
            raise AuthFailed(f"requires role {' or '.join(r.value for r in roles)}")
        return principal

    # -- public pages -------------------------------------------------------

    @app.get("/", response_class=HTMLResponse)
    def title_page():
        board = store.board
        body = "\n".join(
            [
                f"<h1>{html.escape(board.title)}</h1>",
                f"<p>Maintainer: {html.escape(board.maintainer_email)}</p>",
                "<ul>",
                '<li><a href="/records">Reviewed papers (index)</a></li>',
                '<li><a href="/board">Reviewers and institutions</a></li>',
                '<li><a href="/criteria">What the judgements mean</a></li>',
                '<li><a href="/help">Help</a></li>',
                '<li><a href="/export.redif">Machine-readable export (ReDIF)</a></li>',
                "</ul>",
                '<form action="/search" method="get">'
                '<input name="q" size="60"> <button type="submit">Search</button></form>',
            ]
        )
        return _page(board.title, body)

    @app.get("/board", response_class=HTMLResponse)
    def board_page():
        board = store.board
        reviewers = sorted(
            p.principal_id
            for p in store.principals.values()
            if p.active and p.role == Role.REVIEWER
        )
        items = "".join(f"<li>{html.escape(r)}</li>" for r in reviewers)
        body = "\n".join(
            [
                f"<h1>{html.escape(board.title)} — reviewers and institutions</h1>",
                f"<ul>{items}</ul>" if items else "<p>No accredited reviewers yet.</p>",
                f"<p>Board URL: {html.escape(board.url)}</p>",
                f"<p>Classification codes: {html.escape(', '.join(board.classification_codes))}</p>",
            ]
        )
        return _page("Reviewers", body)

    @app.get("/criteria", response_class=HTMLResponse)
    def criteria_page():
        dims = "".join(f"<li>{html.escape(d)}</li>" for d in store.board.dimensions)
        body = (
            "<h1>Meaning of the judgemental information</h1>"
            f"<pre>{html.escape(_DEFAULT_CRITERIA)}</pre><ul>{dims}</ul>"
            f"<p>Minimum reviews before release: {store.board.min_reviews}</p>"
        )
        return _page("Criteria", body)

    @app.get("/help", response_class=HTMLResponse)
    def help_page():
        text = _DEFAULT_HELP
        if help_dir and os.path.isdir(help_dir):
            chunks = []
            for name in sorted(os.listdir(help_dir)):
                path = os.path.join(help_dir, name)
                if os.path.isfile(path):
                    with open(path, "r", encoding="utf-8") as fh:
                        chunks.append(fh.read())
            if chunks:
                text = "\n".join(chunks)
        return _page("Help", f"<h1>Help</h1><pre>{html.escape(text)}</pre>")

    @app.get("/records", response_class=HTMLResponse)
    def record_index():
        items = "".join(
            f'<li><a href="/records/{r.paper.record_id}">{html.escape(r.paper.title)}</a></li>'
            for r in store.released_records()
        )
        body = f"<h1>Reviewed papers</h1><ul>{items}</ul><p><a href=\"/\">Title page</a></p>"
        return _page("Reviewed papers", body)

    @app.get("/records/{record_id}", response_class=HTMLResponse)
    def record_page(record_id: str):
        record = store.public_record(record_id)
        return emit_html_record(record).body

    @app.get("/export.redif", response_class=PlainTextResponse)
    def export_redif():
        doc = emit_redif(store.released_records(), store.board)
        return PlainTextResponse(doc.body, media_type="text/plain; charset=utf-8")

    @app.get("/search")
    def search(q: str = "", limit: int = DEFAULT_PAGE_LIMIT, offset: int = 0, format: str = "html"):
        ast = parse_query(q)
        limit = max(1, min(limit, MAX_PAGE_LIMIT))
        offset = max(0, offset)
        results = store.search(ast, limit=limit, offset=offset)
        if format == "redif":
            doc = emit_redif([r.record for r in results], store.board)
            return PlainTextResponse(doc.body, media_type="text/plain; charset=utf-8")
        items = []
        for result in results:
            record = result.record
            avgs = ", ".join(
                f"{d}: {record.aggregates.averages[d]}" for d in store.board.dimensions
            )
            items.append(
                f'<li><a href="/records/{result.record_id}">{html.escape(record.paper.title)}</a>'
                f" ({html.escape(avgs)}; reviewers: {record.aggregates.reviewer_count})</li>"
            )
        body = (
            f"<h1>Search results</h1><p>Query: {html.escape(q)}</p>"
            f"<ul>{''.join(items)}</ul>"
        )
        return HTMLResponse(_page("Search results", body))

    # -- authenticated API ----------------------------------------------------

    @app.post("/reviews", status_code=201)
    async def post_review(request: Request):
        principal = authed(request)
        body = await request.json()
        paper_fields = {
            "paper-url": str(body.get("paper-url", "")),
            "paper-title": str(body.get("paper-title", "")),
            "abstract": str(body.get("abstract", "")),
            "publication-date": body.get("publication-date"),
        }
        # Accept both the field-standard names and their plural aliases.
        paper_fields["author-name"] = _as_list(body.get("author-name"))
        paper_fields["author-institution"] = _as_list(
            body.get("author-institution", body.get("institutions"))
        )
        paper_fields["keyword"] = _as_list(body.get("keyword", body.get("keywords")))
        grades = {}
        for dim in store.board.dimensions:
            value = body.get(f"grade-{dim}")
            if value is not None:
                grades[dim] = value if isinstance(value, int) else int(str(value))
        outcome = store.submit_review(
            principal,
            paper_fields,
            grades,
            comment=str(body.get("comment", "")),
            probe=probe,
        )
        return JSONResponse(
            status_code=201,
            content={
                "record-id": outcome.record_id,
                "state": outcome.new_state.value,
                "replaced": outcome.replaced,
                "url-verified": outcome.url_verified,
            },
        )

    @app.post("/records/{record_id}/release")
    def post_release(record_id: str, request: Request):
        principal = authed(request, roles=(Role.EDITOR, Role.ADMIN))
        record = store.release(principal, record_id)
        return {
            "record-id": record_id,
            "state": record.state.value,
            "release-seq": record.last_release_seq,
        }

    @app.post("/subscriptions", status_code=201)
    async def post_subscription(request: Request):
        body = await request.json()
        subscription = store.subscribe(str(body.get("contact", "")), str(body.get("query", "")))
        return JSONResponse(
            status_code=201, content={"subscription-id": subscription.subscription_id}
        )

    @app.delete("/subscriptions/{subscription_id}", status_code=204)
    def delete_subscription(subscription_id: str):
        store.unsubscribe(subscription_id)
        return Response(status_code=204)

    @app.get("/audit")
    def get_audit(request: Request):
        authed(request, roles=(Role.EDITOR, Role.ADMIN))
        return {
            "events": [
                {
                    "seq": e.seq,
                    "timestamp": e.timestamp,
                    "actor": e.actor,
                    "action": e.action,
                    "payload": e.payload,
                    "prev_hash": e.prev_hash,
                    "hash": e.hash,
                }
                for e in store.log.events
            ]
        }

    @app.post("/sweep")
    def post_sweep(request: Request):
        principal = authed(request, roles=(Role.ADMIN,))
        summary = alerts.sweep(store, sink, actor=principal.principal_id)
        return {
            "sweep-seq": summary.sweep_seq,
            "subscriptions": summary.subscriptions,
            "notifications": len(summary.notifications),
            "failed-subscriptions": summary.failed_subscriptions,
        }

    return app
