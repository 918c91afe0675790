"""Event-sourced board state: authenticated submission, release gating, replay.

All mutations funnel through a single writer lock and are acknowledged only
after the event is appended (durably, when a log file is configured). State
is a pure function of the event log, so replay reconstructs it exactly.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum

from .errors import (
    AuthFailed,
    CorruptLog,
    DuplicateId,
    InvalidReview,
    NotReady,
    UnknownRecord,
    UnknownSubscription,
    UnreachablePaper,
)
from .events import Event, EventLog, verify_audit
from .model import (
    BoardMeta,
    PaperRef,
    RecordState,
    Review,
    ReviewRecord,
    collate,
    record_id_for,
    validate_review,
)
from .query import SearchIndex, parse_query
from .recordfmt import normalize_paper_url


class Role(str, Enum):
    REVIEWER = "REVIEWER"
    EDITOR = "EDITOR"
    ADMIN = "ADMIN"


@dataclass
class Principal:
    principal_id: str
    role: Role
    token_hash: str
    active: bool = True


@dataclass
class Subscription:
    subscription_id: str
    contact: str
    query_text: str
    ast: object
    watermark: int


@dataclass(frozen=True)
class SubmissionOutcome:
    record_id: str
    new_state: RecordState
    replaced: bool
    url_verified: bool


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class BoardStore:
    """One board's full state, rebuilt from (and persisted as) the event log."""

    def __init__(self, board: BoardMeta, log_path=None, clock=None):
        self.board = board
        self.clock = clock or _utc_now
        self.records: dict[str, ReviewRecord] = {}
        self.reviews: dict[str, dict[str, Review]] = {}
        self.principals: dict[str, Principal] = {}
        self.subscriptions: dict[str, Subscription] = {}
        self.index = SearchIndex()
        self.last_release_seq = 0
        self.lock = threading.RLock()
        self.log = EventLog(log_path)
        if self.log.events:
            report = verify_audit(self.log.events)
            if not report.intact:
                raise CorruptLog(f"log broken at seq {report.broken_seq}: {report.detail}")
            for event in self.log.events:
                self._apply(event)

    @classmethod
    def from_events(cls, board: BoardMeta, events: list[Event], clock=None) -> "BoardStore":
        """Rebuild state by replaying a verified event list."""
        report = verify_audit(events)
        if not report.intact:
            raise CorruptLog(f"log broken at seq {report.broken_seq}: {report.detail}")
        store = cls(board, log_path=None, clock=clock)
        for event in events:
            store.log.events.append(event)
            store._apply(event)
        return store

    # -- event plumbing ----------------------------------------------------

    def _append(self, actor: str, action: str, payload: dict) -> Event:
        event = self.log.append(self.clock().isoformat(), actor, action, payload)
        self._apply(event)
        return event

    def _apply(self, event: Event) -> None:
        handler = getattr(self, "_apply_" + event.action.lower())
        handler(event)

    def _apply_principal_added(self, event: Event) -> None:
        p = event.payload
        self.principals[p["principal_id"]] = Principal(
            p["principal_id"], Role(p["role"]), p["token_hash"], active=True
        )

    def _apply_principal_revoked(self, event: Event) -> None:
        self.principals[event.payload["principal_id"]].active = False

    def _apply_review_submitted(self, event: Event) -> None:
        p = event.payload
        record_id = p["record_id"]
        if record_id not in self.records:
            paper = _paper_from_payload(p["paper"], record_id)
            self.records[record_id] = ReviewRecord(paper=paper, board=self.board)
            self.reviews[record_id] = {}
        review = Review(
            reviewer_id=p["reviewer_id"],
            record_id=record_id,
            grades={k: int(v) for k, v in p["grades"].items()},
            comment=p.get("comment", ""),
            submitted_at=datetime.fromisoformat(event.timestamp),
        )
        self.reviews[record_id][review.reviewer_id] = review
        record = self.records[record_id]
        record.pending_reviews = list(self.reviews[record_id].values())
        self._refresh_state(record)

    _apply_review_replaced = _apply_review_submitted

    def _apply_record_released(self, event: Event) -> None:
        record = self.records[event.payload["record_id"]]
        record.aggregates = collate(record.pending_reviews, self.board.dimensions)
        record.state = RecordState.RELEASED
        record.last_release_seq = event.seq
        record.released_on = datetime.fromisoformat(event.timestamp).date()
        self.last_release_seq = event.seq
        self.index.index_record(record)

    def _apply_subscription_added(self, event: Event) -> None:
        p = event.payload
        self.subscriptions[p["subscription_id"]] = Subscription(
            subscription_id=p["subscription_id"],
            contact=p["contact"],
            query_text=p["query_text"],
            ast=parse_query(p["query_text"]),
            watermark=int(p["watermark"]),
        )

    def _apply_subscription_removed(self, event: Event) -> None:
        del self.subscriptions[event.payload["subscription_id"]]

    def _apply_sweep_run(self, event: Event) -> None:
        for sub_id, watermark in event.payload["watermarks"].items():
            if sub_id in self.subscriptions:
                self.subscriptions[sub_id].watermark = int(watermark)

    def _refresh_state(self, record: ReviewRecord) -> None:
        count = len(record.pending_reviews)
        if record.released:
            pending = collate(record.pending_reviews, self.board.dimensions)
            record.state = (
                RecordState.RELEASED if pending == record.aggregates else RecordState.STALE
            )
        elif count >= self.board.min_reviews:
            record.state = RecordState.READY
        else:
            record.state = RecordState.PENDING

    # -- authentication and accreditation ----------------------------------

    def authenticate(self, bearer_token: str) -> Principal:
        digest = hash_token(bearer_token or "")
        for principal in self.principals.values():
            if principal.active and secrets.compare_digest(principal.token_hash, digest):
                return principal
        raise AuthFailed("unknown or revoked credential")

    def add_principal(self, admin: Principal, principal_id: str, role: Role, token: str) -> Principal:
        with self.lock:
            self._require_role(admin, (Role.ADMIN,))
            if principal_id in self.principals:
                raise DuplicateId(f"principal {principal_id} already exists")
            self._append(
                admin.principal_id,
                "PRINCIPAL_ADDED",
                {"principal_id": principal_id, "role": role.value, "token_hash": hash_token(token)},
            )
            return self.principals[principal_id]

    def bootstrap_admin(self, principal_id: str, token: str) -> Principal:
        """First principal of a fresh board; actor is the system itself."""
        with self.lock:
            if self.principals:
                raise DuplicateId("board already has principals")
            self._append(
                "system",
                "PRINCIPAL_ADDED",
                {"principal_id": principal_id, "role": Role.ADMIN.value, "token_hash": hash_token(token)},
            )
            return self.principals[principal_id]

    def revoke_principal(self, admin: Principal, principal_id: str) -> Principal:
        with self.lock:
            self._require_role(admin, (Role.ADMIN,))
            if principal_id not in self.principals:
                raise UnknownRecord(f"no principal {principal_id}")
            self._append(admin.principal_id, "PRINCIPAL_REVOKED", {"principal_id": principal_id})
            return self.principals[principal_id]

    def _require_role(self, principal: Principal, roles) -> None:
        if not principal.active or principal.role not in roles:
            raise AuthFailed(f"requires role {' or '.join(r.value for r in roles)}")

    # -- review submission and release --------------------------------------

    def submit_review(
        self,
        principal: Principal,
        paper_fields: dict,
        grades: dict[str, int],
        comment: str = "",
        probe=None,
    ) -> SubmissionOutcome:
        """Submit or replace one reviewer's review; creates the record if the URL is new."""
        with self.lock:
            if not principal.active:
                raise AuthFailed("revoked principal")
            canonical_url = normalize_paper_url(paper_fields["paper-url"])
            record_id = record_id_for(canonical_url)
            review = Review(principal.principal_id, record_id, dict(grades), comment)
            report = validate_review(review, self.board)
            if not report.valid:
                raise InvalidReview(report.violations)
            url_verified = bool(probe(canonical_url)) if probe is not None else False
            if not url_verified and not self.board.allow_unverified_urls:
                raise UnreachablePaper(f"paper not found at {canonical_url}")
            payload = {
                "record_id": record_id,
                "reviewer_id": principal.principal_id,
                "grades": review.grades,
                "comment": comment,
                "url_verified": url_verified,
            }
            if record_id not in self.records:
                payload["paper"] = _paper_payload(paper_fields, canonical_url)
                _paper_from_payload(payload["paper"], record_id)  # validate before logging
            replaced = principal.principal_id in self.reviews.get(record_id, {})
            action = "REVIEW_REPLACED" if replaced else "REVIEW_SUBMITTED"
            self._append(principal.principal_id, action, payload)
            return SubmissionOutcome(
                record_id=record_id,
                new_state=self.records[record_id].state,
                replaced=replaced,
                url_verified=url_verified,
            )

    def release(self, principal: Principal, record_id: str) -> ReviewRecord:
        with self.lock:
            self._require_role(principal, (Role.EDITOR, Role.ADMIN))
            record = self.records.get(record_id)
            if record is None:
                raise UnknownRecord(f"no record {record_id}")
            if record.state not in (RecordState.READY, RecordState.STALE):
                raise NotReady(f"record {record_id} is {record.state.value}")
            self._append(principal.principal_id, "RECORD_RELEASED", {"record_id": record_id})
            return record

    # -- subscriptions -------------------------------------------------------

    def subscribe(self, contact: str, query_text: str) -> Subscription:
        with self.lock:
            parse_query(query_text)  # ParseError propagates; nothing persisted
            subscription_id = secrets.token_hex(8)
            self._append(
                "system",
                "SUBSCRIPTION_ADDED",
                {
                    "subscription_id": subscription_id,
                    "contact": contact,
                    "query_text": query_text,
                    "watermark": self.last_release_seq,
                },
            )
            return self.subscriptions[subscription_id]

    def unsubscribe(self, subscription_id: str) -> None:
        with self.lock:
            if subscription_id not in self.subscriptions:
                raise UnknownSubscription(f"no subscription {subscription_id}")
            self._append(
                "system", "SUBSCRIPTION_REMOVED", {"subscription_id": subscription_id}
            )

    # -- public read surface ---------------------------------------------------

    def released_records(self) -> list[ReviewRecord]:
        records = [r for r in self.records.values() if r.released]
        records.sort(key=lambda r: (-r.last_release_seq, r.paper.record_id))
        return records

    def public_record(self, record_id: str) -> ReviewRecord:
        record = self.records.get(record_id)
        if record is None or not record.released:
            raise UnknownRecord(f"no released record {record_id}")
        return record

    def search(self, ast, limit: int | None = None, offset: int = 0):
        return self.index.search(ast, limit=limit, offset=offset)

    def close(self) -> None:
        self.log.close()


def _paper_payload(fields: dict, canonical_url: str) -> dict:
    return {
        "canonical_url": canonical_url,
        "title": fields.get("paper-title", ""),
        "authors": list(fields.get("author-name", [])),
        "institutions": list(fields.get("author-institution", [])),
        "abstract": fields.get("abstract", ""),
        "keywords": [k.lower() for k in fields.get("keyword", [])],
        "publication_date": fields.get("publication-date"),
    }


def _paper_from_payload(payload: dict, record_id: str) -> PaperRef:
    pub = payload.get("publication_date")
    try:
        return PaperRef(
            canonical_url=payload["canonical_url"],
            record_id=record_id,
            title=payload["title"],
            authors=tuple(payload["authors"]),
            institutions=tuple(payload.get("institutions", [])),
            abstract=payload.get("abstract", ""),
            keywords=tuple(payload.get("keywords", [])),
            publication_date=date.fromisoformat(pub) if pub else None,
        )
    except ValueError as exc:
        raise InvalidReview([str(exc)]) from exc
