"""Alert sweeps: match newly released records against stored subscription queries.

A sweep is externally triggered (CLI or admin endpoint). Each subscription
carries a watermark on the release sequence; a sweep considers only releases
past the watermark, delivers at most one notification per subscription, and
advances the watermark whether or not anything matched. Delivery failures
leave that subscription's watermark alone so the next sweep retries.
"""

from __future__ import annotations

import smtplib
from dataclasses import dataclass, field
from email.message import EmailMessage

from .query import evaluate
from .store import BoardStore


@dataclass
class Notification:
    contact: str
    query_text: str
    lines: list[str]
    record_ids: list[str]
    sweep_seq: int = 0

    @property
    def body(self) -> str:
        return "\n".join([f"New reviewed papers matching: {self.query_text}", *self.lines]) + "\n"


class InMemorySink:
    """Test/CLI sink capturing notifications in order."""

    def __init__(self):
        self.delivered: list[Notification] = []

    def deliver(self, notification: Notification) -> None:
        self.delivered.append(notification)


class FileSink:
    """Appends each notification's body to a file, one block per notification."""

    def __init__(self, path):
        self.path = path

    def deliver(self, notification: Notification) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(f"To: {notification.contact}\n{notification.body}\n")


class SmtpSink:
    """Delivers via a local/configured SMTP relay."""

    def __init__(self, host="localhost", port=25, sender="review-board@localhost"):
        self.host = host
        self.port = port
        self.sender = sender

    def deliver(self, notification: Notification) -> None:
        msg = EmailMessage()
        msg["From"] = self.sender
        msg["To"] = notification.contact
        msg["Subject"] = "New reviewed papers matching your subscription"
        msg.set_content(notification.body)
        with smtplib.SMTP(self.host, self.port) as smtp:
            smtp.send_message(msg)


@dataclass
class SweepSummary:
    sweep_seq: int
    subscriptions: int
    notifications: list[Notification] = field(default_factory=list)
    failed_subscriptions: list[str] = field(default_factory=list)


def sweep(store: BoardStore, sink, actor: str = "system") -> SweepSummary:
    """Run one sweep over all subscriptions; append one SWEEP_RUN event."""
    with store.lock:
        max_release_seq = store.last_release_seq
        released = store.released_records()
        notifications: list[Notification] = []
        watermarks: dict[str, int] = {}
        failures: list[str] = []
        for sub_id in sorted(store.subscriptions):
            sub = store.subscriptions[sub_id]
            matches = [
                r
                for r in released
                if r.last_release_seq > sub.watermark and evaluate(sub.ast, r)
            ]
            matches.sort(key=lambda r: r.last_release_seq)
            if matches:
                notification = Notification(
                    contact=sub.contact,
                    query_text=sub.query_text,
                    lines=[
                        f"{r.paper.title} — {r.paper.canonical_url} — released {r.released_on.isoformat()}"
                        for r in matches
                    ],
                    record_ids=[r.paper.record_id for r in matches],
                )
                try:
                    sink.deliver(notification)
                except Exception:
                    # Watermark untouched: this release window is retried next sweep.
                    failures.append(sub_id)
                    continue
                notifications.append(notification)
            watermarks[sub_id] = max_release_seq
        event = store._append(
            actor,
            "SWEEP_RUN",
            {
                "watermarks": watermarks,
                "notifications": len(notifications),
                "matched_records": sum(len(n.record_ids) for n in notifications),
                "failed_subscriptions": failures,
                "max_release_seq": max_release_seq,
            },
        )
        for notification in notifications:
            notification.sweep_seq = event.seq
        return SweepSummary(
            sweep_seq=event.seq,
            subscriptions=len(store.subscriptions),
            notifications=notifications,
            failed_subscriptions=failures,
        )
