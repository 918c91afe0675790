"""Hash-chained append-only event log: serialization, verification, persistence.

Every state mutation in the system is one event. The log doubles as the
persistence layer (replay rebuilds state) and as the tamper-evident audit
trail (each entry hashes its predecessor's hash).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from .errors import CorruptLog

GENESIS_HASH = "0" * 64

ACTIONS = frozenset(
    {
        "REVIEW_SUBMITTED",
        "REVIEW_REPLACED",
        "RECORD_RELEASED",
        "PRINCIPAL_ADDED",
        "PRINCIPAL_REVOKED",
        "SUBSCRIPTION_ADDED",
        "SUBSCRIPTION_REMOVED",
        "SWEEP_RUN",
    }
)


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: str
    actor: str
    action: str
    payload: dict
    prev_hash: str
    hash: str


def canonical_bytes(seq, timestamp, actor, action, payload, prev_hash) -> bytes:
    """The exact bytes that get hashed: canonical key order, compact JSON."""
    obj = {
        "seq": seq,
        "timestamp": timestamp,
        "actor": actor,
        "action": action,
        "payload": payload,
        "prev_hash": prev_hash,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def make_event(seq, timestamp, actor, action, payload, prev_hash) -> Event:
    digest = hashlib.sha256(
        canonical_bytes(seq, timestamp, actor, action, payload, prev_hash)
    ).hexdigest()
    return Event(seq, timestamp, actor, action, payload, prev_hash, digest)


def event_to_line(event: Event) -> str:
    obj = {
        "seq": event.seq,
        "timestamp": event.timestamp,
        "actor": event.actor,
        "action": event.action,
        "payload": event.payload,
        "prev_hash": event.prev_hash,
        "hash": event.hash,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def event_from_line(line: str) -> Event:
    try:
        obj = json.loads(line)
        return Event(
            seq=obj["seq"],
            timestamp=obj["timestamp"],
            actor=obj["actor"],
            action=obj["action"],
            payload=obj["payload"],
            prev_hash=obj["prev_hash"],
            hash=obj["hash"],
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptLog(f"unreadable event line: {exc}") from exc


@dataclass(frozen=True)
class VerificationReport:
    intact: bool
    broken_seq: int | None = None
    detail: str = ""


def verify_audit(events: list[Event]) -> VerificationReport:
    """Recompute every hash and chain link; report the first broken sequence."""
    prev_hash = GENESIS_HASH
    expected_seq = 1
    for event in events:
        if event.seq != expected_seq:
            return VerificationReport(False, event.seq, f"expected seq {expected_seq}")
        if event.prev_hash != prev_hash:
            return VerificationReport(False, event.seq, "prev_hash mismatch")
        recomputed = hashlib.sha256(
            canonical_bytes(
                event.seq,
                event.timestamp,
                event.actor,
                event.action,
                event.payload,
                event.prev_hash,
            )
        ).hexdigest()
        if recomputed != event.hash:
            return VerificationReport(False, event.seq, "hash mismatch")
        prev_hash = event.hash
        expected_seq += 1
    return VerificationReport(True)


class EventLog:
    """Append-only log, optionally backed by a line-per-event file."""

    def __init__(self, path=None):
        self.path = path
        self.events: list[Event] = []
        self._fh = None
        if path is not None:
            if os.path.exists(path):
                with open(path, "r", encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            self.events.append(event_from_line(line))
            self._fh = open(path, "a", encoding="utf-8")

    @property
    def last(self) -> Event | None:
        return self.events[-1] if self.events else None

    def next_seq(self) -> int:
        return len(self.events) + 1

    def prev_hash(self) -> str:
        return self.events[-1].hash if self.events else GENESIS_HASH

    def append(self, timestamp, actor, action, payload) -> Event:
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action}")
        event = make_event(self.next_seq(), timestamp, actor, action, payload, self.prev_hash())
        if self._fh is not None:
            self._fh.write(event_to_line(event) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
        self.events.append(event)
        return event

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_log(path) -> list[Event]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(event_from_line(line))
    return events
