"""Operator tooling: board setup, accreditation, serving, sweeping, export,
audit verification, and harvesting remote boards into a foreign-records file."""

from __future__ import annotations

import argparse
import json
import os
import re
import secrets
import sys
from urllib.parse import urljoin

import requests
from filelock import FileLock, Timeout

from . import alerts
from .errors import ReviewBoardError, UnparseableDocument
from .events import read_log, verify_audit
from .model import DEFAULT_DIMENSIONS, BoardMeta
from .recordfmt import ContentType, RecordDocument, parse_record_document, parsed_record_id
from .store import BoardStore, Role

DEFAULT_CONFIG = {
    "board": {
        "title": "Example Review Board",
        "url": "http://localhost:8402",
        "maintainer_email": "maintainer@example.org",
        "classification_codes": [],
        "board_keywords": [],
        "dimensions": list(DEFAULT_DIMENSIONS),
        "min_reviews": 2,
        "allow_unverified_urls": False,
    },
    "data_dir": "data",
    "port": 8402,
    "help_dir": None,
    "sink": {"type": "file", "path": "notifications.txt"},
}


class Config:
    def __init__(self, path: str, raw: dict):
        self.path = os.path.abspath(path)
        self.raw = raw
        base = os.path.dirname(self.path)
        self.data_dir = os.path.join(base, raw["data_dir"])
        self.log_path = os.path.join(self.data_dir, "events.log")
        self.lock_path = os.path.join(self.data_dir, ".lock")
        self.port = int(raw.get("port", 8402))
        self.help_dir = raw.get("help_dir")
        if self.help_dir:
            self.help_dir = os.path.join(base, self.help_dir)
        b = raw["board"]
        self.board = BoardMeta(
            title=b["title"],
            url=b["url"],
            maintainer_email=b["maintainer_email"],
            classification_codes=tuple(b.get("classification_codes", [])),
            board_keywords=tuple(b.get("board_keywords", [])),
            dimensions=tuple(b.get("dimensions", DEFAULT_DIMENSIONS)),
            min_reviews=int(b.get("min_reviews", 2)),
            allow_unverified_urls=bool(b.get("allow_unverified_urls", False)),
        )

    def make_sink(self):
        sink_cfg = self.raw.get("sink", {"type": "memory"})
        kind = sink_cfg.get("type", "memory")
        if kind == "file":
            path = sink_cfg.get("path", "notifications.txt")
            return alerts.FileSink(os.path.join(self.data_dir, path))
        if kind == "smtp":
            return alerts.SmtpSink(
                host=sink_cfg.get("host", "localhost"),
                port=int(sink_cfg.get("port", 25)),
                sender=sink_cfg.get("sender", "review-board@localhost"),
            )
        return alerts.InMemorySink()


def load_config(path: str) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return Config(path, json.load(fh))


def _open_store(config: Config) -> BoardStore:
    return BoardStore(config.board, log_path=config.log_path)


def _authenticate_admin(store: BoardStore, args):
    token = args.admin_token or os.environ.get("REVIEWBOARD_ADMIN_TOKEN", "")
    return store.authenticate(token)


def cmd_init(args) -> int:
    if not os.path.exists(args.config):
        with open(args.config, "w", encoding="utf-8") as fh:
            json.dump(DEFAULT_CONFIG, fh, indent=2)
            fh.write("\n")
        print(f"wrote default config to {args.config}")
    config = load_config(args.config)
    os.makedirs(config.data_dir, exist_ok=True)
    with FileLock(config.lock_path, timeout=0):
        store = _open_store(config)
        try:
            if store.principals:
                print("board already initialized", file=sys.stderr)
                return 1
            token = secrets.token_hex(16)
            store.bootstrap_admin("admin", token)
            print("admin token (shown once, store it safely):")
            print(token)
            return 0
        finally:
            store.close()


def cmd_principal(args) -> int:
    config = load_config(args.config)
    with FileLock(config.lock_path, timeout=0):
        store = _open_store(config)
        try:
            admin = _authenticate_admin(store, args)
            if args.principal_command == "add":
                token = secrets.token_hex(16)
                store.add_principal(admin, args.id, Role(args.role.upper()), token)
                print(f"token for {args.id} (shown once):")
                print(token)
            else:
                store.revoke_principal(admin, args.id)
                print(f"revoked {args.id}")
            return 0
        finally:
            store.close()


def cmd_serve(args) -> int:
    import uvicorn

    from .probes import HttpPaperProbe
    from .service import create_app

    config = load_config(args.config)
    port = args.port if args.port else config.port
    lock = FileLock(config.lock_path, timeout=0)
    with lock:
        store = _open_store(config)
        app = create_app(
            store,
            probe=HttpPaperProbe(),
            sink=config.make_sink(),
            help_dir=config.help_dir,
        )
        uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    with FileLock(config.lock_path, timeout=0):
        store = _open_store(config)
        try:
            summary = alerts.sweep(store, config.make_sink())
            print(
                f"sweep {summary.sweep_seq}: {len(summary.notifications)} notification(s), "
                f"{summary.subscriptions} subscription(s), "
                f"{len(summary.failed_subscriptions)} failure(s)"
            )
            return 0
        finally:
            store.close()


def cmd_export(args) -> int:
    from .recordfmt import emit_redif

    config = load_config(args.config)
    store = _open_store(config)
    try:
        doc = emit_redif(store.released_records(), store.board)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc.body)
        print(f"wrote {len(store.released_records())} record(s) to {args.out}")
        return 0
    finally:
        store.close()


def cmd_verify_audit(args) -> int:
    config = load_config(args.config)
    events = read_log(config.log_path) if os.path.exists(config.log_path) else []
    report = verify_audit(events)
    if report.intact:
        print(f"intact ({len(events)} event(s))")
        return 0
    print(f"broken at seq {report.broken_seq}: {report.detail}", file=sys.stderr)
    return 1


_RECORD_LINK_RE = re.compile(r'href="(/records/[0-9a-f]{16})"')


def harvest(board_url: str, fetch=None) -> list[dict]:
    """Fetch a remote board's index page, follow record links, parse each record.

    Returns one entry per linked record: parsed fields with provenance, or a
    per-record error. Failures on individual records never abort the harvest.
    """
    if fetch is None:
        def fetch(url):
            response = requests.get(url, timeout=30)
            response.raise_for_status()
            return response.text

    index_url = board_url.rstrip("/") + "/records"
    index_html = fetch(index_url)
    entries = []
    for link in _RECORD_LINK_RE.findall(index_html):
        record_url = urljoin(index_url, link)
        entry = {"source-board": board_url, "fetched-from": record_url}
        try:
            page = fetch(record_url)
            parsed = parse_record_document(RecordDocument(ContentType.HTML, page))[0]
            entry["record-id"] = parsed_record_id(parsed)
            entry["fields"] = parsed.fields
            entry["warnings"] = parsed.warnings
            if parsed.error:
                entry["error"] = parsed.error
        except (requests.RequestException, UnparseableDocument, OSError) as exc:
            entry["error"] = str(exc)
        entries.append(entry)
    return entries


def cmd_harvest(args) -> int:
    entries = harvest(args.board_url)
    failures = sum(1 for e in entries if "error" in e)
    with open(args.out, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"harvested {len(entries) - failures}/{len(entries)} record(s) to {args.out}")
    for entry in entries:
        if "error" in entry:
            print(f"  failed: {entry['fetched-from']}: {entry['error']}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reviewboard", description=__doc__)
    parser.add_argument("--config", default="board.json", help="path to the board config file")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("init", help="create config, empty log, and the admin principal")

    p_principal = sub.add_parser("principal", help="manage accredited principals")
    p_principal.add_argument("--admin-token", default=None)
    psub = p_principal.add_subparsers(dest="principal_command", required=True)
    p_add = psub.add_parser("add")
    p_add.add_argument("id")
    p_add.add_argument("role", choices=["reviewer", "editor", "admin"])
    p_rev = psub.add_parser("revoke")
    p_rev.add_argument("id")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")

    sub.add_parser("sweep", help="run one alert sweep")

    p_export = sub.add_parser("export", help="write all released records as ReDIF")
    p_export.add_argument("--out", required=True)

    sub.add_parser("verify-audit", help="verify the event log hash chain")

    p_harvest = sub.add_parser("harvest", help="harvest a remote board's public records")
    p_harvest.add_argument("board_url")
    p_harvest.add_argument("--out", required=True)

    return parser


_COMMANDS = {
    "init": cmd_init,
    "principal": cmd_principal,
    "serve": cmd_serve,
    "sweep": cmd_sweep,
    "export": cmd_export,
    "verify-audit": cmd_verify_audit,
    "harvest": cmd_harvest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Timeout:
        print("another process holds the data-directory lock", file=sys.stderr)
        return 1
    except ReviewBoardError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
