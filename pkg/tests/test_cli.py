import json
import os
import re

import pytest
from fastapi.testclient import TestClient

from reviewboard.cli import DEFAULT_CONFIG, harvest, load_config, main
from reviewboard.probes import FakeProbe
from reviewboard.service import create_app
from tests.test_service import EDITOR, REVIEWER, REVIEWER2, publish_paper


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "board.json"
    raw = json.loads(json.dumps(DEFAULT_CONFIG))
    raw["board"]["allow_unverified_urls"] = True
    path.write_text(json.dumps(raw))
    return str(path)


def run(config_path, *args, capsys=None):
    code = main(["--config", config_path, *args])
    out = capsys.readouterr() if capsys else None
    return code, out


def admin_token_from(output):
    return output.out.strip().splitlines()[-1]


def test_init_then_verify_audit(config_path, capsys):
    code, out = run(config_path, "init", capsys=capsys)
    assert code == 0
    token = admin_token_from(out)
    assert re.fullmatch(r"[0-9a-f]{32}", token)
    code, out = run(config_path, "verify-audit", capsys=capsys)
    assert code == 0
    assert "intact (1 event(s))" in out.out


def test_init_writes_default_config(tmp_path, capsys):
    path = str(tmp_path / "fresh.json")
    code, _ = run(path, "init", capsys=capsys)
    assert code == 0
    assert os.path.exists(path)
    config = load_config(path)
    assert config.board.min_reviews == 2


def test_init_twice_fails(config_path, capsys):
    assert run(config_path, "init", capsys=capsys)[0] == 0
    assert run(config_path, "init", capsys=capsys)[0] == 1


def test_principal_roundtrip(config_path, capsys):
    _, out = run(config_path, "init", capsys=capsys)
    token = admin_token_from(out)
    code, out = run(
        config_path, "principal", "--admin-token", token, "add", "r1", "reviewer",
        capsys=capsys,
    )
    assert code == 0
    r1_token = admin_token_from(out)
    config = load_config(config_path)
    from reviewboard.store import BoardStore

    store = BoardStore(config.board, log_path=config.log_path)
    assert store.authenticate(r1_token).principal_id == "r1"
    store.close()
    code, _ = run(
        config_path, "principal", "--admin-token", token, "revoke", "r1", capsys=capsys
    )
    assert code == 0


def test_principal_bad_admin_token(config_path, capsys):
    run(config_path, "init", capsys=capsys)
    code, out = run(
        config_path, "principal", "--admin-token", "bogus", "add", "r1", "reviewer",
        capsys=capsys,
    )
    assert code == 1
    assert "auth-failed" in out.err


def test_export_empty_board(config_path, tmp_path, capsys):
    run(config_path, "init", capsys=capsys)
    out_file = str(tmp_path / "export.redif")
    code, _ = run(config_path, "export", "--out", out_file, capsys=capsys)
    assert code == 0
    assert open(out_file).read() == ""


def test_export_deterministic(config_path, tmp_path, capsys):
    _, out = run(config_path, "init", capsys=capsys)
    token = admin_token_from(out)
    # Seed two released records through the store directly.
    config = load_config(config_path)
    from reviewboard.store import BoardStore, Role
    from tests.conftest import submit

    store = BoardStore(config.board, log_path=config.log_path)
    admin = store.authenticate(token)
    editor = store.add_principal(admin, "ed", Role.EDITOR, "ed-tok")
    r1 = store.add_principal(admin, "r1", Role.REVIEWER, "r1-tok")
    r2 = store.add_principal(admin, "r2", Role.REVIEWER, "r2-tok")
    for n in (1, 2):
        outcome = submit(store, r1, n)
        submit(store, r2, n)
        store.release(editor, outcome.record_id)
    store.close()
    a, b = str(tmp_path / "a.redif"), str(tmp_path / "b.redif")
    assert run(config_path, "export", "--out", a, capsys=capsys)[0] == 0
    assert run(config_path, "export", "--out", b, capsys=capsys)[0] == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    assert "Template-Type: ReDIF-Review 1.0" in open(a).read()


def test_verify_audit_detects_tamper(config_path, capsys):
    run(config_path, "init", capsys=capsys)
    config = load_config(config_path)
    with open(config.log_path) as fh:
        line = fh.read()
    with open(config.log_path, "w") as fh:
        fh.write(line.replace('"admin"', '"evil!"'))
    code, out = run(config_path, "verify-audit", capsys=capsys)
    assert code == 1
    assert "broken at seq 1" in out.err


def test_sweep_cli_writes_notifications(config_path, capsys, staffed):
    _, out = run(config_path, "init", capsys=capsys)
    token = admin_token_from(out)
    config = load_config(config_path)
    from reviewboard.store import BoardStore, Role
    from tests.conftest import submit

    store = BoardStore(config.board, log_path=config.log_path)
    admin = store.authenticate(token)
    editor = store.add_principal(admin, "ed", Role.EDITOR, "ed-tok")
    r1 = store.add_principal(admin, "r1", Role.REVIEWER, "r1-tok")
    r2 = store.add_principal(admin, "r2", Role.REVIEWER, "r2-tok")
    store.subscribe("reader@example.org", "soundness>=1")
    outcome = submit(store, r1, 1)
    submit(store, r2, 1)
    store.release(editor, outcome.record_id)
    store.close()
    code, out = run(config_path, "sweep", capsys=capsys)
    assert code == 0
    assert "1 notification(s)" in out.out
    notifications = open(os.path.join(config.data_dir, "notifications.txt")).read()
    assert "reader@example.org" in notifications
    assert "Paper number 1" in notifications


def test_harvest_via_fetcher(staffed):
    store, _, _, _ = staffed
    app = create_app(store, probe=FakeProbe(default=True))
    client = TestClient(app)
    for n in (1, 2, 3):
        publish_paper(client, n=n)

    def fetch(url):
        path = url.split("http://remote.example.org", 1)[1]
        return client.get(path).text

    entries = harvest("http://remote.example.org", fetch=fetch)
    assert len(entries) == 3
    assert all("error" not in e for e in entries)
    titles = sorted(e["fields"]["paper-title"][0] for e in entries)
    assert titles == ["Paper number 1", "Paper number 2", "Paper number 3"]
    assert all(e["source-board"] == "http://remote.example.org" for e in entries)


def test_harvest_partial_failure(staffed):
    store, _, _, _ = staffed
    app = create_app(store, probe=FakeProbe(default=True))
    client = TestClient(app)
    publish_paper(client, n=1)
    broken_id = publish_paper(client, n=2)

    def fetch(url):
        if broken_id in url:
            raise OSError("connection reset")
        path = url.split("http://remote.example.org", 1)[1]
        return client.get(path).text

    entries = harvest("http://remote.example.org", fetch=fetch)
    assert len(entries) == 2
    errors = [e for e in entries if "error" in e]
    assert len(errors) == 1
    assert "connection reset" in errors[0]["error"]
