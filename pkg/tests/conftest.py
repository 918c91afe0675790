import random
from datetime import date

import pytest

from reviewboard.model import BoardMeta, DEFAULT_DIMENSIONS
from reviewboard.probes import FakeProbe
from reviewboard.store import BoardStore, Role


@pytest.fixture
def board():
    return BoardMeta(
        title="Context Studies Review Board",
        url="http://boards.example.org/context",
        maintainer_email="maintainer@example.org",
        classification_codes=("C63", "Z13"),
        board_keywords=("context", "modelling"),
    )


@pytest.fixture
def store(board):
    s = BoardStore(board)
    yield s
    s.close()


@pytest.fixture
def probe():
    return FakeProbe(default=True)


@pytest.fixture
def staffed(store, probe):
    """Store with an admin, an editor, and three reviewers."""
    admin = store.bootstrap_admin("admin", "admin-token")
    editor = store.add_principal(admin, "editor", Role.EDITOR, "editor-token")
    reviewers = [
        store.add_principal(admin, f"rev{i}", Role.REVIEWER, f"rev{i}-token") for i in range(3)
    ]
    return store, admin, editor, reviewers


def paper_fields(n=1, **overrides):
    fields = {
        "paper-url": f"http://papers.example.org/p{n}.pdf",
        "paper-title": f"Paper number {n}",
        "author-name": [f"Author, Number{n}"],
        "author-institution": [],
        "abstract": "",
        "keyword": [],
        "publication-date": None,
    }
    fields.update(overrides)
    return fields


def random_grades(rng: random.Random, dims=DEFAULT_DIMENSIONS):
    return {d: rng.randint(1, 5) for d in dims}


def submit(store, reviewer, n=1, grades=None, probe=None, **overrides):
    if probe is None:
        probe = FakeProbe(default=True)
    if grades is None:
        grades = {d: 3 for d in store.board.dimensions}
    return store.submit_review(
        reviewer, paper_fields(n, **overrides), grades,
        comment=overrides.get("comment", ""), probe=probe,
    )
