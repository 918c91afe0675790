import random
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from reviewboard.errors import EmptyInput
from reviewboard.model import (
    DEFAULT_DIMENSIONS,
    BoardMeta,
    Review,
    collate,
    record_id_for,
    validate_review,
)

BOARD = BoardMeta(title="B", url="http://b.org", maintainer_email="m@b.org")


def make_review(reviewer, grades, comment="", when=None):
    when = when or datetime(2026, 1, 1, tzinfo=timezone.utc)
    return Review(reviewer, "0" * 16, grades, comment, when)


def oracle_average(grades: list[int]) -> str:
    """Independent mean-and-round: integer arithmetic on tenths, half away from zero."""
    total, n = sum(grades), len(grades)
    numerator = total * 10
    q, r = divmod(numerator, n)
    if 2 * r >= n:
        q += 1
    return f"{q // 10}.{q % 10}"


class TestValidateReview:
    def test_all_threes_valid(self):
        report = validate_review(make_review("r", {d: 3 for d in DEFAULT_DIMENSIONS}), BOARD)
        assert report.valid
        assert report.violations == ()

    def test_out_of_range_grade(self):
        grades = {d: 3 for d in DEFAULT_DIMENSIONS}
        grades["originality"] = 6
        report = validate_review(make_review("r", grades), BOARD)
        assert any("out of range [1,5]" in v for v in report.violations)

    def test_missing_dimension(self):
        grades = {d: 3 for d in DEFAULT_DIMENSIONS if d != "soundness"}
        report = validate_review(make_review("r", grades), BOARD)
        assert any("missing dimension" in v for v in report.violations)

    def test_unknown_dimension(self):
        grades = {d: 3 for d in DEFAULT_DIMENSIONS}
        grades["novelty"] = 3
        report = validate_review(make_review("r", grades), BOARD)
        assert any("unknown dimension" in v for v in report.violations)


class TestCollate:
    def test_single_review_identity(self):
        aggr = collate([make_review("r", {d: 4 for d in DEFAULT_DIMENSIONS})], DEFAULT_DIMENSIONS)
        assert aggr.reviewer_count == 1
        assert set(aggr.averages.values()) == {"4.0"}

    def test_two_reviews_mean(self):
        reviews = [
            make_review("a", {d: 3 for d in DEFAULT_DIMENSIONS}),
            make_review("b", {d: 4 for d in DEFAULT_DIMENSIONS}),
        ]
        aggr = collate(reviews, DEFAULT_DIMENSIONS)
        assert aggr.averages["originality"] == "3.5"

    def test_eleven_thirds_rounds_half_away(self):
        reviews = [
            make_review("a", {d: 3 for d in DEFAULT_DIMENSIONS}),
            make_review("b", {d: 4 for d in DEFAULT_DIMENSIONS}),
            make_review("c", {d: 4 for d in DEFAULT_DIMENSIONS}),
        ]
        aggr = collate(reviews, DEFAULT_DIMENSIONS)
        assert aggr.averages["originality"] == "3.7"  # 11/3 = 3.666...

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            collate([], DEFAULT_DIMENSIONS)

    def test_comments_keep_submission_order(self):
        reviews = [
            make_review("a", {d: 3 for d in DEFAULT_DIMENSIONS}, comment="first"),
            make_review("b", {d: 3 for d in DEFAULT_DIMENSIONS}, comment=""),
            make_review("c", {d: 3 for d in DEFAULT_DIMENSIONS}, comment="third"),
        ]
        assert collate(reviews, DEFAULT_DIMENSIONS).comments == ("first", "third")

    def test_review_date_is_latest(self):
        reviews = [
            make_review("a", {d: 3 for d in DEFAULT_DIMENSIONS},
                        when=datetime(2026, 2, 1, tzinfo=timezone.utc)),
            make_review("b", {d: 3 for d in DEFAULT_DIMENSIONS},
                        when=datetime(2026, 5, 9, tzinfo=timezone.utc)),
        ]
        assert collate(reviews, DEFAULT_DIMENSIONS).review_date.isoformat() == "2026-05-09"

    def test_fifty_random_reviews_match_oracle(self):
        rng = random.Random(4221)
        reviews = [
            make_review(f"r{i}", {d: rng.randint(1, 5) for d in DEFAULT_DIMENSIONS})
            for i in range(50)
        ]
        aggr = collate(reviews, DEFAULT_DIMENSIONS)
        for dim in DEFAULT_DIMENSIONS:
            assert aggr.averages[dim] == oracle_average([r.grades[dim] for r in reviews])


@given(st.lists(st.lists(st.integers(1, 5), min_size=6, max_size=6), min_size=1, max_size=40))
def test_collate_properties(grade_rows):
    reviews = [
        make_review(f"r{i}", dict(zip(DEFAULT_DIMENSIONS, row)))
        for i, row in enumerate(grade_rows)
    ]
    aggr = collate(reviews, DEFAULT_DIMENSIONS)
    for dim in DEFAULT_DIMENSIONS:
        grades = [r.grades[dim] for r in reviews]
        value = float(aggr.averages[dim])
        # Rendering tolerance: the one-decimal string sits within 0.05 of the mean.
        assert min(grades) - 0.05 <= value <= max(grades) + 0.05
        assert aggr.averages[dim] == oracle_average(grades)
    # Permutation invariance for counts and averages.
    shuffled = list(reversed(reviews))
    aggr2 = collate(shuffled, DEFAULT_DIMENSIONS)
    assert aggr2.averages == aggr.averages
    assert aggr2.reviewer_count == aggr.reviewer_count
    # Parse-then-render fixed point.
    from fractions import Fraction
    from reviewboard.model import render_average

    for rendered in aggr.averages.values():
        assert render_average(Fraction(rendered)) == rendered


def test_record_id_golden():
    # sha256 of the URL computed once with coreutils sha256sum.
    assert (
        record_id_for("http://example.org/p.pdf") == "95728f04c6ea48cc"
    )


def test_record_id_deterministic():
    assert record_id_for("https://a.b/x") == record_id_for("https://a.b/x")
    assert len(record_id_for("https://a.b/x")) == 16
