import random
from datetime import date

import pytest
from hypothesis import given, strategies as st

from reviewboard.errors import NotReleased, ParseError
from reviewboard.model import DEFAULT_DIMENSIONS, RecordState
from reviewboard.query import (
    And,
    Cmp,
    Not,
    Or,
    SearchIndex,
    TextMatch,
    evaluate,
    parse_query,
    render_query,
)
from tests.test_recordfmt import random_released_record, released_record


class TestParser:
    def test_paper_example(self):
        assert parse_query("presentation > 2") == Cmp("presentation", ">", 2.0)

    def test_juxtaposition_is_and(self):
        ast = parse_query("originality>=4 keyword:context")
        assert ast == And((Cmp("originality", ">=", 4.0), TextMatch("keyword", "context")))

    def test_not_over_or(self):
        ast = parse_query("NOT (soundness<3 OR reviewers<2)")
        assert ast == Not(Or((Cmp("soundness", "<", 3.0), Cmp("reviewers", "<", 2.0))))

    def test_double_operator_fails_at_position(self):
        with pytest.raises(ParseError) as exc:
            parse_query("originality >> 3")
        assert exc.value.position == 13

    def test_keywords_case_insensitive(self):
        assert parse_query("a and b") == parse_query("a AND b")
        assert parse_query("not a") == Not(TextMatch("any", "a"))

    def test_bareword_matches_any(self):
        assert parse_query("context") == TextMatch("any", "context")

    def test_quoted_term(self):
        assert parse_query('title:"multi word phrase"') == TextMatch("title", "multi word phrase")

    def test_whitespace_around_operator_optional(self):
        assert parse_query("presentation>2") == parse_query("presentation > 2")

    def test_unknown_text_field(self):
        with pytest.raises(ParseError):
            parse_query("journal:nature")

    def test_reviewers_must_be_integer(self):
        with pytest.raises(ParseError):
            parse_query("reviewers>=2.5")

    def test_dimension_threshold_range(self):
        with pytest.raises(ParseError):
            parse_query("presentation>7")

    def test_empty_query(self):
        with pytest.raises(ParseError):
            parse_query("   ")

    def test_unclosed_group(self):
        with pytest.raises(ParseError):
            parse_query("(a OR b")


def ast_strategy():
    cmp_node = st.one_of(
        st.builds(
            Cmp,
            st.sampled_from(DEFAULT_DIMENSIONS),
            st.sampled_from(["<", "<=", "=", ">=", ">"]),
            st.integers(10, 50).map(lambda t: t / 10),
        ),
        st.builds(
            Cmp,
            st.just("reviewers"),
            st.sampled_from(["<", "<=", "=", ">=", ">"]),
            st.integers(0, 9).map(float),
        ),
    )
    text_node = st.builds(
        TextMatch,
        st.sampled_from(["author", "title", "keyword", "abstract", "comment", "any"]),
        st.sampled_from(["context", "model", "review", "agent", "social", "multi word"]),
    )
    leaf = st.one_of(cmp_node, text_node)
    return st.recursive(
        leaf,
        lambda children: st.one_of(
            st.builds(Not, children),
            st.builds(lambda xs: And(tuple(xs)), st.lists(children, min_size=2, max_size=3)),
            st.builds(lambda xs: Or(tuple(xs)), st.lists(children, min_size=2, max_size=3)),
        ),
        max_leaves=8,
    )


@given(ast_strategy())
def test_render_parse_round_trip(ast):
    assert parse_query(render_query(ast)) == ast


class TestEvaluate:
    def test_threshold_inclusive_boundary(self):
        record = released_record(averages={d: "4.0" for d in DEFAULT_DIMENSIONS})
        assert evaluate(Cmp("originality", ">=", 4.0), record)

    def test_strict_threshold_excludes_boundary(self):
        record = released_record(averages={d: "2.0" for d in DEFAULT_DIMENSIONS})
        assert not evaluate(Cmp("presentation", ">", 2.0), record)

    def test_mixed_judgemental_and_content(self):
        record = released_record(
            averages={d: "4.5" for d in DEFAULT_DIMENSIONS}, keywords=("context",)
        )
        ast = parse_query("importance-results>=4 AND importance-results<=5 AND keyword:context")
        assert evaluate(ast, record)

    def test_unknown_dimension_false_with_warning(self):
        record = released_record()
        warnings = []
        assert not evaluate(Cmp("novelty", ">=", 1.0), record, warnings)
        assert warnings

    def test_text_match_is_whole_word(self):
        record = released_record(title="Contextual reasoning")
        assert not evaluate(TextMatch("title", "context"), record)
        assert evaluate(TextMatch("title", "contextual"), record)

    def test_text_match_case_folded(self):
        record = released_record(title="CONTEXT matters")
        assert evaluate(TextMatch("title", "Context"), record)

    def test_comment_searchable(self):
        record = released_record(comments=("groundbreaking result",))
        assert evaluate(TextMatch("comment", "groundbreaking"), record)
        assert evaluate(TextMatch("any", "groundbreaking"), record)

    def test_unreleased_raises(self):
        record = released_record()
        record.last_release_seq = 0
        record.aggregates = None
        with pytest.raises(NotReleased):
            evaluate(TextMatch("any", "x"), record)


def _query_corpus(rng, n):
    records = []
    for i in range(n):
        record = random_released_record(rng, i)
        record.last_release_seq = i + 1
        records.append(record)
    return records


def _random_query(rng):
    words = ["context", "model", "review", "agent", "social", "proof", "data", "paper"]
    def leaf():
        if rng.random() < 0.5:
            dim = rng.choice(list(DEFAULT_DIMENSIONS) + ["reviewers"])
            op = rng.choice(["<", "<=", "=", ">=", ">"])
            value = float(rng.randint(0, 9)) if dim == "reviewers" else rng.randint(10, 50) / 10
            return Cmp(dim, op, value)
        field = rng.choice(["author", "title", "keyword", "abstract", "comment", "any"])
        return TextMatch(field, rng.choice(words))

    def node(depth):
        r = rng.random()
        if depth >= 2 or r < 0.5:
            return leaf()
        if r < 0.65:
            return Not(node(depth + 1))
        children = tuple(node(depth + 1) for _ in range(rng.randint(2, 3)))
        return And(children) if r < 0.85 else Or(children)

    return node(0)


class TestSearchIndex:
    def test_index_and_find_by_title_word(self):
        index = SearchIndex()
        record = released_record(title="Singular xylophone study")
        index.index_record(record)
        assert [r.record_id for r in index.search(TextMatch("title", "xylophone"))] == [
            record.paper.record_id
        ]

    def test_unreleased_rejected(self):
        record = released_record()
        record.last_release_seq = 0
        with pytest.raises(NotReleased):
            SearchIndex().index_record(record)

    def test_reindex_replaces_snapshot(self):
        index = SearchIndex()
        record = released_record(averages={d: "2.0" for d in DEFAULT_DIMENSIONS})
        index.index_record(record)
        assert not index.search(Cmp("presentation", ">", 3.0))
        record.aggregates = record.aggregates.__class__(
            3, {d: "4.0" for d in DEFAULT_DIMENSIONS}, date(2026, 4, 1),
            record.aggregates.comments,
        )
        record.last_release_seq = 9
        index.index_record(record)
        assert len(index.search(Cmp("presentation", ">", 3.0))) == 1
        assert not index.search(Cmp("presentation", "<", 3.0))

    def test_empty_index(self):
        assert SearchIndex().search(Cmp("reviewers", ">=", 0.0)) == []

    def test_ordering_newest_release_first(self):
        index = SearchIndex()
        a = released_record(url="http://e.org/a.pdf")
        a.last_release_seq = 3
        b = released_record(url="http://e.org/b.pdf")
        b.last_release_seq = 8
        index.index_record(a)
        index.index_record(b)
        ids = [r.record_id for r in index.search(Cmp("reviewers", ">=", 0.0))]
        assert ids == [b.paper.record_id, a.paper.record_id]

    def test_pagination(self):
        index = SearchIndex()
        for i in range(10):
            record = released_record(url=f"http://e.org/{i}.pdf")
            record.last_release_seq = i + 1
            index.index_record(record)
        everything = index.search(Cmp("reviewers", ">=", 0.0))
        assert index.search(Cmp("reviewers", ">=", 0.0), limit=3) == everything[:3]
        assert index.search(Cmp("reviewers", ">=", 0.0), limit=3, offset=4) == everything[4:7]

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(2026)
        records = _query_corpus(rng, 200)
        index = SearchIndex()
        for record in records:
            index.index_record(record)
        for _ in range(50):
            ast = _random_query(rng)
            via_index = {r.record_id for r in index.search(ast)}
            brute = {r.paper.record_id for r in records if evaluate(ast, r)}
            assert via_index == brute

    def test_monotonicity(self):
        rng = random.Random(7)
        records = _query_corpus(rng, 100)
        index = SearchIndex()
        for record in records:
            index.index_record(record)
        for dim in DEFAULT_DIMENSIONS:
            previous = None
            for tenths in range(50, 9, -5):
                hits = {r.record_id for r in index.search(Cmp(dim, ">=", tenths / 10))}
                if previous is not None:
                    assert previous <= hits
                previous = hits

    def test_de_morgan(self):
        rng = random.Random(11)
        records = _query_corpus(rng, 80)
        index = SearchIndex()
        for record in records:
            index.index_record(record)
        for _ in range(20):
            a, b = _random_query(rng), _random_query(rng)
            lhs = {r.record_id for r in index.search(Not(Or((a, b))))}
            rhs = {r.record_id for r in index.search(And((Not(a), Not(b))))}
            assert lhs == rhs
