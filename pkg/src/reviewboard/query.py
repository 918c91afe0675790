"""Reader-facing selection: query language parser, evaluator, and in-memory index.

Queries mix ordinal constraints on judgemental fields (`presentation > 2`,
`reviewers >= 3`) with case-folded whole-word text matches on content fields
(`keyword:context`, bare words match any field). Juxtaposition means AND.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import NotReleased, ParseError, UnknownDimension
from .model import ReviewRecord

TEXT_FIELDS = ("author", "title", "keyword", "abstract", "comment", "any")
CMP_OPS = ("<=", ">=", "<", "=", ">")
REVIEWERS_FIELD = "reviewers"


@dataclass(frozen=True)
class Cmp:
    field: str  # dimension name or "reviewers"
    op: str
    value: float  # integral for reviewers, one-decimal for dimensions

    @property
    def tenths(self) -> int:
        return round(self.value * 10)


@dataclass(frozen=True)
class TextMatch:
    field: str
    term: str


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<op><=|>=|<|=|>)
  | (?P<colon>:)
  | (?P<quoted>"[^"]*")
  | (?P<word>[^\s():<>="]+)
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "quoted":
                value = value[1:-1]
            tokens.append((kind, value, pos))
        pos = m.end()
    return tokens


_NUMBER_RE = re.compile(r"^\d+(\.\d)?$")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def fail(self, message, expected=()):
        tok = self.peek()
        position = tok[2] if tok else len(self.text)
        raise ParseError(message, position, expected)

    def parse(self):
        node = self.parse_or()
        if self.peek() is not None:
            self.fail(f"unexpected token {self.peek()[1]!r}", expected=("end of query",))
        return node

    def parse_or(self):
        children = [self.parse_and()]
        while self._keyword_ahead("OR"):
            self.next()
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def parse_and(self):
        children = [self.parse_not()]
        while True:
            tok = self.peek()
            if tok is None or tok[0] == "rparen" or self._keyword_ahead("OR"):
                break
            if self._keyword_ahead("AND"):
                self.next()
            children.append(self.parse_not())
        return children[0] if len(children) == 1 else And(tuple(children))

    def parse_not(self):
        if self._keyword_ahead("NOT"):
            self.next()
            return Not(self.parse_not())
        return self.parse_primary()

    def _keyword_ahead(self, keyword):
        tok = self.peek()
        return tok is not None and tok[0] == "word" and tok[1].upper() == keyword

    def parse_primary(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of query", expected=("term", "("))
        kind, value, pos = tok
        if kind == "lparen":
            self.next()
            node = self.parse_or()
            closing = self.next()
            if closing is None or closing[0] != "rparen":
                self.fail("unclosed group", expected=(")",))
            return node
        if kind != "word":
            self.fail(f"unexpected token {value!r}", expected=("term", "("))
        self.next()
        after = self.peek()
        if after is not None and after[0] == "op":
            return self._parse_cmp(value)
        if after is not None and after[0] == "colon":
            self.next()
            term_tok = self.next()
            if term_tok is None or term_tok[0] not in ("word", "quoted"):
                self.fail("expected a search term", expected=("word", "quoted string"))
            if value not in TEXT_FIELDS:
                raise ParseError(f"unknown text field {value!r}", pos, TEXT_FIELDS)
            return TextMatch(value, term_tok[1])
        return TextMatch("any", value)

    def _parse_cmp(self, name):
        op_tok = self.next()
        num_tok = self.peek()
        if num_tok is None or num_tok[0] != "word" or not _NUMBER_RE.match(num_tok[1]):
            self.fail("expected a number", expected=("number",))
        self.next()
        raw = num_tok[1]
        if name == REVIEWERS_FIELD:
            if "." in raw:
                raise ParseError("reviewer count must be an integer", num_tok[2])
            return Cmp(name, op_tok[1], float(int(raw)))
        value = float(raw)
        if not (1.0 <= value <= 5.0):
            raise ParseError("grade thresholds must lie in [1.0, 5.0]", num_tok[2])
        return Cmp(name, op_tok[1], value)


def parse_query(text: str):
    """Parse a query string into an AST; raises ParseError with position."""
    if not text.strip():
        raise ParseError("empty query", 0, expected=("term", "("))
    return _Parser(text).parse()


def render_query(node) -> str:
    """Canonical string form; render(parse(q)) reparses to an identical AST."""
    if isinstance(node, Cmp):
        if node.field == REVIEWERS_FIELD:
            return f"{node.field}{node.op}{int(node.value)}"
        return f"{node.field}{node.op}{node.value:.1f}"
    if isinstance(node, TextMatch):
        term = node.term
        if re.search(r'[\s():<>="]', term) or not term:
            term = f'"{term}"'
        return f"{node.field}:{term}"
    if isinstance(node, Not):
        return f"NOT {render_query(node.child)}"
    if isinstance(node, And):
        return "(" + " AND ".join(render_query(c) for c in node.children) + ")"
    if isinstance(node, Or):
        return "(" + " OR ".join(render_query(c) for c in node.children) + ")"
    raise TypeError(f"not a query node: {node!r}")


_WORD_RE = re.compile(r"\w+", re.UNICODE)


def _tokens_of(text: str) -> list[str]:
    return _WORD_RE.findall(text.casefold())


def _contains_term(text_tokens: list[str], term: str) -> bool:
    needle = _tokens_of(term)
    if not needle:
        return False
    if len(needle) == 1:
        return needle[0] in text_tokens
    n = len(needle)
    return any(text_tokens[i : i + n] == needle for i in range(len(text_tokens) - n + 1))


def record_text_fields(record: ReviewRecord) -> dict[str, str]:
    """The searchable text surface of a released snapshot."""
    paper, aggr = record.paper, record.aggregates
    fields = {
        "author": " ".join(paper.authors),
        "title": paper.title,
        "keyword": " ".join(paper.keywords),
        "abstract": paper.abstract,
        "comment": " ".join(aggr.comments),
    }
    fields["any"] = " ".join(
        [fields["author"], fields["title"], fields["keyword"], fields["abstract"],
         " ".join(paper.institutions), fields["comment"]]
    )
    return fields


def _cmp_holds(op: str, left: int, right: int) -> bool:
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == "=":
        return left == right
    if op == ">=":
        return left >= right
    return left > right


def evaluate(ast, record: ReviewRecord, warnings: list[str] | None = None) -> bool:
    """Decide whether a released snapshot satisfies the query.

    Dimension comparisons use the rendered one-decimal average (not the exact
    rational), so harvested copies of a record search identically. A missing
    dimension evaluates false and surfaces a warning.
    """
    if not record.released:
        raise NotReleased(f"record {record.paper.record_id} has no released snapshot")
    if isinstance(ast, And):
        return all(evaluate(c, record, warnings) for c in ast.children)
    if isinstance(ast, Or):
        return any(evaluate(c, record, warnings) for c in ast.children)
    if isinstance(ast, Not):
        return not evaluate(ast.child, record, warnings)
    if isinstance(ast, Cmp):
        if ast.field == REVIEWERS_FIELD:
            return _cmp_holds(ast.op, record.aggregates.reviewer_count * 10, ast.tenths)
        avg = record.aggregates.averages.get(ast.field)
        if avg is None:
            if warnings is not None:
                warnings.append(
                    UnknownDimension(f"record lacks dimension {ast.field}").args[0]
                )
            return False
        return _cmp_holds(ast.op, round(float(avg) * 10), ast.tenths)
    if isinstance(ast, TextMatch):
        text = record_text_fields(record).get(ast.field, "")
        return _contains_term(_tokens_of(text), ast.term)
    raise TypeError(f"not a query node: {ast!r}")


@dataclass(frozen=True)
class SearchResult:
    record_id: str
    record: ReviewRecord
    rank_key: tuple


@dataclass
class _Entry:
    record: ReviewRecord
    tenths: dict[str, int]
    reviewer_count: int
    tokens: dict[str, list[str]]


class SearchIndex:
    """Inverted index over released snapshots.

    The index path answers queries by candidate-set algebra over postings and
    numeric tables; it is deliberately a different code path from evaluate()
    so the two can cross-check each other.
    """

    def __init__(self):
        self._entries: dict[str, _Entry] = {}
        self._postings: dict[tuple[str, str], set[str]] = {}

    def __len__(self):
        return len(self._entries)

    def index_record(self, record: ReviewRecord) -> None:
        if not record.released:
            raise NotReleased(f"record {record.paper.record_id} is not released")
        rid = record.paper.record_id
        if rid in self._entries:
            self._remove_postings(rid)
        tokens = {f: _tokens_of(t) for f, t in record_text_fields(record).items()}
        entry = _Entry(
            record=record,
            tenths={d: round(float(a) * 10) for d, a in record.aggregates.averages.items()},
            reviewer_count=record.aggregates.reviewer_count,
            tokens=tokens,
        )
        self._entries[rid] = entry
        for fld, toks in tokens.items():
            for tok in set(toks):
                self._postings.setdefault((fld, tok), set()).add(rid)

    def remove_record(self, record_id: str) -> None:
        if record_id in self._entries:
            self._remove_postings(record_id)
            del self._entries[record_id]

    def _remove_postings(self, record_id: str) -> None:
        entry = self._entries[record_id]
        for fld, toks in entry.tokens.items():
            for tok in set(toks):
                bucket = self._postings.get((fld, tok))
                if bucket is not None:
                    bucket.discard(record_id)
                    if not bucket:
                        del self._postings[(fld, tok)]

    def _candidates(self, node) -> set[str]:
        if isinstance(node, And):
            sets = [self._candidates(c) for c in node.children]
            result = sets[0]
            for s in sets[1:]:
                result = result & s
            return result
        if isinstance(node, Or):
            result: set[str] = set()
            for c in node.children:
                result |= self._candidates(c)
            return result
        if isinstance(node, Not):
            return set(self._entries) - self._candidates(node.child)
        if isinstance(node, Cmp):
            out = set()
            for rid, entry in self._entries.items():
                if node.field == REVIEWERS_FIELD:
                    left = entry.reviewer_count * 10
                else:
                    if node.field not in entry.tenths:
                        continue
                    left = entry.tenths[node.field]
                if _cmp_holds(node.op, left, node.tenths):
                    out.add(rid)
            return out
        if isinstance(node, TextMatch):
            needle = _tokens_of(node.term)
            if not needle:
                return set()
            hits = self._postings.get((node.field, needle[0]), set())
            if len(needle) == 1:
                return set(hits)
            return {
                rid
                for rid in hits
                if _contains_term(self._entries[rid].tokens[node.field], node.term)
            }
        raise TypeError(f"not a query node: {node!r}")

    def search(self, ast, limit: int | None = None, offset: int = 0) -> list[SearchResult]:
        """Matching released records, newest release first, ties by record id."""
        hits = []
        for rid in self._candidates(ast):
            record = self._entries[rid].record
            hits.append(SearchResult(rid, record, (-record.last_release_seq, rid)))
        hits.sort(key=lambda h: h.rank_key)
        if offset:
            hits = hits[offset:]
        if limit is not None:
            hits = hits[:limit]
        return hits
