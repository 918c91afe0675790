"""Domain types and the collation arithmetic turning individual reviews into public aggregates."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum
from fractions import Fraction

from .errors import EmptyInput

GRADE_MIN = 1
GRADE_MAX = 5

DEFAULT_DIMENSIONS = (
    "presentation",
    "relevance",
    "soundness",
    "originality",
    "importance-questions",
    "importance-results",
)


class RecordState(str, Enum):
    PENDING = "PENDING"
    READY = "READY"
    RELEASED = "RELEASED"
    STALE = "STALE"


@dataclass(frozen=True)
class PaperRef:
    """Identity and bibliographic metadata of an externally hosted paper."""

    canonical_url: str
    record_id: str
    title: str
    authors: tuple[str, ...]
    institutions: tuple[str, ...] = ()
    abstract: str = ""
    keywords: tuple[str, ...] = ()
    publication_date: date | None = None

    def __post_init__(self):
        if not self.title:
            raise ValueError("title must be non-empty")
        if not self.authors:
            raise ValueError("authors must be non-empty")


def record_id_for(canonical_url: str) -> str:
    """First 16 hex digits of the SHA-256 of the canonical URL."""
    return hashlib.sha256(canonical_url.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Review:
    reviewer_id: str
    record_id: str
    grades: dict[str, int]
    comment: str = ""
    submitted_at: datetime | None = None


@dataclass(frozen=True)
class Aggregates:
    """Collated public aggregates: counts, rendered per-dimension averages, comments."""

    reviewer_count: int
    averages: dict[str, str]
    review_date: date
    comments: tuple[str, ...]


@dataclass(frozen=True)
class BoardMeta:
    title: str
    url: str
    maintainer_email: str
    classification_codes: tuple[str, ...] = ()
    board_keywords: tuple[str, ...] = ()
    dimensions: tuple[str, ...] = DEFAULT_DIMENSIONS
    min_reviews: int = 2
    allow_unverified_urls: bool = False

    def __post_init__(self):
        if self.min_reviews < 1:
            raise ValueError("min_reviews must be >= 1")
        if not self.dimensions:
            raise ValueError("dimensions must be non-empty")


@dataclass
class ReviewRecord:
    """One paper's record: pending reviews plus the last released public snapshot.

    Only `aggregates` (the released snapshot) is ever publicly visible;
    pending reviews stay internal until an editor releases.
    """

    paper: PaperRef
    board: BoardMeta
    aggregates: Aggregates | None = None
    pending_reviews: list[Review] = field(default_factory=list)
    state: RecordState = RecordState.PENDING
    last_release_seq: int = 0
    released_on: date | None = None

    @property
    def released(self) -> bool:
        return self.last_release_seq > 0


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_review(review: Review, board: BoardMeta) -> ValidationReport:
    """Check a review against the board's dimension set. Never raises; reports."""
    violations = []
    for dim in board.dimensions:
        if dim not in review.grades:
            violations.append(f"missing dimension {dim}")
    for dim, grade in review.grades.items():
        if dim not in board.dimensions:
            violations.append(f"unknown dimension {dim}")
        elif not (isinstance(grade, int) and GRADE_MIN <= grade <= GRADE_MAX):
            violations.append(f"grade out of range [{GRADE_MIN},{GRADE_MAX}]: {dim}={grade}")
    return ValidationReport(tuple(violations))


def render_average(value: Fraction) -> str:
    """Render a non-negative rational to one decimal, rounding half away from zero."""
    tenths = value * 10
    q, r = divmod(tenths.numerator, tenths.denominator)
    if 2 * r >= tenths.denominator:
        q += 1
    return f"{q // 10}.{q % 10}"


def collate(reviews: list[Review], dimensions: tuple[str, ...]) -> Aggregates:
    """Aggregate one valid review per reviewer into the public record fields.

    Averages are exact rational means rendered to one decimal; comments keep
    submission order; review_date is the date of the newest contributing review.
    """
    if not reviews:
        raise EmptyInput("cannot collate an empty review list")
    averages = {}
    for dim in dimensions:
        mean = Fraction(sum(r.grades[dim] for r in reviews), len(reviews))
        averages[dim] = render_average(mean)
    review_date = max(r.submitted_at for r in reviews).date()
    comments = tuple(r.comment for r in reviews if r.comment)
    return Aggregates(
        reviewer_count=len(reviews),
        averages=averages,
        review_date=review_date,
        comments=comments,
    )
