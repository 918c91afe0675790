"""Exception hierarchy shared by every module."""


class ReviewBoardError(Exception):
    """Base class; `code` is the stable machine-readable token."""

    code = "error"


class MalformedUrl(ReviewBoardError):
    code = "malformed-url"


class EmptyInput(ReviewBoardError):
    code = "empty-input"


class NotReleased(ReviewBoardError):
    code = "not-released"


class UnparseableDocument(ReviewBoardError):
    code = "unparseable-document"


class AuthFailed(ReviewBoardError):
    code = "auth-failed"


class InvalidReview(ReviewBoardError):
    code = "invalid-review"

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class UnreachablePaper(ReviewBoardError):
    code = "unreachable-paper"


class NotReady(ReviewBoardError):
    code = "not-ready"


class UnknownRecord(ReviewBoardError):
    code = "unknown-record"


class DuplicateId(ReviewBoardError):
    code = "duplicate-id"


class CorruptLog(ReviewBoardError):
    code = "corrupt-log"


class ParseError(ReviewBoardError):
    """Query syntax error with the offending position and what was expected."""

    code = "parse-error"

    def __init__(self, message, position, expected=()):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.expected = tuple(expected)


class UnknownDimension(ReviewBoardError):
    code = "unknown-dimension"


class UnknownSubscription(ReviewBoardError):
    code = "unknown-subscription"


class SinkFailure(ReviewBoardError):
    code = "sink-failure"
