"""Self-hostable electronic review board.

Collects multi-dimensional 1-5 peer judgements of externally hosted papers,
collates them into publicly searchable records with machine-readable metadata
(HTML META tags and a ReDIF-style export), and offers query search, alert
subscriptions, and cross-board harvesting.
"""

from .model import (
    Aggregates,
    BoardMeta,
    DEFAULT_DIMENSIONS,
    PaperRef,
    RecordState,
    Review,
    ReviewRecord,
    collate,
    validate_review,
)
from .store import BoardStore, Principal, Role

__all__ = [
    "Aggregates",
    "BoardMeta",
    "BoardStore",
    "DEFAULT_DIMENSIONS",
    "PaperRef",
    "Principal",
    "RecordState",
    "Review",
    "ReviewRecord",
    "Role",
    "collate",
    "validate_review",
]

__version__ = "0.1.0"
