"""Exception hierarchy shared across the toolkit."""


class PageTrimError(Exception):
    """Base class for all toolkit errors."""


class UrlError(PageTrimError):
    """Raised for malformed URLs."""


class MissingBaseError(UrlError):
    """Raised when a relative URL reference is given without a base."""


class RuleParseError(PageTrimError):
    """Raised when a rules file fails validation; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreferencesParseError(RuleParseError):
    """Raised when a preferences file fails validation."""


class HarImportError(PageTrimError):
    """Raised on malformed HAR input; carries the failing entry index."""

    def __init__(self, message: str, entry_index: int | None = None):
        self.entry_index = entry_index
        if entry_index is not None:
            message = f"entry {entry_index}: {message}"
        super().__init__(message)


class UnknownSnapshotError(PageTrimError):
    """Raised when a snapshot id does not exist in the store."""


class UnknownElementError(PageTrimError):
    """Raised when an element id is not part of the inventory/graph."""


class SelectionError(PageTrimError):
    """Raised when a selection does not cover the inventory exactly."""


class ConsistencyError(PageTrimError):
    """Raised on internally inconsistent inputs (e.g. overlapping byte ranges)."""


class RevisionConflictError(PageTrimError):
    """Raised when a mutation carries a stale session revision."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"stale revision {got}, session is at {expected}")


class UnknownSessionError(PageTrimError):
    """Raised when a session id is not known to the service."""
