"""Error types shared across the store, router and runtime."""


class XAppStoreError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "INTERNAL"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail or self.code


class ParseError(XAppStoreError):
    """Manifest or behavior document could not be parsed.

    `reason` is one of "malformed_document" | "unknown_top_level_field" |
    "missing_field"; `path` names the offending location.
    """

    code = "PARSE_ERROR"

    def __init__(self, reason: str, path: str = "", detail: str = ""):
        super().__init__(detail or f"{reason} at '{path}'")
        self.reason = reason
        self.path = path


class DuplicateVersion(XAppStoreError):
    code = "DUPLICATE_VERSION"


class MalformedArchive(XAppStoreError):
    code = "MALFORMED_ARCHIVE"


class UnknownId(XAppStoreError):
    code = "UNKNOWN_ID"


class InvalidTransition(XAppStoreError):
    code = "INVALID_TRANSITION"

    def __init__(self, from_state, event, detail: str = ""):
        super().__init__(detail or f"no transition from {from_state} on {event}")
        self.from_state = from_state
        self.event = event


class WrongState(XAppStoreError):
    code = "WRONG_STATE"


class NotRunning(XAppStoreError):
    code = "NOT_RUNNING"


class AlreadyRegistered(XAppStoreError):
    code = "ALREADY_REGISTERED"


class UnknownEndpoint(XAppStoreError):
    code = "UNKNOWN_ENDPOINT"


class IoFailure(XAppStoreError):
    code = "IO_FAILURE"


class CorruptStore(XAppStoreError):
    code = "CORRUPT_STORE"
