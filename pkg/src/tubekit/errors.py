"""Exception types shared across the library, with stable machine codes.

The ``code`` attribute is what the HTTP service and CLI surface to clients;
messages are free-form.
"""

from __future__ import annotations


class TubekitError(ValueError):
    """Base class for all domain errors."""

    code = "invalid"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InputError(TubekitError):
    """A precondition on an operation's inputs was violated."""

    code = "bad_input"


class RangeError(InputError):
    """An integer argument fell outside its permitted range."""

    code = "range"


class ShapeError(InputError):
    """Array arguments had mismatched or unsupported shapes."""

    code = "shape_mismatch"


class FormatError(TubekitError):
    """Base class for file-format parse errors."""

    code = "bad_format"


class BadMagicError(FormatError):
    code = "bad_magic"


class UnsupportedVersionError(FormatError):
    code = "bad_version"


class TruncatedPayloadError(FormatError):
    code = "truncated"
