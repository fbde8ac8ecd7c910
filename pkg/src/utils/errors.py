"""Exception hierarchy shared by every lumisel package.

Library code raises these; the command layer (`commands/`) converts them into an
`ErrorResponse` and an exit code.
"""

from typing import Any


class LumiselError(Exception):
    """Base class for all errors raised by lumisel."""

    exit_code = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = {k: v for k, v in context.items() if v is not None}


class ConfigurationError(LumiselError):
    """Invalid render/compare/ablate configuration."""

    exit_code = 2


class SceneParseError(LumiselError):
    """The scene document is malformed or does not match the schema."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        field: str | None = None,
    ):
        location = []
        if line is not None:
            location.append(f"line {line}")
            if column is not None:
                location.append(f"column {column}")
        if field:
            location.append(f"field '{field}'")
        full = f"{message} ({', '.join(location)})" if location else message
        super().__init__(full, line=line, column=column, field=field)
        self.line = line
        self.column = column
        self.field = field


class SceneValidationError(LumiselError):
    """The scene parsed but describes something unrenderable (degenerate light, bad reference)."""

    exit_code = 2


class LightNotInClusterError(LumiselError):
    """A light index was queried against a cluster that does not contain it."""


class InvalidRecordError(LumiselError):
    """A training record carries non-finite or non-positive probability factors."""


class CheckpointError(LumiselError):
    """Base class for checkpoint read failures."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint magic or version does not match this build."""


class CheckpointTruncatedError(CheckpointError):
    """Checkpoint ended before all declared arrays were read."""


class UnknownAblationAxisError(ConfigurationError):
    """`ablate` was asked to sweep an axis it does not know."""
