"""Exception hierarchy shared across deepcite.

Failures that belong to the evaluated data (a dead link, an unresolvable
citation label, a judge that never produced a parsable verdict) are carried as
values on the documents and records.  The exceptions below are reserved for
conditions the caller has to act on.
"""

from __future__ import annotations


class DeepciteError(RuntimeError):
    """Base class for deepcite failures."""


class ConfigurationError(DeepciteError, ValueError):
    """Raised when settings are missing, malformed or unsafe."""


class DocumentFormatError(DeepciteError, ValueError):
    """Raised when a serialized document cannot be decoded."""


class ReportSourceError(DeepciteError):
    """Raised when a report cannot be acquired from its source."""


class ReportNotFoundError(ReportSourceError):
    """Raised when a pre-generated report does not exist; never retried."""


class JudgeError(DeepciteError):
    """Raised when a judge backend fails to answer a prompt."""


class JudgeUnavailableError(JudgeError):
    """Raised when a judge backend cannot be reached; callers may retry."""


class JudgeOutputError(JudgeError, ValueError):
    """Raised when a judge completion does not follow the verdict grammar."""


class RenderError(DeepciteError, ValueError):
    """Raised when a metrics rendering is requested in an unknown format."""


__all__ = [
    "ConfigurationError",
    "DeepciteError",
    "DocumentFormatError",
    "JudgeError",
    "JudgeOutputError",
    "JudgeUnavailableError",
    "RenderError",
    "ReportNotFoundError",
    "ReportSourceError",
]
