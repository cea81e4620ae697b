"""Base error type for the whole package.

Every domain error carries a stable machine-readable ``code`` so that the
service layer can map it onto an HTTP response without string matching.
"""

from __future__ import annotations


class MusekbError(Exception):
    """Common ancestor of all domain errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code
