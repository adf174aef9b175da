"""Shared exception types."""

from __future__ import annotations


class DataError(Exception):
    """Malformed or unusable input data (bad dump row, bad label file, ...)."""


class DumpParseError(DataError):
    """XML dump is not well formed.

    Attributes:
        byte_offset: byte position in the stream where parsing failed.
    """

    def __init__(self, message: str, byte_offset: int) -> None:
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset
