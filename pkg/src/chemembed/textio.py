"""Byte-stream helpers shared by the file parsers."""

from __future__ import annotations

from typing import IO

from .errors import ParseError


def read_all(source: bytes | IO[bytes]) -> bytes:
    if isinstance(source, bytes):
        return source
    return source.read()


def decode_utf8(data: bytes, *, source: str) -> str:
    """Decode with a parse diagnostic instead of a bare UnicodeDecodeError."""
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc.reason}",
                         source=source, offset=exc.start) from None
