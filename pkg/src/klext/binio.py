"""Framed binary cache files: magic + version + payload + SHA-256 trailer.

Writers always produce the payload as one bytes object so identical logical
content yields identical files. Integers of arbitrary size are stored as a
2-byte length followed by signed big-endian bytes.
"""

from __future__ import annotations

import hashlib
import struct

from .errors import CacheFormatError

_TRAILER = 32  # sha256 digest size


def pack_bigint(n: int) -> bytes:
    length = max(1, (n.bit_length() + 8) // 8)  # +8 keeps a sign bit
    body = n.to_bytes(length, "big", signed=True)
    return struct.pack(">H", len(body)) + body


def unpack_bigint(buf: bytes, off: int) -> tuple[int, int]:
    (length,) = struct.unpack_from(">H", buf, off)
    off += 2
    return int.from_bytes(buf[off : off + length], "big", signed=True), off + length


def write_frame(path, magic: bytes, version: int, payload: bytes) -> None:
    head = magic + struct.pack(">I", version)
    digest = hashlib.sha256(head + payload).digest()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(payload)
        fh.write(digest)


def read_frame(path, magic: bytes, version: int) -> bytes:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(magic) + 4 + _TRAILER:
        raise CacheFormatError(f"{path}: truncated cache file")
    if blob[: len(magic)] != magic:
        raise CacheFormatError(f"{path}: bad magic, not a {magic!r} cache")
    (ver,) = struct.unpack_from(">I", blob, len(magic))
    if ver != version:
        raise CacheFormatError(f"{path}: format version {ver}, expected {version}")
    body, digest = blob[:-_TRAILER], blob[-_TRAILER:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheFormatError(f"{path}: checksum mismatch, file is corrupted")
    return body[len(magic) + 4 :]
