"""Binary (P5) PGM reading and writing.

Habitat maps and frame snapshots both use this format: magic ``P5``,
whitespace-separated width/height/maxval header with ``#`` comments,
then one byte per pixel, row-major, origin top-left.
"""

from __future__ import annotations

import numpy as np


class PgmError(ValueError):
    """Malformed PGM data; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def read_pgm(data: bytes) -> np.ndarray:
    """Parse P5 bytes into a uint8 array of shape (height, width)."""
    pos = 0

    def skip_separators(pos: int) -> int:
        # whitespace runs and '#' comments up to end of line
        while pos < len(data):
            c = data[pos : pos + 1]
            if c.isspace():
                pos += 1
            elif c == b"#":
                nl = data.find(b"\n", pos)
                if nl < 0:
                    raise PgmError("unterminated comment in header", pos)
                pos = nl + 1
            else:
                break
        return pos

    def read_token(pos: int, what: str) -> tuple[bytes, int]:
        pos = skip_separators(pos)
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PgmError(f"missing {what}", start)
        return data[start:pos], pos

    if data[:2] != b"P5":
        raise PgmError("not a P5 (binary greyscale) PGM", 0)
    pos = 2

    fields = []
    for what in ("width", "height", "maxval"):
        token, pos = read_token(pos, what)
        try:
            value = int(token)
        except ValueError:
            raise PgmError(f"{what} is not an integer: {token!r}", pos - len(token)) from None
        fields.append((value, pos - len(token)))
    (width, woff), (height, hoff), (maxval, moff) = fields
    if width < 1:
        raise PgmError(f"width must be >= 1, got {width}", woff)
    if height < 1:
        raise PgmError(f"height must be >= 1, got {height}", hoff)
    if maxval != 255:
        raise PgmError(f"only maxval 255 is supported, got {maxval}", moff)

    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmError("missing single whitespace after maxval", pos)
    pos += 1

    n = width * height
    if len(data) - pos < n:
        raise PgmError(
            f"truncated pixel data: expected {n} bytes, got {len(data) - pos}",
            len(data),
        )
    pixels = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos)
    return pixels.reshape(height, width).copy()


def write_pgm(pixels: np.ndarray) -> bytes:
    """Serialize a (height, width) uint8 array as P5 bytes."""
    if pixels.ndim != 2:
        raise ValueError(f"expected a 2D array, got shape {pixels.shape}")
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes()


def read_pgm_file(path) -> np.ndarray:
    with open(path, "rb") as f:
        return read_pgm(f.read())


def write_pgm_file(path, pixels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(write_pgm(pixels))
