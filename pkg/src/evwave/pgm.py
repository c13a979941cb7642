"""Binary PGM (P5, maxval 255) read/write for gray frames."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError


def pgm_bytes(pixels: np.ndarray) -> bytes:
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise ValidationError("PGM frames must be 2-D uint8")
    h, w = pixels.shape
    return b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(pgm_bytes(pixels))


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ParseError("not a binary PGM (P5) file", 0)
    # header = magic + width + height + maxval, '#' comments allowed between tokens
    pos, tokens = 2, []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol < 0 else eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise ParseError("truncated PGM header", start)
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte separates maxval from raster
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ParseError(f"bad PGM header token: {exc}", 2) from None
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval}", 2)
    raster = data[pos : pos + w * h]
    if len(raster) != w * h:
        raise ParseError("PGM raster shorter than width*height", pos)
    return np.frombuffer(raster, np.uint8).reshape(h, w).copy()
