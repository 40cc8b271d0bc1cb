"""Minimal readers and writers for binary PPM (P6) and PGM (P5/P2) files."""

from __future__ import annotations

import os

import numpy as np

from .errors import FormatError


def _tokens(data: bytes, count: int, pos: int = 0) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last one.
    """
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated header")
        out.append(data[start:pos])
    return out, pos + 1


def _dims(tokens: list[bytes]) -> tuple[int, int, int]:
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError("non-integer header field") from None
    if w <= 0 or h <= 0:
        raise FormatError(f"bad image size {w}x{h}")
    return w, h, maxval


def parse_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 image with maxval 255 into a ``(h, w, 3)`` uint8 array."""
    if data[:2] != b"P6":
        raise FormatError(f"expected P6, got {data[:2]!r}")
    header, pos = _tokens(data, 3, 2)
    w, h, maxval = _dims(header)
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}; only 255 is accepted")
    need = w * h * 3
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise FormatError("truncated pixel data")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P5 or P2 image into a ``(h, w)`` integer array."""
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise FormatError(f"expected P5 or P2, got {magic!r}")
    header, pos = _tokens(data, 3, 2)
    w, h, maxval = _dims(header)
    if not 0 < maxval < 65536:
        raise FormatError(f"bad maxval {maxval}")
    if magic == b"P2":
        try:
            vals = [int(t) for t in data[pos:].split()]
        except ValueError:
            raise FormatError("non-integer pixel value") from None
        if len(vals) < w * h:
            raise FormatError("truncated pixel data")
        return np.array(vals[: w * h], dtype=np.int64).reshape(h, w)
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    need = w * h * dtype.itemsize
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise FormatError("truncated pixel data")
    return np.frombuffer(raster, dtype=dtype).reshape(h, w).astype(np.int64)


def encode_ppm(pixels: np.ndarray) -> bytes:
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    return b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes()


def encode_pgm(values: np.ndarray) -> bytes:
    values = np.asarray(values, dtype=np.uint8)
    h, w = values.shape
    return b"P5\n%d %d\n255\n" % (w, h) + values.tobytes()


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_ppm(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
