"""Scalar (grayscale) image container and file IO.

Intensities are stored as float64 with a max-intensity convention m (255 by
default). Export quantizes; the in-memory pipeline keeps full precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class ImageIOError(IOError):
    pass


@dataclass
class ScalarImage:
    """Row-major grid of real intensities in [0, m]."""

    data: np.ndarray
    m: float = 255.0

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("image data must be 2-D")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("image contains non-finite values")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def quantized(self, bits: int = 8) -> np.ndarray:
        """Round to the nearest representable level of an integer image."""
        if bits == 8:
            levels, dtype = 255, np.uint8
        elif bits == 16:
            levels, dtype = 65535, np.uint16
        else:
            raise ValueError("bits must be 8 or 16")
        scaled = np.clip(self.data, 0.0, self.m) * (levels / self.m)
        return np.rint(scaled).astype(dtype)


def bilinear_sample(data: np.ndarray, x, y, fill: float = 0.0):
    """Bilinear interpolation of a 2-D grid at (x, y) = (column, row).

    Samples outside the grid return `fill`. Accepts scalars or arrays.
    """
    data = np.asarray(data, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h, w = data.shape
    inside = (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)
    xc = np.clip(x, 0, w - 1)
    yc = np.clip(y, 0, h - 1)
    x0 = np.clip(np.floor(xc).astype(int), 0, w - 2) if w > 1 else np.zeros_like(xc, dtype=int)
    y0 = np.clip(np.floor(yc).astype(int), 0, h - 2) if h > 1 else np.zeros_like(yc, dtype=int)
    fx = xc - x0
    fy = yc - y0
    v = (data[y0, x0] * (1 - fx) * (1 - fy)
         + data[y0, x0 + (w > 1)] * fx * (1 - fy)
         + data[y0 + (h > 1), x0] * (1 - fx) * fy
         + data[y0 + (h > 1), x0 + (w > 1)] * fx * fy)
    out = np.where(inside, v, fill)
    return float(out) if out.ndim == 0 else out


def write_pgm(img: ScalarImage, path, bits: int = 8) -> None:
    """Write binary (P5) PGM, 8- or 16-bit (16-bit samples big-endian)."""
    q = img.quantized(bits)
    maxval = 255 if bits == 8 else 65535
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    payload = q.tobytes() if bits == 8 else q.astype(">u2").tobytes()
    Path(path).write_bytes(header + payload)


def read_pgm(path) -> ScalarImage:
    """Read a binary (P5) PGM file."""
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ImageIOError(f"{path}: not a binary PGM file")
    # header: magic, width, height, maxval -- comments allowed between tokens
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval > 65535:
        raise ImageIOError(f"{path}: unsupported maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    count = width * height
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
    arr = data.reshape(height, width).astype(float) * (255.0 / maxval)
    return ScalarImage(data=arr, m=255.0)


def write_png(img: ScalarImage, path, bits: int = 8) -> None:
    """Write grayscale PNG (8- or 16-bit)."""
    q = img.quantized(bits)
    mode = "L" if bits == 8 else "I;16"
    Image.fromarray(q, mode=mode).save(path)


def read_image(path) -> ScalarImage:
    """Read PGM or any Pillow-supported image as grayscale luminance."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".ppm", ".pnm"):
        return read_pgm(path)
    try:
        im = Image.open(path)
    except OSError as exc:
        raise ImageIOError(f"cannot read image {path}: {exc}") from exc
    if im.mode == "I;16":
        arr = np.asarray(im, dtype=float) * (255.0 / 65535.0)
    else:
        arr = np.asarray(im.convert("L"), dtype=float)
    return ScalarImage(data=arr, m=255.0)
