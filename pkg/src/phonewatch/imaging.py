"""Pixel-level primitives: 8-bit RGB rasters, colour-space conversion,
channel quantization and the netpbm (P6/P4) file formats.

Conventions, fixed so that results are bit-exact:

* HSV: hue in degrees mapped from [0, 360) onto [0, 255]; saturation and
  value scaled to [0, 255].
* YCrCb: ITU-R BT.601 full range, chroma offset 128.
* Results are exact rationals rounded half away from zero, then clamped
  to [0, 255]; integer arithmetic throughout, so there are no float ties.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

#: Quantization divisor: 256 levels / 32 = 8 bins per channel.
QUANT_STEP = 32
QUANT_LEVELS = 256 // QUANT_STEP


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """A ``height x width`` raster of 3-channel 8-bit pixels.

    ``pixels`` has shape ``(height, width, 3)`` and dtype ``uint8``.  The
    channel meaning (RGB, HSV or YCrCb) is carried by ``layout``.
    """

    pixels: np.ndarray
    layout: str = "RGB"

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise InvalidInputError(f"expected (h, w, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidInputError("image must be at least 1x1")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise InvalidInputError("channel values must lie in [0, 255]")
        if px.flags.writeable or px.dtype != np.uint8 or not px.flags.c_contiguous:
            # private read-only copy, so callers cannot mutate a live buffer
            px = np.array(px, dtype=np.uint8, order="C")
            px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def filled(cls, width: int, height: int, color, layout: str = "RGB") -> "ImageBuffer":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[...] = np.asarray(color, dtype=np.uint8)
        return cls(px, layout)

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.layout, self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    """Per-channel bin indices in ``[0, 7]``; shape ``(height, width, 3)``."""

    cells: np.ndarray

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def codes(self) -> np.ndarray:
        """Flat colour code ``c1*64 + c2*8 + c3`` per pixel, shape ``(h, w)``."""
        c = self.cells.astype(np.intp)
        return (c[..., 0] * QUANT_LEVELS + c[..., 1]) * QUANT_LEVELS + c[..., 2]


def _round_ratio(num: np.ndarray, den) -> np.ndarray:
    """Nearest integer to num/den (den > 0), halves away from zero, clamped to uint8.

    Integer arithmetic only: exact ties must not depend on float round-off.
    """
    mag = (2 * np.abs(num) + den) // (2 * den)
    return np.clip(np.sign(num) * mag, 0, 255).astype(np.uint8)


def rgb_to_hsv(img: ImageBuffer) -> ImageBuffer:
    """H from [0, 360) degrees onto [0, 255]; S and V scaled to [0, 255]."""
    rgb = img.pixels.astype(np.int64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    vmax = rgb.max(axis=2)
    delta = vmax - rgb.min(axis=2)
    d = np.where(delta > 0, delta, 1)

    # hue in sixths of a turn is sector + offset/delta; H = 255 * hue / 6
    offset = np.where(vmax == r, (g - b) + 6 * d * (g < b),
                      np.where(vmax == g, (b - r) + 2 * d, (r - g) + 4 * d))
    hue = np.where(delta > 0, _round_ratio(255 * offset, 6 * d), 0)
    sat = _round_ratio(255 * delta, np.where(vmax > 0, vmax, 1))
    out = np.stack([hue, sat, vmax], axis=2).astype(np.uint8)
    return ImageBuffer(out, "HSV")


# BT.601 full range, coefficients scaled by 10**6
_YCC = np.array([[299000, 587000, 114000],
                 [500000, -418688, -81312],
                 [-168736, -331264, 500000]], dtype=np.int64)
_YCC_OFFSET = np.array([0, 128, 128], dtype=np.int64) * 10**6


def rgb_to_ycrcb(img: ImageBuffer) -> ImageBuffer:
    rgb = img.pixels.astype(np.int64)
    num = rgb @ _YCC.T + _YCC_OFFSET
    return ImageBuffer(_round_ratio(num, 10**6), "YCrCb")


def quantize(img: ImageBuffer) -> QuantizedImage:
    cells = img.pixels // QUANT_STEP
    cells.setflags(write=False)
    return QuantizedImage(cells)


# -- netpbm I/O --------------------------------------------------------------


def _read_header(data: bytes, n_fields: int):
    """Parse whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset of the first raster byte.
    """
    tokens = []
    pos = 0
    while len(tokens) < n_fields:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise InvalidInputError("truncated netpbm header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_ppm(path) -> ImageBuffer:
    data = Path(path).read_bytes()
    tokens, offset = _read_header(data, 4)
    if tokens[0] != b"P6":
        raise InvalidInputError(f"{path}: not a binary PPM (P6) file")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise InvalidInputError(f"{path}: only maxval 255 is supported, got {maxval}")
    n = width * height * 3
    raster = data[offset : offset + n]
    if len(raster) != n:
        raise InvalidInputError(f"{path}: truncated raster")
    px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(px.copy())


def write_ppm(path, img: ImageBuffer) -> None:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def write_pbm(path, bits: np.ndarray) -> None:
    """Write a boolean ``(h, w)`` array as P4; ``True`` is stored as black (1)."""
    bits = np.asarray(bits, dtype=bool)
    h, w = bits.shape
    packed = np.packbits(bits, axis=1)
    Path(path).write_bytes(f"P4\n{w} {h}\n".encode("ascii") + packed.tobytes())


def read_pbm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, offset = _read_header(data, 3)
    if tokens[0] != b"P4":
        raise InvalidInputError(f"{path}: not a binary PBM (P4) file")
    w, h = int(tokens[1]), int(tokens[2])
    row_bytes = (w + 7) // 8
    raster = np.frombuffer(data[offset : offset + row_bytes * h], dtype=np.uint8)
    if raster.size != row_bytes * h:
        raise InvalidInputError(f"{path}: truncated raster")
    return np.unpackbits(raster.reshape(h, row_bytes), axis=1)[:, :w].astype(bool)
