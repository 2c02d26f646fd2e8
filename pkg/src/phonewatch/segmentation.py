"""Skin segmentation from a per-frame skin sample.

The sample rectangle's colours are histogrammed in the quantized 8x8x8
space of each colour space; pixels whose bin holds at least ``frac`` of the
sample are skin.  The HSV and YCrCb masks are intersected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .imaging import QUANT_LEVELS, ImageBuffer, QuantizedImage, quantize, rgb_to_hsv, rgb_to_ycrcb
from .roi import Rect, RoiLayout

DEFAULT_FRACTION = 0.05


@dataclass(frozen=True, eq=False)
class ColorHistogram3D:
    counts: np.ndarray  # (8, 8, 8) int64
    total: int

    def count_of(self, code: int) -> int:
        return int(self.counts.reshape(-1)[code])


@dataclass(frozen=True, eq=False)
class SkinMask:
    bits: np.ndarray  # (h, w) bool

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SkinMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


def build_histogram(q: QuantizedImage, sample: Rect) -> ColorHistogram3D:
    if sample.w < 1 or sample.h < 1:
        raise InvalidInputError("empty skin sample")
    if not sample.inside(q.width, q.height):
        raise InvalidInputError(f"sample {sample} outside {q.width}x{q.height} image")
    rows, cols = sample.slices()
    codes = q.codes()[rows, cols].ravel()
    counts = np.bincount(codes, minlength=QUANT_LEVELS ** 3).reshape((QUANT_LEVELS,) * 3)
    return ColorHistogram3D(counts.astype(np.int64), int(codes.size))


def threshold_mask(q: QuantizedImage, hist: ColorHistogram3D,
                   frac: float = DEFAULT_FRACTION) -> SkinMask:
    if hist.total <= 0:
        raise InvalidInputError("histogram is empty")
    # real-valued comparison, inclusive: "at least frac of the sample"
    keep = hist.counts.reshape(-1) >= frac * hist.total
    return SkinMask(keep[q.codes()])


def combine(a: SkinMask, b: SkinMask) -> SkinMask:
    if a.bits.shape != b.bits.shape:
        raise InvalidInputError(f"mask shapes differ: {a.bits.shape} vs {b.bits.shape}")
    return SkinMask(a.bits & b.bits)


def segment_skin(crop: ImageBuffer, layout: RoiLayout,
                 frac: float = DEFAULT_FRACTION) -> SkinMask:
    if (crop.width, crop.height) != (layout.crop_w, layout.crop_h):
        raise InvalidInputError("crop size does not match the layout")
    masks = []
    for convert in (rgb_to_hsv, rgb_to_ycrcb):
        q = quantize(convert(crop))
        masks.append(threshold_mask(q, build_histogram(q, layout.skin_sample), frac))
    return combine(*masks)
