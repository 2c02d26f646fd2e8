"""Rectangle geometry: face-box expansion, skin-sample rectangle and the
two bottom-corner hand regions.

All fractional boundaries are computed in integer arithmetic and rounded
half-up, so layouts are identical on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInputError
from .imaging import ImageBuffer

MIN_CROP = 8


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def inside(self, width: int, height: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.right <= width and self.bottom <= height

    def intersects(self, other: "Rect") -> bool:
        return (
            self.x < other.right and other.x < self.right
            and self.y < other.bottom and other.y < self.bottom
        )

    def slices(self):
        """``(rows, cols)`` slices for indexing a ``(h, w, ...)`` array."""
        return slice(self.y, self.bottom), slice(self.x, self.right)


@dataclass(frozen=True)
class RoiLayout:
    crop_w: int
    crop_h: int
    skin_sample: Rect
    hand_region_1: Rect
    hand_region_2: Rect


def percent_of(n: int, pct: int) -> int:
    """``round_half_up(n * pct / 100)`` without touching floating point."""
    return (2 * n * pct + 100) // 200


def expand_face(face: Rect, frame_w: int, frame_h: int) -> Rect:
    """Widen a detected face box by 20% on each side, clamped to the frame."""
    if face.w <= 0 or face.h <= 0:
        raise InvalidInputError(f"degenerate face box {face}")
    if not face.inside(frame_w, frame_h):
        raise InvalidInputError(f"face box {face} lies outside the {frame_w}x{frame_h} frame")
    pad = percent_of(face.w, 20)
    x0 = max(0, face.x - pad)
    x1 = min(frame_w, face.right + pad)
    return Rect(x0, face.y, x1 - x0, face.h)


def largest_face(boxes) -> Rect | None:
    """Pick the largest-area box; ties keep the first one listed."""
    best = None
    for box in boxes:
        if best is None or box.area > best.area:
            best = box
    return best


def layout_for_crop(crop_w: int, crop_h: int) -> RoiLayout:
    if crop_w < MIN_CROP or crop_h < MIN_CROP:
        raise InvalidInputError(f"crop {crop_w}x{crop_h} is smaller than {MIN_CROP}x{MIN_CROP}")

    sw = max(1, percent_of(crop_w, 40))
    sh = max(1, percent_of(crop_h, 10))
    sx = (crop_w - sw + 1) // 2  # round-half-up of (crop_w - sw) / 2
    sy = percent_of(crop_h, 50)
    sample = Rect(sx, min(sy, crop_h - sh), sw, sh)

    hw = max(1, percent_of(crop_w, 25))
    hh = max(1, percent_of(crop_h, 25))
    left = Rect(0, crop_h - hh, hw, hh)
    right = Rect(crop_w - hw, crop_h - hh, hw, hh)
    return RoiLayout(crop_w, crop_h, sample, left, right)


def crop(img: ImageBuffer, r: Rect) -> ImageBuffer:
    if r.w < 1 or r.h < 1 or not r.inside(img.width, img.height):
        raise InvalidInputError(f"crop rect {r} outside {img.width}x{img.height} image")
    rows, cols = r.slices()
    return ImageBuffer(img.pixels[rows, cols], img.layout)
