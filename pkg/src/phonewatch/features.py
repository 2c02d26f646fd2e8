"""Frame features: hand-region skin percentage (PH) and the first Hu
invariant of the skin mask (MI).

Moments are accumulated as exact integers and combined as rationals, so the
only rounding happens in the final conversion to float.  That makes central
and normalized moments exactly invariant under integer translation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import EmptyMaskError, InvalidInputError
from .roi import RoiLayout
from .segmentation import SkinMask

ORDERS = (0, 1, 2)


@dataclass(frozen=True)
class FeatureVector:
    ph: float
    mi: float
    empty: bool = False  # set when the mask had no skin at all

    def as_array(self) -> np.ndarray:
        return np.array([self.ph, self.mi])


@dataclass(frozen=True)
class MomentSet:
    m00: int
    m10: int
    m01: int
    m20: int
    m02: int
    xc: float
    yc: float
    mu00: float
    mu20: float
    mu02: float
    eta20: float
    eta02: float


def percentage_hand(mask: SkinMask, layout: RoiLayout) -> float:
    if (mask.width, mask.height) != (layout.crop_w, layout.crop_h):
        raise InvalidInputError("mask size does not match the layout")
    r1 = int(mask.bits[layout.hand_region_1.slices()].sum())
    r2 = int(mask.bits[layout.hand_region_2.slices()].sum())
    return (r1 + r2) / (mask.width * mask.height)


def _raw_moments(bits: np.ndarray) -> dict:
    """Exact ``m_pq`` for p, q in {0, 1, 2}, using 1-based pixel coordinates."""
    bits = np.asarray(bits, dtype=bool)
    h, w = bits.shape
    col_counts = bits.sum(axis=0, dtype=np.int64)  # per x
    row_counts = bits.sum(axis=1, dtype=np.int64)  # per y
    xs = np.arange(1, w + 1, dtype=np.int64)
    ys = np.arange(1, h + 1, dtype=np.int64)
    # sum_{x,y} x^p y^q f = sum_y y^q * (sum_x x^p f(x,y)); the outer sums use
    # Python ints (object arrays) so large crops cannot overflow int64
    ys_obj = ys.astype(object)
    xs_obj = xs.astype(object)
    out = {}
    for p in ORDERS:
        per_row = bits.astype(np.int64) @ xs ** p if p else row_counts
        for q in ORDERS:
            if q == 0:
                out[p, q] = int((col_counts.astype(object) * xs_obj ** p).sum())
            else:
                out[p, q] = int((per_row.astype(object) * ys_obj ** q).sum())
    return out


def raw_moment(mask: SkinMask, p: int, q: int) -> float:
    if p not in ORDERS or q not in ORDERS:
        raise InvalidInputError(f"moment order ({p}, {q}) not supported")
    return float(_raw_moments(mask.bits)[p, q])


def _central_exact(m: dict, p: int, q: int) -> Fraction:
    m00 = m[0, 0]
    if m00 == 0:
        raise EmptyMaskError("central moments need at least one skin pixel")
    xc = Fraction(m[1, 0], m00)
    yc = Fraction(m[0, 1], m00)
    total = Fraction(0)
    for i in range(p + 1):
        for j in range(q + 1):
            total += comb(p, i) * comb(q, j) * (-xc) ** (p - i) * (-yc) ** (q - j) * m[i, j]
    return total


def central_moment(mask: SkinMask, p: int, q: int) -> float:
    if p not in ORDERS or q not in ORDERS:
        raise InvalidInputError(f"moment order ({p}, {q}) not supported")
    return float(_central_exact(_raw_moments(mask.bits), p, q))


def _eta_exact(m: dict, p: int, q: int) -> Fraction:
    # mu00^(1 + (p+q)/2) is a rational power only for even p+q
    if (p + q) % 2:
        raise InvalidInputError("normalized moments are computed for even p+q only")
    return _central_exact(m, p, q) / Fraction(m[0, 0]) ** (1 + (p + q) // 2)


def moment_set(mask: SkinMask) -> MomentSet:
    m = _raw_moments(mask.bits)
    if m[0, 0] == 0:
        raise EmptyMaskError("mask has no skin pixels")
    return MomentSet(
        m00=m[0, 0], m10=m[1, 0], m01=m[0, 1], m20=m[2, 0], m02=m[0, 2],
        xc=m[1, 0] / m[0, 0], yc=m[0, 1] / m[0, 0],
        mu00=float(m[0, 0]),
        mu20=float(_central_exact(m, 2, 0)), mu02=float(_central_exact(m, 0, 2)),
        eta20=float(_eta_exact(m, 2, 0)), eta02=float(_eta_exact(m, 0, 2)),
    )


def moment_of_inertia(mask: SkinMask) -> float:
    """First Hu invariant ``eta20 + eta02`` of the mask."""
    m = _raw_moments(mask.bits)
    if m[0, 0] == 0:
        raise EmptyMaskError("mask has no skin pixels")
    return float(_eta_exact(m, 2, 0) + _eta_exact(m, 0, 2))


def extract_features(mask: SkinMask, layout: RoiLayout) -> FeatureVector:
    """PH and MI for one frame; an empty mask yields ``(0, 0)`` flagged empty."""
    if not mask.bits.any():
        return FeatureVector(0.0, 0.0, empty=True)
    return FeatureVector(percentage_hand(mask, layout), moment_of_inertia(mask))
