import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import naive_moments
from phonewatch.errors import EmptyMaskError
from phonewatch.features import (FeatureVector, central_moment, extract_features,
                                 moment_of_inertia, moment_set, percentage_hand, raw_moment)
from phonewatch.roi import layout_for_crop
from phonewatch.segmentation import SkinMask


def mask_of(bits):
    return SkinMask(np.asarray(bits, dtype=bool))


def disc(n):
    yy, xx = np.mgrid[0:n, 0:n]
    return ((xx + 0.5 - n / 2) ** 2 + (yy + 0.5 - n / 2) ** 2) <= (0.4 * n) ** 2


def ell(n):
    bits = np.zeros((n, n), bool)
    bits[n // 8 : 7 * n // 8, n // 8 : 3 * n // 8] = True
    bits[5 * n // 8 : 7 * n // 8, n // 8 : 7 * n // 8] = True
    return bits


def test_percentage_hand_examples():
    lay = layout_for_crop(100, 100)
    assert percentage_hand(mask_of(np.zeros((100, 100))), lay) == 0
    assert percentage_hand(mask_of(np.ones((100, 100))), lay) == 0.125
    bits = np.zeros((100, 100), bool)
    bits[lay.hand_region_1.slices()] = True
    assert percentage_hand(mask_of(bits), lay) == 0.0625


@given(st.integers(0, 2**32 - 1))
def test_percentage_hand_monotone(seed):
    rng = np.random.default_rng(seed)
    lay = layout_for_crop(40, 32)
    bits = rng.random((32, 40)) < 0.3
    base = percentage_hand(mask_of(bits), lay)
    inside = np.zeros_like(bits)
    inside[lay.hand_region_1.slices()] = True
    inside[lay.hand_region_2.slices()] = True
    more = bits | (inside & (rng.random(bits.shape) < 0.5))
    elsewhere = bits | (~inside & (rng.random(bits.shape) < 0.5))
    assert percentage_hand(mask_of(more), lay) >= base
    assert percentage_hand(mask_of(elsewhere), lay) == base
    assert 0.0 <= base <= 1.0


def test_raw_moment_examples():
    one = np.zeros((8, 8), bool)
    one[4, 2] = True  # x = 3, y = 5 in 1-based coordinates
    m = mask_of(one)
    assert (raw_moment(m, 0, 0), raw_moment(m, 1, 0), raw_moment(m, 0, 1)) == (1, 3, 5)
    empty = mask_of(np.zeros((5, 5)))
    assert all(raw_moment(empty, p, q) == 0 for p in range(3) for q in range(3))
    pair = np.zeros((3, 3), bool)
    pair[0, 0] = pair[0, 2] = True
    assert raw_moment(mask_of(pair), 1, 0) == 4


def test_central_moment_examples():
    one = np.zeros((8, 8), bool)
    one[6, 1] = True
    assert central_moment(mask_of(one), 2, 0) == 0 == central_moment(mask_of(one), 0, 2)
    pair = np.zeros((3, 3), bool)
    pair[0, 0] = pair[0, 2] = True
    ms = moment_set(mask_of(pair))
    assert ms.xc == 2 and ms.mu20 == 2 and ms.mu02 == 0
    with pytest.raises(EmptyMaskError):
        central_moment(mask_of(np.zeros((3, 3))), 2, 0)
    with pytest.raises(EmptyMaskError):
        moment_of_inertia(mask_of(np.zeros((3, 3))))


def test_solid_square_limit():
    bits = np.zeros((220, 220), bool)
    bits[10:210, 10:210] = True
    mi = moment_of_inertia(mask_of(bits))
    # discrete value (n^2 - 1) / (6 n^2) for an n x n block
    assert mi == pytest.approx((200**2 - 1) / (6 * 200**2), rel=1e-15)
    assert abs(mi - 1 / 6) < 1e-3


@pytest.mark.parametrize("shape", [disc, ell])
def test_scale_invariance(shape):
    small = shape(64)
    big = np.kron(shape(64), np.ones((2, 2), bool))
    assert abs(moment_of_inertia(mask_of(small)) - moment_of_inertia(mask_of(big))) < 1e-2


@given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(0, 20))
def test_translation_exact(seed, dx, dy):
    rng = np.random.default_rng(seed)
    blob = rng.random((12, 10)) < 0.4
    blob[0, 0] = True
    a = np.zeros((40, 40), bool)
    b = np.zeros((40, 40), bool)
    a[:12, :10] = blob
    b[dy : dy + 12, dx : dx + 10] = blob
    ma, mb = mask_of(a), mask_of(b)
    assert moment_of_inertia(ma) == moment_of_inertia(mb)
    for p, q in ((2, 0), (0, 2), (1, 1), (0, 0)):
        assert central_moment(ma, p, q) == central_moment(mb, p, q)


@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 40))
def test_matches_naive_oracle(seed, h, w):
    bits = np.random.default_rng(seed).random((h, w)) < 0.35
    ref = naive_moments(bits)
    m = mask_of(bits)
    for (p, q), v in ref["m"].items():
        assert raw_moment(m, p, q) == pytest.approx(v, rel=1e-12, abs=0)
    if ref["m"][0, 0]:
        ms = moment_set(m)
        assert ms.mu00 == ms.m00
        assert ms.xc == pytest.approx(ref["xc"], rel=1e-12)
        assert ms.mu20 == pytest.approx(ref["mu20"], rel=1e-12, abs=1e-9)
        assert ms.mu02 == pytest.approx(ref["mu02"], rel=1e-12, abs=1e-9)
        assert central_moment(m, 1, 1) == pytest.approx(ref["mu11"], rel=1e-12, abs=1e-9)
        mi = moment_of_inertia(m)
        assert mi == pytest.approx(ref["mi"], rel=1e-12, abs=1e-15)
        assert mi >= 0 and np.isfinite(mi)


def test_extract_features_empty_and_full():
    lay = layout_for_crop(100, 100)
    assert extract_features(mask_of(np.zeros((100, 100))), lay) == FeatureVector(0.0, 0.0, True)
    fv = extract_features(mask_of(np.ones((100, 100))), lay)
    assert fv.ph == 0.125 and not fv.empty
    assert fv.mi == pytest.approx((100**2 - 1) / (6 * 100**2))
    np.testing.assert_array_equal(fv.as_array(), [fv.ph, fv.mi])
