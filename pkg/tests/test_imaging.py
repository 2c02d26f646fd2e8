from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phonewatch.errors import InvalidInputError
from phonewatch.imaging import (ImageBuffer, QuantizedImage, quantize, read_pbm, read_ppm,
                                rgb_to_hsv, rgb_to_ycrcb, write_pbm, write_ppm)

rgb_triples = st.tuples(*[st.integers(0, 255)] * 3)


def _round_half_away(x: Fraction) -> int:
    mag = (2 * abs(x.numerator) + x.denominator) // (2 * x.denominator)
    return max(0, min(255, mag if x >= 0 else -mag))


def exact_hsv(r, g, b):
    mx, mn = max(r, g, b), min(r, g, b)
    d = mx - mn
    if d == 0:
        h = Fraction(0)
    elif mx == r:
        h = Fraction(g - b, d) % 6
    elif mx == g:
        h = Fraction(b - r, d) + 2
    else:
        h = Fraction(r - g, d) + 4
    s = Fraction(d, mx) if mx else Fraction(0)
    return (_round_half_away(h * 60 * Fraction(255, 360)), _round_half_away(s * 255), mx)


def exact_ycrcb(r, g, b):
    c = lambda v: Fraction(v).limit_denominator(10**6)
    y = c("0.299") * r + c("0.587") * g + c("0.114") * b
    cr = c("0.5") * r - c("0.418688") * g - c("0.081312") * b + 128
    cb = c("-0.168736") * r - c("0.331264") * g + c("0.5") * b + 128
    return tuple(_round_half_away(v) for v in (y, cr, cb))


def px(triple):
    return ImageBuffer(np.array([[triple]], dtype=np.uint8))


def test_hsv_examples():
    assert tuple(rgb_to_hsv(px((255, 0, 0))).pixels[0, 0]) == (0, 255, 255)
    assert tuple(rgb_to_hsv(px((0, 0, 0))).pixels[0, 0]) == (0, 0, 0)
    h, s, v = rgb_to_hsv(px((128, 128, 128))).pixels[0, 0]
    assert (s, v) == (0, 128)


def test_ycrcb_examples():
    assert tuple(rgb_to_ycrcb(px((255, 255, 255))).pixels[0, 0]) == (255, 128, 128)
    assert tuple(rgb_to_ycrcb(px((0, 0, 0))).pixels[0, 0]) == (0, 128, 128)
    # Y = 76.245, Cr = 255.5 clamps to 255, Cb = 84.97
    assert tuple(rgb_to_ycrcb(px((255, 0, 0))).pixels[0, 0]) == (76, 255, 85)


def test_ties_round_away_from_zero():
    # Y of (0, 36, 12) is exactly 22.5
    assert rgb_to_ycrcb(px((0, 36, 12))).pixels[0, 0, 0] == 23
    ties = []
    for r in range(0, 60):
        for g in range(0, 60, 3):
            b = 0
            if r > g and r - b:
                num, den = 255 * (g - b), 6 * (r - b)
                if (2 * num) % (2 * den) == den:
                    ties.append((r, g, b))
    assert ties
    for t in ties:
        assert tuple(rgb_to_hsv(px(t)).pixels[0, 0]) == exact_hsv(*t)


def test_conversions_match_rational_oracle(rng):
    sample = rng.integers(0, 256, size=(3000, 3))
    # greys, primaries and near-ties between channels
    extra = [(v, v, v) for v in range(0, 256, 17)] + [(255, 255, 0), (0, 255, 255), (255, 0, 255),
                                                      (200, 200, 10), (10, 200, 200), (7, 8, 7)]
    triples = [tuple(int(c) for c in t) for t in sample] + extra
    img = ImageBuffer(np.array([triples], dtype=np.uint8))
    hsv = rgb_to_hsv(img).pixels[0]
    ycc = rgb_to_ycrcb(img).pixels[0]
    for i, t in enumerate(triples):
        assert tuple(int(v) for v in hsv[i]) == exact_hsv(*t), t
        assert tuple(int(v) for v in ycc[i]) == exact_ycrcb(*t), t


def test_range_million_samples():
    rng = np.random.default_rng(7)
    img = ImageBuffer(rng.integers(0, 256, size=(1000, 1000, 3), dtype=np.uint8))
    for out in (rgb_to_hsv(img), rgb_to_ycrcb(img)):
        assert out.pixels.dtype == np.uint8
        assert out.pixels.shape == (1000, 1000, 3)


@given(st.lists(rgb_triples, min_size=1, max_size=30))
def test_conversions_pure(triples):
    arr = np.array([triples], dtype=np.uint8)
    before = arr.copy()
    img = ImageBuffer(arr)
    assert rgb_to_hsv(img) == rgb_to_hsv(img)
    assert rgb_to_ycrcb(img) == rgb_to_ycrcb(img)
    np.testing.assert_array_equal(arr, before)
    np.testing.assert_array_equal(img.pixels, before)


def test_quantize_boundaries():
    img = ImageBuffer(np.array([[[0, 31, 32], [255, 64, 96]]], dtype=np.uint8))
    cells = quantize(img).cells
    assert cells[0, 0].tolist() == [0, 0, 1]
    assert cells[0, 1].tolist() == [7, 2, 3]
    uniform = quantize(ImageBuffer.filled(5, 4, (64, 96, 200))).cells
    assert (uniform.reshape(-1, 3) == [2, 3, 6]).all()


def test_quantize_idempotent_and_bounded():
    v = np.arange(256)
    q = v // 32
    assert np.array_equal((q * 32) // 32, q)
    img = ImageBuffer(np.stack([np.tile(v, (1, 1))] * 3, axis=2).astype(np.uint8))
    cells = quantize(img).cells
    assert cells.min() == 0 and cells.max() == 7
    codes = quantize(img).codes()
    assert codes.max() < 512


def test_buffer_validation():
    with pytest.raises(InvalidInputError):
        ImageBuffer(np.zeros((0, 3, 3), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        ImageBuffer(np.zeros((2, 3), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        ImageBuffer(np.full((2, 2, 3), 300))
    img = ImageBuffer.filled(4, 3, (1, 2, 3))
    assert (img.width, img.height) == (4, 3)
    assert isinstance(quantize(img), QuantizedImage)


def test_buffer_does_not_alias_caller_array():
    arr = np.zeros((2, 2, 3), dtype=np.uint8)
    img = ImageBuffer(arr)
    arr[0, 0, 0] = 9
    assert img.pixels[0, 0, 0] == 0
    assert arr.flags.writeable


def test_ppm_round_trip(tmp_path, rng):
    img = ImageBuffer(rng.integers(0, 256, size=(7, 11, 3), dtype=np.uint8))
    write_ppm(tmp_path / "a.ppm", img)
    assert read_ppm(tmp_path / "a.ppm") == img


def test_ppm_header_comments(tmp_path):
    data = b"P6\n# comment\n2 1\n# another\n255\n" + bytes([1, 2, 3, 4, 5, 6])
    (tmp_path / "c.ppm").write_bytes(data)
    img = read_ppm(tmp_path / "c.ppm")
    assert img.pixels.tolist() == [[[1, 2, 3], [4, 5, 6]]]


@pytest.mark.parametrize("data", [b"P3\n1 1\n255\n1 2 3", b"P6\n1 1\n65535\n" + bytes(6),
                                  b"P6\n2 2\n255\n" + bytes(5)])
def test_ppm_rejects_unsupported(tmp_path, data):
    (tmp_path / "bad.ppm").write_bytes(data)
    with pytest.raises(InvalidInputError):
        read_ppm(tmp_path / "bad.ppm")


@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_pbm_round_trip(tmp_path_factory, w, h, seed):
    bits = np.random.default_rng(seed).random((h, w)) < 0.5
    path = tmp_path_factory.mktemp("pbm") / "m.pbm"
    write_pbm(path, bits)
    np.testing.assert_array_equal(read_pbm(path), bits)
