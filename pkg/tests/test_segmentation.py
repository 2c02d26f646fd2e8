import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import naive_skin_mask
from phonewatch.errors import InvalidInputError
from phonewatch.imaging import ImageBuffer, quantize, rgb_to_hsv, rgb_to_ycrcb
from phonewatch.roi import Rect, layout_for_crop
from phonewatch.segmentation import (SkinMask, build_histogram, combine, segment_skin,
                                     threshold_mask)
from phonewatch.synthetic import SceneParams, generate_synthetic_scene


def q_of(cells):
    return quantize(ImageBuffer(np.asarray(cells, dtype=np.uint8) * 32))


def test_histogram_uniform():
    q = q_of(np.broadcast_to([2, 3, 6], (30, 30, 3)))
    hist = build_histogram(q, Rect(5, 5, 20, 20))
    assert hist.counts[2, 3, 6] == 400 and hist.counts.sum() == 400 == hist.total


def test_histogram_two_colours():
    cells = np.zeros((20, 20, 3), dtype=np.uint8)
    cells[:15] = [1, 1, 1]
    cells[15:] = [4, 0, 7]
    hist = build_histogram(q_of(cells), Rect(0, 0, 20, 20))
    assert hist.counts[1, 1, 1] == 300 and hist.counts[4, 0, 7] == 100
    assert np.count_nonzero(hist.counts) == 2


def test_histogram_rejects_bad_sample():
    q = q_of(np.zeros((4, 4, 3)))
    for r in (Rect(0, 0, 0, 2), Rect(3, 3, 2, 2)):
        with pytest.raises(InvalidInputError):
            build_histogram(q, r)


def test_threshold_inclusive_at_five_percent():
    # 20x10 sample: 10 pixels (exactly 5%) of colour A, 9 of colour B, rest C
    cells = np.zeros((10, 20, 3), dtype=np.uint8)
    cells.reshape(-1, 3)[:10] = [1, 0, 0]
    cells.reshape(-1, 3)[10:19] = [2, 0, 0]
    q = q_of(cells)
    hist = build_histogram(q, Rect(0, 0, 20, 10))
    mask = threshold_mask(q, hist, 0.05)
    flat = mask.bits.reshape(-1)
    assert flat[:10].all()
    assert not flat[10:19].any()
    assert flat[19:].all()


def test_threshold_unseen_colour_false():
    cells = np.zeros((4, 4, 3), dtype=np.uint8)
    cells[3, 3] = [7, 7, 7]
    q = q_of(cells)
    mask = threshold_mask(q, build_histogram(q, Rect(0, 0, 2, 2)), 0.05)
    assert not mask.bits[3, 3] and mask.bits[0, 0]


def test_combine_examples():
    t = SkinMask(np.ones((3, 4), bool))
    f = SkinMask(np.zeros((3, 4), bool))
    assert combine(t, t) == t
    assert combine(t, f) == f and combine(f, t) == f
    with pytest.raises(InvalidInputError):
        combine(t, SkinMask(np.ones((4, 3), bool)))


@given(st.integers(0, 2**32 - 1))
def test_combine_properties(seed):
    rng = np.random.default_rng(seed)
    a = SkinMask(rng.random((6, 7)) < 0.5)
    b = SkinMask(rng.random((6, 7)) < 0.5)
    c = combine(a, b)
    assert c == combine(b, a)
    assert not (c.bits & ~a.bits).any() and not (c.bits & ~b.bits).any()


def test_uniform_crop_all_true():
    img = ImageBuffer.filled(40, 30, (200, 150, 120))
    mask = segment_skin(img, layout_for_crop(40, 30))
    assert mask.bits.all()


def test_two_colour_crop():
    # colour A fills the sample band, far colour B elsewhere
    lay = layout_for_crop(50, 40)
    px = np.empty((40, 50, 3), dtype=np.uint8)
    px[...] = (20, 60, 200)
    s = lay.skin_sample
    px[s.slices()] = (210, 160, 130)
    mask = segment_skin(ImageBuffer(px), lay)
    expected = np.zeros((40, 50), bool)
    expected[s.slices()] = True
    np.testing.assert_array_equal(mask.bits, expected)


def test_noise_free_ellipse_matches_truth():
    p = SceneParams(background_rgb=(0, 0, 0), noise=0.0)
    scene = generate_synthetic_scene(p)
    crop_px = ImageBuffer(scene.frame.pixels[scene.crop.slices()])
    mask = segment_skin(crop_px, scene.layout)
    np.testing.assert_array_equal(mask.bits, scene.crop_truth)


def test_sample_band_uniform_is_fully_true(rng):
    lay = layout_for_crop(32, 32)
    px = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    px[lay.skin_sample.slices()] = (180, 120, 90)
    mask = segment_skin(ImageBuffer(px), lay)
    assert mask.bits[lay.skin_sample.slices()].all()


def _naive(px, lay, frac=0.05):
    img = ImageBuffer(px)
    return naive_skin_mask(quantize(rgb_to_hsv(img)).cells, quantize(rgb_to_ycrcb(img)).cells,
                           lay.skin_sample, frac)


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.05, 0.2, 0.5]))
def test_matches_naive_oracle(seed, frac):
    rng = np.random.default_rng(seed)
    # a few dominant colours so the threshold actually bites
    palette = rng.integers(0, 256, size=(4, 3))
    px = palette[rng.integers(0, 4, size=(16, 16))]
    px = np.clip(px + rng.integers(-20, 21, size=px.shape), 0, 255).astype(np.uint8)
    lay = layout_for_crop(16, 16)
    mask = segment_skin(ImageBuffer(px), lay, frac)
    np.testing.assert_array_equal(mask.bits, _naive(px, lay, frac))


def test_deterministic(rng):
    px = ImageBuffer(rng.integers(0, 256, size=(20, 24, 3), dtype=np.uint8))
    lay = layout_for_crop(24, 20)
    assert segment_skin(px, lay) == segment_skin(px, lay)


def test_layout_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        segment_skin(ImageBuffer.filled(20, 20, (1, 2, 3)), layout_for_crop(30, 20))
