"""Synthetic driver frames with exact ground truth.

A scene is a flat (optionally noisy) background, a skin-coloured face
ellipse inside the face box and, for positive scenes, a skin-coloured blob
inside one of the crop's bottom hand regions.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .imaging import ImageBuffer
from .roi import Rect, RoiLayout, expand_face, layout_for_crop

SKIN_TONES = (
    (224, 172, 140),
    (205, 150, 125),
    (190, 135, 105),
    (170, 115, 90),
    (141, 95, 70),
)
BACKGROUNDS = (
    (30, 40, 70),
    (20, 60, 50),
    (60, 60, 80),
    (10, 10, 10),
    (40, 80, 110),
)


@dataclass(frozen=True)
class SceneParams:
    width: int = 160
    height: int = 120
    face: Rect = Rect(50, 20, 60, 80)
    skin_rgb: tuple = SKIN_TONES[1]
    background_rgb: tuple = BACKGROUNDS[0]
    hand: bool = False
    hand_side: int = 1  # 1: bottom-left region, 2: bottom-right region
    hand_fill: float = 0.75  # target fraction of the hand region covered
    noise: float = 0.0  # Gaussian sigma in 8-bit levels
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Scene:
    frame: ImageBuffer
    face: Rect
    crop: Rect
    layout: RoiLayout
    truth: np.ndarray  # frame-sized bool mask of skin pixels
    label: int

    @property
    def crop_truth(self) -> np.ndarray:
        return self.truth[self.crop.slices()]


def _ellipse(h, w, cx, cy, ax, ay):
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx + 0.5 - cx) / ax) ** 2 + ((yy + 0.5 - cy) / ay) ** 2 <= 1.0


def _hand_blob(region: Rect, fill: float, offset_x: int, offset_y: int, h: int, w: int):
    """Ellipse centred in ``region`` grown until it covers ``fill`` of it."""
    cx = offset_x + region.x + region.w / 2
    cy = offset_y + region.y + region.h / 2
    target = fill * region.area
    rows = slice(offset_y + region.y, offset_y + region.bottom)
    cols = slice(offset_x + region.x, offset_x + region.right)
    scale = min(1.0, np.sqrt(fill / (np.pi / 4)))
    while True:
        blob = _ellipse(h, w, cx, cy, scale * region.w / 2, scale * region.h / 2)
        inside = np.zeros_like(blob)
        inside[rows, cols] = blob[rows, cols]
        if inside.sum() >= target or scale > 1.5:
            return inside
        scale *= 1.02


def generate_synthetic_scene(params: SceneParams) -> Scene:
    h, w = params.height, params.width
    face = params.face
    crop_rect = expand_face(face, w, h)
    layout = layout_for_crop(crop_rect.w, crop_rect.h)

    truth = _ellipse(h, w, face.x + face.w / 2, face.y + face.h / 2,
                     0.40 * face.w, 0.45 * face.h)
    if params.hand:
        region = layout.hand_region_1 if params.hand_side == 1 else layout.hand_region_2
        truth |= _hand_blob(region, params.hand_fill, crop_rect.x, crop_rect.y, h, w)

    img = np.empty((h, w, 3), dtype=np.float64)
    img[...] = params.background_rgb
    img[truth] = params.skin_rgb
    if params.noise > 0:
        rng = np.random.default_rng(params.seed)
        img += rng.normal(0.0, params.noise, size=img.shape)
    pixels = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    label = 1 if params.hand else -1
    return Scene(ImageBuffer(pixels), face, crop_rect, layout, truth, label)


def random_scene_params(rng: np.random.Generator, hand: bool, noise: float = 3.0,
                        width: int = 160, height: int = 120) -> SceneParams:
    fw = int(rng.integers(48, 66))
    fh = int(rng.integers(64, 84))
    fx = int(rng.integers(fw // 5 + 2, width - fw - fw // 5 - 2))
    fy = int(rng.integers(4, height - fh - 4))
    tone = np.array(SKIN_TONES[int(rng.integers(len(SKIN_TONES)))]) + rng.integers(-6, 7, 3)
    bg = BACKGROUNDS[int(rng.integers(len(BACKGROUNDS)))]
    return SceneParams(
        width=width, height=height, face=Rect(fx, fy, fw, fh),
        skin_rgb=tuple(int(c) for c in np.clip(tone, 0, 255)), background_rgb=bg,
        hand=hand, hand_side=int(rng.integers(1, 3)),
        hand_fill=float(rng.uniform(0.55, 0.95)), noise=noise,
        seed=int(rng.integers(2**31)),
    )


def make_dataset(n_pos: int = 100, n_neg: int = 100, seed: int = 0, noise: float = 3.0):
    """Balanced list of scenes: positives first, then negatives."""
    rng = np.random.default_rng(seed)
    params = [random_scene_params(rng, True, noise) for _ in range(n_pos)]
    params += [random_scene_params(rng, False, noise) for _ in range(n_neg)]
    return [generate_synthetic_scene(p) for p in params]


@dataclass(frozen=True, eq=False)
class SequenceFrame:
    scene: Scene | None  # None when the driver is out of view
    timestamp: float
    label: int


def make_sequence(duration: float = 60.0, fps: float = 15.0, seed: int = 0,
                  segment: float = 9.0, dropout: float = 0.05, confusion: float = 0.1,
                  noise: float = 3.0):
    """A pseudo-video: alternating phone / no-phone segments of ``segment`` seconds.

    Each frame jitters the face box by a pixel or two.  With probability
    ``dropout`` a frame has no detectable face; with probability
    ``confusion`` the hand state disagrees with the segment label (hand
    briefly lowered, or raised without a phone).
    """
    rng = np.random.default_rng(seed)
    base_neg = random_scene_params(rng, False, noise)
    frames = []
    n = int(round(duration * fps))
    for i in range(n):
        t = i / fps
        phone = int(t // segment) % 2 == 1
        if rng.random() < dropout:
            frames.append(SequenceFrame(None, t, 1 if phone else -1))
            continue
        f = base_neg.face
        jitter = rng.integers(-2, 3, size=2)
        face = Rect(int(np.clip(f.x + jitter[0], 0, base_neg.width - f.w)),
                    int(np.clip(f.y + jitter[1], 0, base_neg.height - f.h)), f.w, f.h)
        hand = phone != (rng.random() < confusion)
        p = replace(base_neg, face=face, hand=hand, seed=int(rng.integers(2**31)))
        frames.append(SequenceFrame(generate_synthetic_scene(p), t, 1 if phone else -1))
    return frames
