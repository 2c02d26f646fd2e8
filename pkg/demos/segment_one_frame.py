"""
From a frame to two numbers
===========================

Builds one synthetic driver frame with a hand raised to the ear, then walks
it through the per-frame chain: face box expansion, region layout, skin
segmentation and the two features the classifier sees.

Run:  python demos/segment_one_frame.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from phonewatch.features import extract_features
from phonewatch.imaging import write_pbm, write_ppm
from phonewatch.roi import Rect, crop, expand_face, layout_for_crop
from phonewatch.segmentation import segment_skin
from phonewatch.synthetic import SceneParams, generate_synthetic_scene

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

#############################################################################
# A 200x140 frame, face box from a (pretend) detector, hand on the left.
params = SceneParams(width=200, height=140, face=Rect(60, 20, 64, 84), hand=True,
                     hand_side=1, hand_fill=0.8, noise=3.0, seed=7)
scene = generate_synthetic_scene(params)
write_ppm(out / "frame.ppm", scene.frame)

#############################################################################
# The face box grows sideways and downwards; the crop carries two hand
# regions in its bottom corners and a skin sample on the cheek.
region = expand_face(scene.face, scene.frame.width, scene.frame.height)
layout = layout_for_crop(region.w, region.h)
print("face box  ", scene.face)
print("crop      ", region)
print("skin patch", layout.skin_sample)
print("hand 1    ", layout.hand_region_1)
print("hand 2    ", layout.hand_region_2)

#############################################################################
# Pixels whose colour is common in the sample patch, in both HSV and YCrCb,
# count as skin.
mask = segment_skin(crop(scene.frame, region), layout)
write_pbm(out / "mask.pbm", mask.bits)
agreement = (mask.bits == scene.crop_truth).mean()
print(f"mask agrees with ground truth on {agreement:.1%} of pixels")

#############################################################################
# PH: skin share of the hand regions.  MI: spread of the whole skin mask.
features = extract_features(mask, layout)
print(f"PH = {features.ph:.4f}   MI = {features.mi:.6f}")

# the same face without the hand
bare = generate_synthetic_scene(SceneParams(**{**params.__dict__, "hand": False}))
bare_mask = segment_skin(crop(bare.frame, region), layout)
bare_features = extract_features(bare_mask, layout)
print(f"no hand: PH = {bare_features.ph:.4f}   MI = {bare_features.mi:.6f}")
assert bare_features.ph < features.ph and np.isfinite(features.mi)
