#!/usr/bin/env python3
# Copyright 2026 The PixelRL Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Regenerates tests/data/desk from scikit-image's bundled sample images
# (public domain or CC0). Train and test patches come from disjoint photos.
#   python3 tools/make_desk_data.py tests/data/desk
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import data, transform

PATCH = 128
TRAIN = {"camera": 3, "coffee": 3, "chelsea": 3, "astronaut": 3,
         "coins": 2, "brick": 2, "gravel": 2, "grass": 2}
TEST = {"rocket": 3, "text": 2, "immunohistochemistry": 2, "retina": 1}


def gray(name):
    img = getattr(data, name)().astype(np.float64)
    if img.ndim == 3:
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    img /= 255.0
    # Halve large photos so a crop holds scene structure, not flat regions.
    if min(img.shape) >= 400:
        img = transform.rescale(img, 0.5, anti_aliasing=True)
    return img


def write(out, plan, rng):
    out.mkdir(parents=True, exist_ok=True)
    for name, count in plan.items():
        img = gray(name)
        for k in range(count):
            y = rng.integers(0, img.shape[0] - PATCH + 1)
            x = rng.integers(0, img.shape[1] - PATCH + 1)
            patch = np.clip(img[y:y + PATCH, x:x + PATCH] * 255.0 + 0.5, 0, 255)
            Image.fromarray(patch.astype(np.uint8)).save(out / f"{name}_{k}.png")


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/desk")
    rng = np.random.default_rng(2024)
    write(root / "train", TRAIN, rng)
    write(root / "test", TEST, rng)


if __name__ == "__main__":
    main()
