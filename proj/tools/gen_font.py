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

# Regenerates src/bitmap_font.inc from Pillow's built-in bitmap font.
#   python3 tools/gen_font.py > src/bitmap_font.inc
from PIL import ImageFont

font = ImageFont.load_default_imagefont()
WIDTH, HEIGHT = 6, 11

print("// Generated by tools/gen_font.py. Do not edit.")
print(f"constexpr int kGlyphWidth = {WIDTH};")
print(f"constexpr int kGlyphHeight = {HEIGHT};")
print("constexpr int kFirstGlyph = 32;")
print("constexpr int kLastGlyph = 126;")
print("// One row mask per line, bit (WIDTH-1-x) set when column x is inked.")
print("constexpr unsigned char kGlyphRows[kLastGlyph - kFirstGlyph + 1][kGlyphHeight] = {")
for code in range(32, 127):
    mask = font.getmask(chr(code))
    w, h = mask.size
    rows = []
    for y in range(HEIGHT):
        bits = 0
        for x in range(WIDTH):
            if x < w and y < h and mask.getpixel((x, y)) > 127:
                bits |= 1 << (WIDTH - 1 - x)
        rows.append(bits)
    label = chr(code).replace("\\", "backslash")
    print("    {" + ", ".join(f"0x{r:02x}" for r in rows) + "},  // " + label)
print("};")
