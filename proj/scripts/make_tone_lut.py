#!/usr/bin/env python3
"""Regenerates the mock stylizer's tone-curve LUT (data/tone_lut.csv and the
compiled table core/src/tone_lut_table.inc). The curve is a gentle filmic
S-curve with a warm bias: red lifted, blue pulled down."""
import math
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent


def curve(x, contrast, lift, gamma):
    s = 1.0 / (1.0 + math.exp(-contrast * (x - 0.5)))
    lo = 1.0 / (1.0 + math.exp(contrast * 0.5))
    hi = 1.0 / (1.0 + math.exp(-contrast * 0.5))
    s = (s - lo) / (hi - lo)
    return min(1.0, max(0.0, lift + (1.0 - lift) * s ** gamma))


CHANNELS = [
    (5.0, 0.03, 0.92),  # red
    (5.0, 0.02, 1.00),  # green
    (5.5, 0.00, 1.10),  # blue
]

rows = []
for contrast, lift, gamma in CHANNELS:
    rows.append([int(math.floor(255.0 * curve(v / 255.0, contrast, lift, gamma) + 0.5)) for v in range(256)])

(ROOT / "data" / "tone_lut.csv").write_text(
    "# channel,v0..v255 (RGB tone curve of the mock stylizer)\n"
    + "".join(f"{name}," + ",".join(map(str, row)) + "\n" for name, row in zip("rgb", rows)))

inc = ["// Generated by scripts/make_tone_lut.py; keep in sync with data/tone_lut.csv."]
for row in rows:
    inc.append("{" + ", ".join(map(str, row)) + "},")
(ROOT / "core" / "src" / "tone_lut_table.inc").write_text("\n".join(inc) + "\n")
