#!/usr/bin/env python3
"""Write data/default_track.json: a two-mile stadium course and its racing line.

Geometry matches drive::sim::make_stadium_track() and racing_line_heuristic()
with default arguments; tests compare the two.
"""
import json
import math
import pathlib

LENGTH = 3219.0
RADIUS = 200.0
HALF_WIDTH = 6.0
SPACING = 5.0
APEX_OFFSET = 3.0
BLEND = 60.0
ARROW_SPACING = 10.0


def stadium():
    straight = (LENGTH - 2.0 * math.pi * RADIUS) / 2.0
    arc = math.pi * RADIUS
    half = straight / 2.0

    def point_at(s):
        if s < half:
            return (s, -RADIUS)
        s -= half
        if s < arc:
            a = -math.pi / 2.0 + s / RADIUS
            return (half + RADIUS * math.cos(a), RADIUS * math.sin(a))
        s -= arc
        if s < straight:
            return (half - s, RADIUS)
        s -= straight
        if s < arc:
            a = math.pi / 2.0 + s / RADIUS
            return (-half + RADIUS * math.cos(a), RADIUS * math.sin(a))
        s -= arc
        return (-half + s, -RADIUS)

    n = math.ceil(LENGTH / SPACING)
    pts = [point_at(LENGTH * i / n) for i in range(n)]
    pts.append(pts[0])
    return pts


def racing_line(c):
    n = len(c) - 1
    total = sum(math.dist(c[i - 1], c[i]) for i in range(1, n + 1))

    def turn(i):
        px, py = c[(i + n - 1) % n]
        cx, cy = c[i % n]
        nx, ny = c[(i + 1) % n]
        ax, ay = cx - px, cy - py
        bx, by = nx - cx, ny - cy
        return math.atan2(ax * by - ay * bx, ax * bx + ay * by)

    bend = []
    for i in range(n):
        a = turn(i)
        bend.append((1.0 if a > 0 else -1.0) if abs(a) > 1e-4 else 0.0)
    step = total / n
    k = math.ceil(BLEND / step)
    win = [0.5 * (1.0 + math.cos(math.pi * j / (k + 1))) for j in range(-k, k + 1)]
    wsum = sum(win)
    out = []
    for i in range(n):
        w = sum(bend[(i + j) % n] * win[j + k] for j in range(-k, k + 1)) / wsum
        px, py = c[(i + n - 1) % n]
        nx, ny = c[i + 1]
        tx, ty = nx - px, ny - py
        norm = math.hypot(tx, ty)
        tx, ty = tx / norm, ty / norm
        out.append((c[i][0] - ty * APEX_OFFSET * w, c[i][1] + tx * APEX_OFFSET * w))
    out.append(out[0])
    return out


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    center = stadium()
    doc = {
        "units": "meters",
        "half_width": HALF_WIDTH,
        "start_line": [[0.0, -RADIUS - HALF_WIDTH], [0.0, -RADIUS + HALF_WIDTH]],
        "arrow_spacing": ARROW_SPACING,
        "centerline": [list(p) for p in center],
        "racing_line": [list(p) for p in racing_line(center)],
    }
    # One [x, y] pair per line keeps the file diffable.
    lines = ["{"]
    items = list(doc.items())
    for i, (key, value) in enumerate(items):
        sep = "," if i + 1 < len(items) else ""
        if key in ("centerline", "racing_line"):
            body = ",\n".join("  " + json.dumps([x, y]) for x, y in value)
            lines.append(f' "{key}": [\n{body}\n ]{sep}')
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(value)}{sep}")
    lines.append("}")
    (root / "data" / "default_track.json").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
