#!/usr/bin/env python3
"""Write tests/fixtures/eval/: a small elliptical course, four synthetic
sessions and the expected report computed here with numpy.

The scoring rules are reimplemented from scratch rather than calling the C++
library, so the CLI test compares two independent implementations.
"""
import json
import math
import pathlib

import numpy as np

A, B = 60.0, 40.0
HALF_WIDTH = 6.0
LINE_POINTS = 120
DT_NS = 50_000_000
AREA_SAMPLES = 200

# condition_id: (lateral amplitude m, lobes, phase, base speed m/s, speed swing m/s)
SESSIONS = {
    "A_01": (0.8, 3, 0.0, 11.0, 1.5),
    "A_02": (1.2, 2, 0.7, 12.0, 1.0),
    "B_01": (2.5, 3, 1.9, 10.0, 2.0),
    "B_02": (3.1, 4, 0.4, 12.5, 0.5),
}


def ellipse(theta, offset=0.0):
    x, y = A * np.cos(theta), B * np.sin(theta)
    nx, ny = B * np.cos(theta), A * np.sin(theta)  # outward normal, unnormalized
    n = np.hypot(nx, ny)
    return np.stack([x + offset * nx / n, y + offset * ny / n], axis=-1)


def drive(amp, lobes, phase, v0, dv):
    theta0 = -math.pi / 2
    theta = theta0 + 1.0 / A  # about one metre past the start line
    t, rows = 0, []
    while theta < theta0 + 4 * math.pi + 0.4:
        off = amp * math.sin(lobes * theta + phase)
        p = ellipse(np.array(theta), off)
        v = v0 + dv * math.cos(2 * theta)
        rows.append((t, float(p[0]), float(p[1]), v))
        h = 1e-6
        ds = np.linalg.norm(ellipse(np.array(theta + h), amp * math.sin(lobes * (theta + h) + phase)) - p) / h
        theta += v * DT_NS * 1e-9 / ds
        t += DT_NS
    return rows


def crossings(xy, a, b):
    d = b - a
    side = d[0] * (xy[:, 1] - a[1]) - d[1] * (xy[:, 0] - a[0])
    out = []
    for i in np.nonzero((side[:-1] > 0) & (side[1:] <= 0))[0]:
        t = side[i] / (side[i] - side[i + 1])
        hit = xy[i] + (xy[i + 1] - xy[i]) * t
        u = np.dot(hit - a, d) / np.dot(d, d)
        if 0 <= u <= 1:
            out.append(i + 1)
    return out


def frechet(p, q):
    dist = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=-1)
    ca = np.empty_like(dist)
    ca[0] = np.maximum.accumulate(dist[0])
    for i in range(1, len(p)):
        ca[i, 0] = max(ca[i - 1, 0], dist[i, 0])
        for j in range(1, len(q)):
            ca[i, j] = max(dist[i, j], min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1]))
    return float(ca[-1, -1])


def resample(p, n):
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(p, axis=0), axis=1))])
    s = cum[-1] * np.arange(n) / (n - 1)
    out = np.stack([np.interp(s, cum, p[:, 0]), np.interp(s, cum, p[:, 1])], axis=-1)
    out[-1] = p[-1]
    return out


def area(p, q, n):
    a, b = resample(p, n), resample(q, n)
    d1 = b[1:] - a[:-1]
    d2 = b[:-1] - a[1:]
    return math.fsum(0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "eval"
    (root / "sessions").mkdir(parents=True, exist_ok=True)

    theta = -math.pi / 2 + 2 * math.pi * np.arange(LINE_POINTS + 1) / LINE_POINTS
    line = ellipse(theta)
    line[-1] = line[0]
    start = np.array([[0.0, -B - HALF_WIDTH], [0.0, -B + HALF_WIDTH]])
    doc = {
        "units": "meters",
        "half_width": HALF_WIDTH,
        "start_line": start.tolist(),
        "racing_line": [[round(x, 9), round(y, 9)] for x, y in line.tolist()],
    }
    (root / "racing_line.json").write_text(json.dumps(doc, indent=1) + "\n")
    line = np.array(doc["racing_line"])

    per_condition = {}
    for name, params in SESSIONS.items():
        rows = drive(*params)
        text = "t_ns,x_m,y_m,speed_mps\n" + "".join(f"{t},{x:.9f},{y:.9f},{v:.9f}\n" for t, x, y, v in rows)
        (root / "sessions" / f"{name}.csv").write_text(text)

        data = np.array([[float(f) for f in r.split(",")] for r in text.splitlines()[1:]])
        xy, speed = data[:, 1:3], data[:, 3]
        c = crossings(xy, start[0], start[1])
        assert len(c) >= 2, name
        lap = slice(c[0], c[1] + 1)
        per_condition.setdefault(name.split("_")[0], []).append(
            (frechet(xy[lap], line), area(xy[lap], line, AREA_SAMPLES), float(np.mean(speed[lap] * 3.6))))

    lines = ["condition,metric,mean,std"]
    for cond in sorted(per_condition):
        values = np.array(per_condition[cond])
        for k, metric in enumerate(["frechet_m", "area_m2", "speed_kmh"]):
            lines.append(f"{cond},{metric},{values[:, k].mean():.6f},{values[:, k].std():.6f}")
    (root / "expected.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
