"""Artifact writers: CSV, versioned JSON, and the limit-set SVG.

Floats are written with 17 significant digits so reruns compare byte for
byte.  JSON has sorted keys, a ``schema_version`` field, and ``null`` in
place of non-finite numbers.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .groups import OrbitBall, annuli_counts, apply_arrays
from .measures import MeasureHistogram

SCHEMA_VERSION = "1.0"
SVG_MAX_DOTS = 4000


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, enum.Enum):
        return _clean(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    doc = {"schema_version": SCHEMA_VERSION, **_clean(payload)}
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def word_strings(ball: OrbitBall) -> list[str]:
    """Space-separated signed letters per element; the identity is the empty string."""
    cache: dict[int, str] = {0: ""}
    parent, letter = ball.node_parent, ball.node_letter
    out = []
    for node in ball.nodes.tolist():
        chain = []
        k = node
        while k not in cache:
            chain.append(k)
            k = int(parent[k])
        s = cache[k]
        for j in reversed(chain):
            s = f"{s} {int(letter[j])}" if s else str(int(letter[j]))
            cache[j] = s
        out.append(s)
    return out


def write_orbit_csv(path: str | Path, ball: OrbitBall) -> Path:
    z = ball.points()
    m = ball.matrices
    words = word_strings(ball)
    rows = ((i, words[i], m[i, 0], m[i, 1], m[i, 2], m[i, 3], z[i].real, z[i].imag, ball.distances[i])
            for i in range(len(ball)))
    return write_csv(path, ["index", "word", "a", "b", "c", "d", "re", "im", "distance"], rows)


def write_annuli_csv(path: str | Path, ball: OrbitBall) -> Path:
    a = annuli_counts(ball)
    return write_csv(path, ["n", "a_n"], enumerate(a.tolist()))


def write_histogram_csv(path: str | Path, mu: MeasureHistogram) -> Path:
    return write_csv(path, ["bin", "center", "weight"], mu.csv_rows())


def write_records_csv(path: str | Path, records) -> Path:
    rows = [r.csv_row() for r in records]
    header = list(rows[0]) if rows else ["index"]
    return write_csv(path, header, ([row[h] for h in header] for row in rows))


def limitset_svg(mu: MeasureHistogram, ball: OrbitBall, size: int = 640,
                 max_dots: int = SVG_MAX_DOTS) -> str:
    """Unit circle with radial bars for bin mass and the outermost orbit points as dots."""
    c = size / 2
    R = 0.8 * c
    bar = 0.18 * c
    f = lambda x: "%.2f" % x
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<circle cx="{f(c)}" cy="{f(c)}" r="{f(R)}" fill="none" stroke="#444" stroke-width="1"/>',
    ]
    wmax = float(mu.weights.max()) if mu.bins and mu.weights.max() > 0 else 1.0
    parts.append('<g stroke="#c0392b" stroke-width="1.5">')
    for k in np.flatnonzero(mu.weights > 0):
        t = mu.centers[k]
        h = bar * (mu.weights[k] / wmax)
        x0, y0 = c + R * math.cos(t), c - R * math.sin(t)
        x1, y1 = c + (R + h) * math.cos(t), c - (R + h) * math.sin(t)
        parts.append(f'<line x1="{f(x0)}" y1="{f(y0)}" x2="{f(x1)}" y2="{f(y1)}"/>')
    parts.append("</g>")
    z = apply_arrays(ball.matrices[-max_dots:], ball.base_q.z)
    parts.append('<g fill="#1f4e79">')
    for w in z:
        parts.append(f'<circle cx="{f(c + R * w.real)}" cy="{f(c - R * w.imag)}" r="1.2"/>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
