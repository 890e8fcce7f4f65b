"""Plain SVG and CSV writers for the ``--plot`` option."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .geom import orthonormal_basis

_HEAD = ('<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
         'viewBox="0 0 {w} {h}">\n<rect width="100%" height="100%" fill="white"/>\n')


def _fit(points2d: np.ndarray, size: int, pad: int = 20):
    lo, hi = points2d.min(axis=0), points2d.max(axis=0)
    scale = (size - 2 * pad) / max(float((hi - lo).max()), 1e-12)

    def tx(p):
        return pad + (p[0] - lo[0]) * scale, size - pad - (p[1] - lo[1]) * scale
    return tx


def write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in r])
    return path


def count_profile_svg(path: Path, cells, events, title: str = "normal count along walk") -> Path:
    """Step plot of the total count against the walk parameter."""
    W, H, pad = 640, 320, 40
    top = max(c[2].total for c in cells) + 2
    x = lambda t: pad + t * (W - 2 * pad)
    y = lambda n: H - pad - n / top * (H - 2 * pad)
    parts = [_HEAD.format(w=W, h=H)]
    parts.append(f'<text x="{pad}" y="20" font-size="13">{title}</text>\n')
    parts.append(f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>\n')
    parts.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>\n')
    for n in range(0, top + 1, 2):
        parts.append(f'<text x="8" y="{y(n) + 4:.1f}" font-size="10">{n}</text>\n')
    for lo, hi, c in cells:
        parts.append(f'<line x1="{x(lo):.2f}" y1="{y(c.total):.2f}" x2="{x(hi):.2f}" '
                     f'y2="{y(c.total):.2f}" stroke="black" stroke-width="2"/>\n')
    for e in events:
        parts.append(f'<line x1="{x(e.t):.2f}" y1="{pad}" x2="{x(e.t):.2f}" y2="{H - pad}" '
                     f'stroke="{e.color}" stroke-dasharray="3,3"/>\n')
    parts.append("</svg>\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(parts))
    return path


def spherical_chart_svg(path: Path, vertices: np.ndarray, marks=(), title: str = "") -> Path:
    """Gnomonic chart of a spherical polygon centred on its vertex mean."""
    V = np.asarray(vertices, dtype=float)
    c = V.sum(axis=0)
    c /= np.linalg.norm(c)
    u, w = orthonormal_basis(c)

    def chart(X):
        X = np.atleast_2d(X)
        d = X @ c
        return np.c_[(X @ u) / d, (X @ w) / d]

    pts = chart(V)
    size = 400
    tx = _fit(pts, size)
    parts = [_HEAD.format(w=size, h=size)]
    if title:
        parts.append(f'<text x="8" y="16" font-size="12">{title}</text>\n')
    poly = " ".join(f"{a:.2f},{b:.2f}" for a, b in map(tx, pts))
    parts.append(f'<polygon points="{poly}" fill="#eef" stroke="black"/>\n')
    for X in marks:
        if X is None or float(np.asarray(X) @ c) <= 0:
            continue
        a, b = tx(chart(X)[0])
        parts.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="4" fill="red"/>\n')
    parts.append("</svg>\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(parts))
    return path


def sheet_section_svg(path: Path, P, sheets, height: float | None = None) -> Path:
    """Cross-section of the polytope and its sheets by a horizontal plane."""
    z = float(P.centroid[2]) if height is None else height
    segs = []
    outline = []
    for f, (n, off) in enumerate(zip(P.face_normals, P.face_offsets)):
        seg = _section_of_polygon(P.vertices[list(P.faces[f].vertices)], z)
        if seg is not None:
            outline.append(seg)
    for s in sheets:
        if s.is_empty:
            continue
        seg = _section_of_polygon(s.region, z)
        if seg is not None:
            segs.append((s.color, seg))
    size = 480
    allp = np.vstack([np.vstack(outline)[:, :2]] + [sg[:, :2] for _, sg in segs]) if outline else np.zeros((1, 2))
    tx = _fit(allp, size)
    parts = [_HEAD.format(w=size, h=size), f'<text x="8" y="16" font-size="12">section z = {z:.4g}</text>\n']
    for seg in outline:
        (a, b), (c, d) = tx(seg[0]), tx(seg[1])
        parts.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}" stroke="black" stroke-width="2"/>\n')
    for color, seg in segs:
        (a, b), (c, d) = tx(seg[0]), tx(seg[1])
        parts.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}" stroke="{color}"/>\n')
    parts.append("</svg>\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(parts))
    return path


def _section_of_polygon(poly: np.ndarray, z: float) -> np.ndarray | None:
    pts = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        dp, dq = p[2] - z, q[2] - z
        if dp == 0:
            pts.append(p)
        elif dp * dq < 0:
            pts.append(p + dp / (dp - dq) * (q - p))
    if len(pts) < 2:
        return None
    return np.array(pts[:2])
