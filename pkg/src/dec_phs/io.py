"""Mesh JSON, matrix dumps and minimal SVG line plots."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.io
import scipy.sparse as sp

from .complex import SimplicialComplex, build_complex
from .errors import ConfigError


def _reject_constant(name: str):
    raise ConfigError(f"non-finite number {name} is not allowed")


def loads_strict(text: str):
    """Parse JSON, rejecting NaN/Infinity literals and trailing data."""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    data = loads_strict(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def mesh_from_dict(data: Mapping) -> SimplicialComplex:
    for key in ("dimension", "vertices", "simplices"):
        if key not in data:
            raise ConfigError(f"mesh is missing {key!r}")
    dim = data["dimension"]
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError("mesh dimension must be a positive integer")
    try:
        verts = np.array(data["vertices"], dtype=float)
        simplices = [tuple(int(v) for v in s) for s in data["simplices"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed mesh arrays: {exc}") from exc
    if verts.ndim == 1:
        verts = verts.reshape(-1, 1)
    if verts.ndim != 2 or verts.shape[1] != dim:
        raise ConfigError(f"vertices must be {dim}-dimensional points")
    if not np.all(np.isfinite(verts)):
        raise ConfigError("vertex coordinates must be finite")
    if any(len(s) != dim + 1 for s in simplices):
        raise ConfigError(f"every simplex needs {dim + 1} vertices")
    faces = data.get("oriented_faces")
    return build_complex(verts, simplices, faces)


def load_mesh(path) -> SimplicialComplex:
    return mesh_from_dict(load_json(path))


def mesh_to_dict(K: SimplicialComplex) -> dict:
    top = [list(K.simplex(K.n, i).oriented_vertices()) for i in range(K.count(K.n))]
    faces = [
        list(K.simplex(k, i).oriented_vertices())
        for k in range(1, K.n)
        for i in range(K.count(k))
        if K.orientation[k][i] < 0
    ]
    out = {"dimension": K.n, "vertices": K.vertices.tolist(), "simplices": top}
    if faces:
        out["oriented_faces"] = faces
    return out


def write_mesh(path, K: SimplicialComplex) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(K), indent=1) + "\n")


def dump_matrix(path, matrix, comment: str = "") -> None:
    """MatrixMarket coordinate text."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), comment=comment)


# ------------------------------------------------------------------- svg

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def svg_line_plot(t: np.ndarray, series: Mapping[str, np.ndarray], title: str = "", width: int = 720, height: int = 420) -> str:
    """Static line plot of several series sharing one time axis."""
    t = np.asarray(t, dtype=float)
    stride = max(1, len(t) // 2000)
    idx = np.arange(0, len(t), stride)
    if idx[-1] != len(t) - 1:
        idx = np.append(idx, len(t) - 1)
    left, right, top, bottom = 70, 160, 30, 40
    pw, ph = width - left - right, height - top - bottom
    values = [np.asarray(v, dtype=float)[idx] for v in series.values()]
    finite = np.concatenate([v[np.isfinite(v)] for v in values]) if values else np.zeros(1)
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if math.isclose(lo, hi):
        lo, hi = lo - 1.0, hi + 1.0
    t0, t1 = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

    def sx(v):
        return left + (v - t0) / (t1 - t0) * pw

    def sy(v):
        return top + (hi - v) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="18" font-family="sans-serif" font-size="13">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        yv = lo + frac * (hi - lo)
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" font-family="sans-serif" font-size="10" text-anchor="end">{_fmt(yv)}</text>')
        tv = t0 + frac * (t1 - t0)
        out.append(f'<text x="{sx(tv):.1f}" y="{top + ph + 16}" font-family="sans-serif" font-size="10" text-anchor="middle">{_fmt(tv)}</text>')
    for i, (name, v) in enumerate(zip(series.keys(), values)):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t[idx], v) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        ly = top + 14 * (i + 1)
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 28}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 32}" y="{ly}" font-family="sans-serif" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
