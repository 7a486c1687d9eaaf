"""CSV and JSON serialization of point sets, terrains and reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json

import numpy as np

from .geometry import LinearPatch, PLTerrain, WeightedPointSet


def _fmt(x):
    return "%.17g" % x


def points_to_csv(P, with_weights=None):
    """Render a point set as CSV text, one ``coords[,weight]`` row per point."""
    if with_weights is None:
        with_weights = not np.all(P.weights == 1.0)
    buf = io.StringIO()
    for p, w in zip(P.points, P.weights):
        row = [_fmt(c) for c in p]
        if with_weights:
            row.append(_fmt(w))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_points_csv(path, P, with_weights=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(points_to_csv(P, with_weights))


def parse_points_csv(text, dim=2):
    """Parse ``x,y[,weight]`` rows (``dim`` coordinates); a header row is skipped."""
    pts, ws = [], []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            vals = [float(c) for c in row]
        except ValueError:
            if k == 0:
                continue
            raise ValueError(f"bad CSV row {k + 1}: {row!r}")
        if len(vals) == dim:
            vals.append(1.0)
        if len(vals) != dim + 1:
            raise ValueError(f"row {k + 1} has {len(vals)} fields, expected {dim} or {dim + 1}")
        pts.append(vals[:dim])
        ws.append(vals[dim])
    return WeightedPointSet(np.array(pts, dtype=np.float64).reshape(-1, dim), ws, dim=dim)


def read_points_csv(path, dim=2):
    with open(path, encoding="utf-8") as fh:
        return parse_points_csv(fh.read(), dim)


def load_terrain_json(path_or_obj):
    """Terrain from ``{"vertices": [[x,y,z],...], "triangles": [[i,j,k],...]}``."""
    obj = path_or_obj
    if not isinstance(obj, dict):
        with open(obj, encoding="utf-8") as fh:
            obj = json.load(fh)
    return PLTerrain.from_mesh(obj["vertices"], obj["triangles"])


def load_patch_json(path_or_obj):
    """Patch from ``{"lo": [x,y], "hi": [x,y], "coeffs": [a,b,c]}``."""
    obj = path_or_obj
    if not isinstance(obj, dict):
        with open(obj, encoding="utf-8") as fh:
            obj = json.load(fh)
    from .geometry import AxisRect
    return LinearPatch(AxisRect(obj["lo"], obj["hi"]), obj["coeffs"])


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj):
    return json.dumps(obj, default=_default, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
