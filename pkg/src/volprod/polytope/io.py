"""JSON body format.

Either ``{"n": 2, "vertices": [[x, y], ...]}`` or
``{"n": 2, "halfspaces": [{"a": [..], "b": 1.0}, ...], "witness": [..]}``.
Floats are written with Python's shortest round-trip repr (17 significant
digits at most, never fewer than needed to reproduce the double).
"""
from __future__ import annotations

import json

import numpy as np

from .core import Halfspace, Polytope
from .hull import convex_hull, halfspace_intersection


def body_from_dict(data) -> Polytope:
    if not isinstance(data, dict) or "n" not in data:
        raise ValueError("body JSON must be an object with key 'n'")
    n = int(data["n"])
    if "vertices" in data:
        V = np.asarray(data["vertices"], dtype=float)
        if V.ndim != 2 or V.shape[1] != n:
            raise ValueError(f"vertices must be a list of length-{n} lists")
        return convex_hull(V)
    if "halfspaces" in data:
        hs = [Halfspace(np.asarray(h["a"], float), float(h["b"])) for h in data["halfspaces"]]
        if any(h.a.shape[0] != n for h in hs):
            raise ValueError(f"halfspace normals must have length {n}")
        witness = data.get("witness")
        if witness is None:
            raise ValueError("halfspace body needs a 'witness' interior point")
        return halfspace_intersection(hs, witness)
    raise ValueError("body JSON needs 'vertices' or 'halfspaces'")


def body_to_dict(p: Polytope, halfspaces=False) -> dict:
    if halfspaces:
        return {
            "n": p.dim,
            "halfspaces": [{"a": a.tolist(), "b": float(b)} for a, b in zip(p.A, p.b)],
            "witness": p.witness.tolist(),
        }
    return {"n": p.dim, "vertices": p.vertices.tolist()}


def load_body(path) -> Polytope:
    with open(path) as fh:
        return body_from_dict(json.load(fh))


def dump_body(p: Polytope, path, halfspaces=False):
    with open(path, "w") as fh:
        json.dump(body_to_dict(p, halfspaces), fh, indent=1)
