"""Exact volume, first and second moments by triangulation.

The boundary is triangulated facet by facet with a pulling triangulation
(each face is coned from its smallest vertex index over its own facets that
avoid that vertex) and the body is then fanned from the vertex average.
The triangulation depends only on the face lattice, so it can be reused for
any polytope with the same combinatorics, e.g. polars about different centers.
"""
from __future__ import annotations

from math import factorial

import numpy as np

from ..errors import DegenerateHullError
from ..numkit import affine_rank
from .core import BodyMoments, Polytope


def _face_triangulation(face, dim, facets, V, memo):
    key = face
    if key in memo:
        return memo[key]
    if dim == 0:
        out = [tuple(face)]
    elif dim == 1:
        if len(face) != 2:
            raise DegenerateHullError(affine_rank(V[sorted(face)]), 1)
        out = [tuple(sorted(face))]
    else:
        apex = min(face)
        subfaces = set()
        for f in facets:
            s = face & f
            if apex in s or len(s) < dim or s == face:
                continue
            if affine_rank(V[sorted(s)]) == dim - 1:
                subfaces.add(s)
        out = []
        for s in sorted(subfaces, key=sorted):
            out.extend((apex,) + t for t in _face_triangulation(s, dim - 1, facets, V, memo))
    memo[key] = out
    return out


def boundary_triangulation(p: Polytope) -> np.ndarray:
    """``(k, n)`` array of vertex indices; each row spans an (n-1)-simplex of the boundary."""
    n = p.dim
    memo = {}
    rows = []
    for f in p.incidence:
        rows.extend(_face_triangulation(frozenset(f), n - 1, p.incidence, p.vertices, memo))
    return np.array(rows, dtype=int).reshape(-1, n)


def simplex_moments(simplices):
    """Moments of a stack of simplices, shape ``(k, n+1, n)``.

    Returns per-simplex volumes, first moments and second moments.
    """
    S = np.asarray(simplices, dtype=float)
    n = S.shape[2]
    edges = S[:, 1:, :] - S[:, :1, :]
    vol = np.abs(np.linalg.det(edges)) / factorial(n)
    total = S.sum(axis=1)
    first = vol[:, None] * total / (n + 1)
    outer = np.einsum("kij,kil->kjl", S, S) + np.einsum("kj,kl->kjl", total, total)
    second = vol[:, None, None] * outer / ((n + 1) * (n + 2))
    return vol, first, second


def moments_from_triangulation(vertices, boundary_simplices) -> BodyMoments:
    V = np.asarray(vertices, dtype=float)
    apex = V.mean(axis=0)
    faces = V[boundary_simplices]
    stack = np.concatenate([np.broadcast_to(apex, (faces.shape[0], 1, V.shape[1])), faces], axis=1)
    vol, first, second = simplex_moments(stack)
    return BodyMoments(float(vol.sum()), first.sum(axis=0), second.sum(axis=0))


def polytope_moments(p: Polytope) -> BodyMoments:
    m = moments_from_triangulation(p.vertices, p.boundary_simplices)
    if not m.volume > 0:
        raise DegenerateHullError(affine_rank(p.vertices), p.dim)
    return m


def moments(p: Polytope) -> BodyMoments:
    """Volume, first moment ``∫ y dy`` and second moment ``∫ y yᵀ dy`` of ``p``."""
    return p.moments
