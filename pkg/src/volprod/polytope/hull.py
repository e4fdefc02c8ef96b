"""Convex hulls (incremental beneath-beyond) and halfspace intersections."""
from __future__ import annotations

from collections import Counter
from itertools import combinations

import numpy as np

from ..errors import DegenerateHullError, NotInteriorError, UnboundedError
from ..numkit import affine_rank, as_matrix, as_vector, normal_of
from .core import COPLANAR_TOL, Halfspace, Polytope, compute_incidence, normalize_halfspaces, scale_of


def polytope_from_representations(V, A, b, incidence=None, boundary_simplices=None):
    V = as_matrix(V)
    tol = COPLANAR_TOL * scale_of(V)
    A, b = normalize_halfspaces(as_matrix(A), as_vector(b), tol)
    return Polytope(V, A, b, incidence, boundary_simplices=boundary_simplices)


def _lex_unique(P, tol):
    order = np.lexsort(P.T[::-1])
    kept = []
    for i in order:
        if all(np.max(np.abs(P[i] - P[j])) > tol for j in kept):
            kept.append(i)
    return P[kept]


def _initial_simplex(P, tol):
    n = P.shape[1]
    idx = [0]
    for i in range(1, P.shape[0]):
        if affine_rank(P[idx + [i]], COPLANAR_TOL) == len(idx):
            idx.append(i)
            if len(idx) == n + 1:
                return idx
    raise DegenerateHullError(affine_rank(P, COPLANAR_TOL), n)


def _simplicial_hull(P, tol):
    """Beneath-beyond over lexicographically sorted points.

    Returns a dict mapping sorted vertex-index tuples (simplicial facets) to
    ``(unit normal, offset)`` oriented away from an interior point.
    """
    n = P.shape[1]
    idx = _initial_simplex(P, tol)
    center = P[idx].mean(axis=0)

    def make_facet(verts):
        a = normal_of(P[list(verts)])
        b = float(a @ P[verts[0]])
        if a @ center > b:
            a, b = -a, -b
        return a, b

    facets = {}
    for j in idx:
        verts = tuple(sorted(i for i in idx if i != j))
        facets[verts] = make_facet(verts)

    used = set(idx)
    for i in range(P.shape[0]):
        if i in used:
            continue
        p = P[i]
        visible = [f for f, (a, b) in facets.items() if a @ p - b > tol]
        if not visible:
            continue
        ridges = Counter()
        for f in visible:
            ridges.update(combinations(f, n - 1))
        for f in visible:
            del facets[f]
        for r, count in ridges.items():
            if count == 1:
                verts = tuple(sorted(r + (i,)))
                facets[verts] = make_facet(verts)
    return facets


def _merge_planes(facets, tol):
    planes = []
    for a, b in facets.values():
        for pa, pb in planes:
            if np.max(np.abs(pa - a)) <= 1e-7 and abs(pb - b) <= 1e-7 * max(1.0, abs(b)):
                break
        else:
            planes.append((a, b))
    A = np.array([a for a, _ in planes])
    b = np.array([b for _, b in planes])
    return A, b


def convex_hull(points, tol=None) -> Polytope:
    """Convex hull of a point cloud spanning R^n.

    Raises :class:`DegenerateHullError` (with ``rank``) when the points lie in
    a proper affine subspace.
    """
    P = as_matrix(points)
    n = P.shape[1]
    if tol is None:
        tol = COPLANAR_TOL * scale_of(P)
    P = _lex_unique(P, tol)
    if P.shape[0] < n + 1:
        raise DegenerateHullError(affine_rank(P, COPLANAR_TOL), n)
    facets = _simplicial_hull(P, tol)
    A, b = _merge_planes(facets, tol)

    candidates = sorted({i for f in facets for i in f})
    C = P[candidates]
    inc = compute_incidence(C, A, b, tol)
    on = [[] for _ in candidates]
    for fi, f in enumerate(inc):
        for j in f:
            on[j].append(fi)
    is_vertex = [len(fs) >= n and np.linalg.matrix_rank(A[fs], tol=1e-9) == n for fs in on]
    V = C[np.array(is_vertex)]
    return polytope_from_representations(V, A, b)


def halfspace_intersection(halfspaces, interior_witness) -> Polytope:
    """Bounded intersection of halfspaces, given a strictly interior point.

    ``halfspaces`` is a list of :class:`Halfspace` or ``(a, b)`` pairs.  Works
    through the dual: after translating the witness to the origin, the
    vertices are the facet normals of the hull of the points ``a / b``.
    """
    hs = [h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces]
    if not hs:
        raise UnboundedError("no halfspaces")
    A = np.array([h.a for h in hs])
    b = np.array([h.b for h in hs])
    w = as_vector(interior_witness, A.shape[1])
    n = A.shape[1]
    shifted = b - A @ w
    norms = np.linalg.norm(A, axis=1)
    if np.any(shifted <= COPLANAR_TOL * norms * scale_of(w)):
        bad = np.nonzero(shifted <= 0)[0].tolist()
        raise NotInteriorError(f"witness does not strictly satisfy halfspaces {bad}")
    D = A / shifted[:, None]
    if D.shape[0] < n + 1 or affine_rank(np.vstack([D, np.zeros(n)]), COPLANAR_TOL) < n:
        raise UnboundedError()
    try:
        dual = convex_hull(np.vstack([D]))
    except DegenerateHullError:
        raise UnboundedError() from None
    # origin must be strictly inside the dual hull; dual offsets are 1 when it is
    if not np.allclose(dual.b, 1.0):
        raise UnboundedError()
    V = dual.A + w
    keep = []
    for i, d in enumerate(D):
        if np.min(np.max(np.abs(dual.vertices - d), axis=1)) <= dual.tol and not any(
            np.max(np.abs(D[k] - d)) <= dual.tol for k in keep
        ):
            keep.append(i)
    return polytope_from_representations(V, A[keep], b[keep])
