from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import NotInteriorError
from ..numkit import as_matrix, as_vector

COPLANAR_TOL = 1e-9


@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : <a, x> <= b}``."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = as_vector(self.a)
        if not np.linalg.norm(a) > 0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class BodyMoments:
    volume: float
    first_moment: np.ndarray
    second_moment: np.ndarray

    @property
    def centroid(self) -> np.ndarray:
        return self.first_moment / self.volume


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def scale_of(points) -> float:
    return max(1.0, float(np.abs(points).max()))


def normalize_halfspaces(A, b, tol):
    """Scale rows to ``b = 1`` when the origin is interior, else to unit normals."""
    norms = np.linalg.norm(A, axis=1)
    A = A / norms[:, None]
    b = b / norms
    if np.all(b > tol):
        A = A / b[:, None]
        b = np.ones_like(b)
    return A, b


def compute_incidence(V, A, b, tol):
    norms = np.linalg.norm(A, axis=1)
    slack = (b[None, :] - V @ A.T) / norms[None, :]
    return tuple(frozenset(np.nonzero(np.abs(slack[:, i]) <= tol)[0].tolist()) for i in range(A.shape[0]))


class Polytope:
    """Full-dimensional convex polytope held in both descriptions.

    ``vertices`` is an ``(m, n)`` array, ``A``/``b`` the irredundant facet
    inequalities ``A x <= b`` and ``incidence[i]`` the set of vertex indices on
    facet ``i``.  ``witness`` is a strictly interior point (the vertex average).
    Instances are treated as immutable.
    """

    def __init__(self, vertices, A, b, incidence=None, witness=None, boundary_simplices=None):
        V = as_matrix(vertices)
        A = as_matrix(A)
        b = as_vector(b, A.shape[0])
        if A.shape[1] != V.shape[1]:
            raise ValueError("vertex and halfspace dimensions differ")
        self.dim = V.shape[1]
        self.tol = COPLANAR_TOL * scale_of(V)
        self.vertices = _frozen(V)
        self.A = _frozen(A)
        self.b = _frozen(b)
        if incidence is None:
            incidence = compute_incidence(V, A, b, self.tol)
        self.incidence = tuple(frozenset(f) for f in incidence)
        self.witness = _frozen(V.mean(axis=0) if witness is None else as_vector(witness, self.dim))
        if boundary_simplices is not None:
            self.__dict__["boundary_simplices"] = np.asarray(boundary_simplices, dtype=int)

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, facets={len(self.b)})"

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_facets(self):
        return self.b.shape[0]

    @property
    def halfspaces(self):
        return [Halfspace(a, b) for a, b in zip(self.A, self.b)]

    def vertex_facets(self):
        """For each vertex, the set of facet indices containing it."""
        out = [set() for _ in range(self.num_vertices)]
        for i, f in enumerate(self.incidence):
            for j in f:
                out[j].add(i)
        return [frozenset(s) for s in out]

    def slack(self, x):
        """Normalized slacks ``(b_i - <a_i, x>) / |a_i|``."""
        x = as_vector(x, self.dim)
        return (self.b - self.A @ x) / np.linalg.norm(self.A, axis=1)

    def translate(self, t):
        t = as_vector(t, self.dim)
        V = self.vertices + t
        b = self.b + self.A @ t
        from .hull import polytope_from_representations

        return polytope_from_representations(V, self.A, b, self.incidence, self.__dict__.get("boundary_simplices"))

    def linear_map(self, M, t=None):
        """Image under ``x -> M x + t`` (``M`` invertible)."""
        M = as_matrix(M)
        t = np.zeros(self.dim) if t is None else as_vector(t, self.dim)
        V = self.vertices @ M.T + t
        Minv = np.linalg.inv(M)
        A = self.A @ Minv
        b = self.b + A @ t
        from .hull import polytope_from_representations

        return polytope_from_representations(V, A, b, self.incidence, self.__dict__.get("boundary_simplices"))

    def scaled(self, factor):
        return self.linear_map(np.eye(self.dim) * factor)

    @cached_property
    def boundary_simplices(self):
        from .moments import boundary_triangulation

        return boundary_triangulation(self)

    @cached_property
    def moments(self):
        from .moments import polytope_moments

        return polytope_moments(self)

    @property
    def volume(self):
        return self.moments.volume

    @property
    def centroid(self):
        return self.moments.centroid


def support(p: Polytope, direction) -> float:
    """Support function: ``max <v, direction>`` over the vertices."""
    return float(np.max(p.vertices @ as_vector(direction, p.dim)))


def contains(p: Polytope, x, tol=1e-9) -> bool:
    x = as_vector(x, p.dim)
    return bool(np.all(p.A @ x <= p.b + tol * np.linalg.norm(p.A, axis=1)))


def inradius_at(p: Polytope, z) -> float:
    """Radius of the largest ball centered at ``z`` inside ``p``."""
    r = float(np.min(p.slack(z)))
    if r <= 0:
        raise NotInteriorError(f"point is not interior (inradius {r:.3g})", margin=r)
    return r
