"""Polar bodies, the Santaló point and the volume product.

For a polytope K with facets ``<a_i, x> <= b_i`` and an interior point z, the
polar ``K^z = (K - z)°`` has vertices ``a_i / (b_i - <a_i, z>)`` and one facet
``<y, v_j - z> <= 1`` per vertex ``v_j`` of K.  The face lattice of K^z does
not depend on z, so its boundary triangulation is computed once per body and
reused along the Newton path.

With ``V(z) = |K^z|`` one has ``∇V(z) = (n+1) ∫_{K^z} y dy`` and
``∇²V(z) = (n+1)(n+2) ∫_{K^z} y yᵀ dy``; V is strictly convex and blows up at
the boundary, and its minimizer is the point where the centroid of K^z is 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .errors import ConvergenceError, NotInteriorError
from .numkit import as_vector
from .polytope import Polytope
from .polytope.moments import boundary_triangulation, moments_from_triangulation

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MAX_ITER = 100


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1)


def ball_volume_product(n: int) -> float:
    """Volume product of the Euclidean ball, the Blaschke-Santaló upper bound."""
    return unit_ball_volume(n) ** 2


def _polar_vertices(k: Polytope, z):
    gaps = k.b - k.A @ z
    if np.any(gaps <= k.tol * np.linalg.norm(k.A, axis=1)):
        raise NotInteriorError(margin=float(np.min(gaps / np.linalg.norm(k.A, axis=1))))
    return k.A / gaps[:, None]


def _polar_incidence(k: Polytope):
    return tuple(frozenset(fs) for fs in k.vertex_facets())


def _polar_template(k: Polytope):
    """Boundary triangulation of the polar, as indices into the facets of ``k``."""
    cached = k.__dict__.get("_polar_template")
    if cached is None:
        Vp = _polar_vertices(k, k.witness)
        probe = Polytope(Vp, k.vertices - k.witness, np.ones(k.num_vertices), _polar_incidence(k))
        cached = boundary_triangulation(probe)
        k.__dict__["_polar_template"] = cached
    return cached


def polar(k: Polytope, z=None) -> Polytope:
    """The polar body ``K^z``; ``z`` defaults to the origin."""
    z = np.zeros(k.dim) if z is None else as_vector(z, k.dim)
    Vp = _polar_vertices(k, z)
    return Polytope(
        Vp,
        k.vertices - z,
        np.ones(k.num_vertices),
        _polar_incidence(k),
        boundary_simplices=_polar_template(k),
    )


def polar_moments(k: Polytope, z):
    z = as_vector(z, k.dim)
    return moments_from_triangulation(_polar_vertices(k, z), _polar_template(k))


def polar_volume(k: Polytope, z) -> float:
    return polar_moments(k, z).volume


def polar_volume_gradient(k: Polytope, z):
    """Value, gradient and Hessian of ``z -> |K^z|``."""
    n = k.dim
    m = polar_moments(k, z)
    return m.volume, (n + 1) * m.first_moment, (n + 1) * (n + 2) * m.second_moment


@dataclass(frozen=True)
class SantaloResult:
    point: np.ndarray
    polar_at_s: Polytope
    polar_volume: float
    centroid_norm: float
    iterations: int
    gradient_norms: tuple = ()


@dataclass(frozen=True)
class VolumeProductResult:
    vp: float
    body_volume: float
    polar_volume: float
    santalo: SantaloResult


def _interior(k: Polytope, z):
    return bool(np.all(k.b - k.A @ z > k.tol * np.linalg.norm(k.A, axis=1)))


def santalo_point(k: Polytope, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> SantaloResult:
    """Minimize ``|K^z|`` over interior z by damped Newton from the centroid of K.

    Stops when the centroid of ``K^z`` has norm at most ``tol``.
    """
    z = np.array(k.centroid, dtype=float)
    grad_norms = []
    for it in range(max_iter + 1):
        m = polar_moments(k, z)
        c_norm = float(np.linalg.norm(m.first_moment / m.volume))
        n = k.dim
        g = (n + 1) * m.first_moment
        grad_norms.append(float(np.linalg.norm(g)))
        if c_norm <= tol:
            return SantaloResult(z, polar(k, z), m.volume, c_norm, it, tuple(grad_norms))
        if it == max_iter:
            break
        H = (n + 1) * (n + 2) * m.second_moment
        try:
            L = np.linalg.cholesky(H)
            step = -np.linalg.solve(L.T, np.linalg.solve(L, g))
            if np.linalg.cond(H) > 1e12:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            log.debug("singular Hessian at iteration %d, gradient step", it)
            step = -g / max(np.linalg.norm(g), 1e-300) * float(np.min(k.slack(z))) * 0.5
        v0 = m.volume
        slope = float(g @ step)
        t = 1.0
        for _ in range(60):
            cand = z + t * step
            if _interior(k, cand):
                v = polar_volume(k, cand)
                # Armijo with a round-off allowance near the minimum
                if v <= v0 + 1e-4 * t * slope + 1e-13 * v0:
                    break
            t *= 0.5
        else:
            raise ConvergenceError("line search failed", z, grad_norms[-1])
        z = cand
    raise ConvergenceError(
        f"Santaló solver did not converge in {max_iter} iterations", z, grad_norms[-1]
    )


def volume_product(k: Polytope, tol: float = DEFAULT_TOL) -> VolumeProductResult:
    s = santalo_point(k, tol)
    vol = k.volume
    return VolumeProductResult(vol * s.polar_volume, vol, s.polar_volume, s)


def simplex_volume_product(n: int) -> float:
    """Exact volume product of an n-simplex, ``(n+1)^(n+1) / (n!)^2``."""
    from math import factorial

    return (n + 1) ** (n + 1) / factorial(n) ** 2
