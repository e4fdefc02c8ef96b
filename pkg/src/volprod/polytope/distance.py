"""Point-to-polytope distance and the Hausdorff metric."""
from __future__ import annotations

import numpy as np

from ..numkit import as_matrix, as_vector
from .core import Polytope

GAP_TOL = 1e-12


def min_norm_point(points, gap_tol=GAP_TOL, max_iter=1000):
    """Minimum-norm point of ``conv(points)`` by Wolfe's corrective Frank-Wolfe method.

    Each major step adds the Frank-Wolfe vertex; minor steps move to the
    affine minimizer of the active set and drop vertices whose weight would
    turn negative (away steps).  Stops when the Frank-Wolfe duality gap
    ``|w|^2 - min_j <y_j, w>`` falls below ``gap_tol`` (scaled).

    Returns ``(w, weights)`` with ``weights`` indexed like ``points``.
    """
    Y = as_matrix(points)
    scale = max(1.0, float(np.max(np.sum(Y * Y, axis=1))))
    active = [int(np.argmin(np.sum(Y * Y, axis=1)))]
    lam = np.array([1.0])
    w = Y[active[0]].copy()
    for _ in range(max_iter):
        dots = Y @ w
        j = int(np.argmin(dots))
        if w @ w - dots[j] <= gap_tol * scale or j in active:
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        while True:
            S = Y[active]
            k = len(active)
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = S @ S.T
            M[:k, k] = 1.0
            M[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            mu = np.linalg.lstsq(M, rhs, rcond=None)[0][:k]
            if np.all(mu > 1e-14):
                lam = mu
                break
            neg = mu <= 1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg & (lam - mu > 0), lam / (lam - mu), np.inf)
            theta = min(1.0, float(ratios.min()))
            lam = lam + theta * (mu - lam)
            keep = lam > 1e-14
            if keep.all():
                keep[int(np.argmin(lam))] = False
            active = [a for a, kk in zip(active, keep) if kk]
            lam = lam[keep]
            lam = lam / lam.sum()
        w = lam @ Y[active]
    weights = np.zeros(Y.shape[0])
    weights[active] = lam
    return w, weights


def point_distance(p: Polytope, x) -> float:
    """Euclidean distance from ``x`` to the polytope ``p``."""
    x = as_vector(x, p.dim)
    if np.all(p.A @ x <= p.b):
        return 0.0
    w, _ = min_norm_point(p.vertices - x)
    return float(np.linalg.norm(w))


def support_gap_lower_bound(p: Polytope, q: Polytope) -> float:
    """``max |h_p - h_q|`` over a deterministic direction set (facet normals and ±e_i)."""
    dirs = np.vstack([p.A, q.A, np.eye(p.dim), -np.eye(p.dim)])
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    hp = np.max(dirs @ p.vertices.T, axis=1)
    hq = np.max(dirs @ q.vertices.T, axis=1)
    return float(np.max(np.abs(hp - hq)))


def hausdorff(p: Polytope, q: Polytope) -> float:
    """Hausdorff distance between two polytopes of the same dimension."""
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    d_pq = max(point_distance(q, v) for v in p.vertices)
    d_qp = max(point_distance(p, v) for v in q.vertices)
    d = max(d_pq, d_qp)
    lower = support_gap_lower_bound(p, q)
    if d < lower - 1e-9:
        raise RuntimeError(f"hausdorff {d} below support-function bound {lower}")
    return d
