"""The regular simplex, its faces and flags, tangent points and the flag polytopes.

The fixed simplex has unit vertices ``v_0..v_n`` with ``<v_i, v_j> = -1/n``
for ``i != j``; its polar about the origin is ``-n`` times itself.  For a body
K sandwiched as ``(1-δ)Δ ⊂ K ⊂ Δ`` every proper face F of Δ gets a tangent
point ``x_F`` where the affine plane ``t c_F + F^⊥`` last touches K, and the
matching point ``x_F*`` on the polar side.  Flag simplices built from these
points (and from the scaled centroids ``y_F = t c_F``) approximate K, K°, Δ
and Δ° and carry the volume estimates checked by :func:`lemma_report`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from math import factorial
from typing import Optional

import numpy as np

from .errors import GeometryError, LPError, NotInteriorError, SandwichError
from .numkit import LinearProgram, solve_lp
from .polarity import polar
from .polytope import Polytope, contains, convex_hull

log = logging.getLogger(__name__)

CHECK_TOL = 1e-9


def _helmert_basis(n):
    """Orthonormal basis (rows) of the sum-zero hyperplane in R^(n+1)."""
    B = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        B[k - 1, :k] = 1.0
        B[k - 1, k] = -k
        B[k - 1] /= np.sqrt(k * (k + 1))
    return B


@dataclass(frozen=True)
class Face:
    indices: tuple
    centroid: np.ndarray
    dual_centroid: np.ndarray

    @property
    def dim(self):
        return len(self.indices) - 1

    def __repr__(self):
        return f"Face{self.indices}"


class RegularSimplex:
    """Regular simplex inscribed in the unit sphere of R^n, centered at 0."""

    def __init__(self, n: int):
        if not 2 <= n <= 6:
            raise ValueError(f"simplex dimension must be in 2..6, got {n}")
        self.n = n
        E = np.eye(n + 1) - 1.0 / (n + 1)
        E /= np.linalg.norm(E, axis=1)[:, None]
        V = E @ _helmert_basis(n).T
        V.setflags(write=False)
        self.vertices = V

    def __repr__(self):
        return f"RegularSimplex(n={self.n})"

    @cached_property
    def polytope(self) -> Polytope:
        return convex_hull(self.vertices)

    @cached_property
    def polar_polytope(self) -> Polytope:
        return convex_hull(-self.n * self.vertices)

    @cached_property
    def volume(self) -> float:
        return self.polytope.volume

    @cached_property
    def polar_volume(self) -> float:
        return self.polar_polytope.volume

    def face(self, indices) -> Face:
        idx = tuple(sorted(indices))
        c = self.vertices[list(idx)].mean(axis=0)
        return Face(idx, c, c / (c @ c))

    @cached_property
    def faces(self):
        """Proper faces sorted by (dimension, lexicographic vertex set)."""
        out = []
        for size in range(1, self.n + 1):
            out.extend(self.face(s) for s in combinations(range(self.n + 1), size))
        return out

    def flags(self):
        """All (n+1)! flags as ordered index tuples ``(j_0, ..., j_{n-1})``."""
        return list(permutations(range(self.n + 1), self.n))


def build_regular_simplex(n: int) -> RegularSimplex:
    return RegularSimplex(n)


def check_inside_simplex(k: Polytope, s: RegularSimplex, tol=CHECK_TOL):
    if k.dim != s.n:
        raise ValueError(f"body dimension {k.dim} differs from simplex dimension {s.n}")
    lhs = k.vertices @ (-s.n * s.vertices).T
    bad = np.nonzero(np.any(lhs > 1 + tol, axis=1))[0].tolist()
    if bad:
        raise SandwichError([k.vertices[i].tolist() for i in bad])
    if not np.all(k.b > 0) or np.min(k.slack(np.zeros(k.dim))) <= 0:
        raise NotInteriorError("origin is not interior to the body")


def sandwich_delta(k: Polytope, s: RegularSimplex) -> float:
    """Smallest d with ``(1-d)Δ ⊂ K ⊂ Δ``, by shooting rays along the vertices of Δ."""
    check_inside_simplex(k, s)
    proj = k.A @ s.vertices.T
    with np.errstate(divide="ignore"):
        hits = np.where(proj > 0, k.b[:, None] / proj, np.inf)
    tau = hits.min(axis=0)
    return float(max(0.0, 1.0 - tau.min()))


# ------------------------------------------------------------------ tangents


def _tangent_lp(points, face_points, centroid):
    """maximize t s.t. x = Σλ_i p_i, Σλ = 1, λ >= 0, <x - t c, q> = 0 for face points q."""
    m = points.shape[0]
    c = np.zeros(m + 1)
    c[-1] = 1.0
    rows = [np.append(np.ones(m), 0.0)]
    rhs = [1.0]
    for q in face_points:
        rows.append(np.append(points @ q, -(centroid @ q)))
        rhs.append(0.0)
    lp = LinearProgram(c, np.array(rows), np.array(rhs))
    t, sol = solve_lp(lp)
    x = sol[:m] @ points
    return t, x


def tangent_touch(k: Polytope, s: RegularSimplex, face: Face):
    """``(t, x_F, y_F)`` for the primal tangent plane of ``face``."""
    try:
        t, x = _tangent_lp(k.vertices, s.vertices[list(face.indices)], face.centroid)
    except LPError as exc:
        raise GeometryError(f"tangent LP failed for {face}: {exc}") from exc
    return t, x, t * face.centroid


def _dual_face_points(s: RegularSimplex, face: Face):
    comp = [j for j in range(s.n + 1) if j not in face.indices]
    return -s.n * s.vertices[comp]


def tangent_touch_dual(k: Polytope, s: RegularSimplex, face: Face, k_polar: Optional[Polytope] = None, t=None):
    """``(t*, x_F*, y_F*)`` on K° for the dual face F* of Δ°.

    When the primal ``t`` is given, ``t * t* = 1`` is verified.
    """
    kp = polar(k) if k_polar is None else k_polar
    dual_c = face.dual_centroid
    try:
        ts, xs = _tangent_lp(kp.vertices, _dual_face_points(s, face), dual_c)
    except LPError as exc:
        raise GeometryError(f"dual tangent LP failed for {face}: {exc}") from exc
    if t is not None and abs(ts * t - 1.0) > CHECK_TOL:
        raise GeometryError(f"t* t = {ts * t!r} != 1 for {face}")
    return ts, xs, ts * dual_c


@dataclass(frozen=True)
class TangentData:
    face: Face
    t: float
    x: np.ndarray
    y: np.ndarray
    t_star: float
    x_star: np.ndarray
    y_star: np.ndarray

    def residuals(self, delta, n):
        """Signed violations of the five tangent-point identities (<= 0 means satisfied)."""
        c = self.face.centroid
        return {
            "duality_x": abs(self.x @ self.x_star - 1.0),
            "duality_y": abs(self.y @ self.y_star - 1.0),
            "orthogonal_x": abs((self.x - self.y) @ c),
            "orthogonal_x_star": abs((self.x_star - self.y_star) @ c),
            "gap_x": np.linalg.norm(self.x - self.y) - 2 * delta,
            "gap_x_star": np.linalg.norm(self.x_star - self.y_star) - 2 * n * delta,
            "t_range": max(1 - delta - self.t, self.t - 1.0, 0.0),
            "t_star_inverse": abs(self.t_star * self.t - 1.0),
            "y_scaled": float(np.linalg.norm(self.y - self.t * c)),
            "y_star_scaled": float(np.linalg.norm(self.y_star - self.face.dual_centroid / self.t)),
        }


def tangent_data(k: Polytope, s: RegularSimplex, k_polar: Optional[Polytope] = None):
    kp = polar(k) if k_polar is None else k_polar
    out = {}
    for f in s.faces:
        t, x, y = tangent_touch(k, s, f)
        ts, xs, ys = tangent_touch_dual(k, s, f, kp)
        out[f.indices] = TangentData(f, t, x, y, ts, xs, ys)
    return out


# ------------------------------------------------------------------ flag polytopes


@dataclass(frozen=True)
class FlagVolume:
    simplices: np.ndarray  # (flags, n, n): the n non-origin points per cell
    absolute: float
    signed: float
    overlap: bool


@dataclass(frozen=True)
class FlagPolytopes:
    P: FlagVolume
    P_dual: FlagVolume
    Q: FlagVolume
    Q_dual: FlagVolume
    flags: list = field(default_factory=list)


def _flag_volume(cells, reference_signs):
    n = cells.shape[1]
    dets = np.linalg.det(cells)
    absolute = float(np.sum(np.abs(dets)) / factorial(n))
    signed = float(abs(np.sum(reference_signs * dets)) / factorial(n))
    return FlagVolume(cells, absolute, signed, bool(abs(absolute - signed) > CHECK_TOL))


def build_flag_polytopes(k: Polytope, s: RegularSimplex, tangents=None) -> FlagPolytopes:
    """The four flag-simplex unions P, P', Q, Q' over all (n+1)! flags.

    Signed volumes orient each cell like its barycentric-subdivision reference
    cell, so ``signed < absolute`` exposes inverted or overlapping cells.
    """
    if tangents is None:
        tangents = tangent_data(k, s)
    flags = s.flags()
    keys = [[tuple(sorted(fl[: i + 1])) for i in range(s.n)] for fl in flags]
    missing = {key for ks in keys for key in ks if key not in tangents}
    if missing:
        raise GeometryError(f"missing tangent data for faces {sorted(missing)}")
    ref = np.sign(np.linalg.det(np.array([[s.face(key).centroid for key in ks] for ks in keys])))

    def cells(attr):
        return np.array([[getattr(tangents[key], attr) for key in ks] for ks in keys])

    return FlagPolytopes(
        P=_flag_volume(cells("x"), ref),
        P_dual=_flag_volume(cells("x_star"), ref),
        Q=_flag_volume(cells("y"), ref),
        Q_dual=_flag_volume(cells("y_star"), ref),
        flags=flags,
    )


# ------------------------------------------------------------------ report


def facet_centroids_inside(k: Polytope, s: RegularSimplex, tol=CHECK_TOL) -> bool:
    return all(contains(k, -v / s.n, tol) for v in s.vertices)


def _ratio(num, den):
    return None if den is None else num / den


def lemma_report(k: Polytope, s: RegularSimplex, delta_floor: float = 1e-12) -> dict:
    """Check the tangent-point identities and flag-polytope volume estimates on ``k``.

    Failures are reported as data.  Ratios that divide by δ are ``None`` when
    ``δ <= delta_floor``.  Field names are stable; see README for the schema.
    """
    n = s.n
    delta = sandwich_delta(k, s)
    kp = polar(k)
    tangents = tangent_data(k, s, kp)
    flags = build_flag_polytopes(k, s, tangents)

    worst = {}
    for td in tangents.values():
        for name, r in td.residuals(delta, n).items():
            worst[name] = max(worst.get(name, -np.inf), float(r))
    equality_keys = ("duality_x", "duality_y", "orthogonal_x", "orthogonal_x_star",
                     "t_star_inverse", "y_scaled", "y_star_scaled", "t_range")
    lemma31_residual = max(worst[key] for key in equality_keys)
    lemma31_ok = lemma31_residual <= CHECK_TOL and worst["gap_x"] <= CHECK_TOL and worst["gap_x_star"] <= CHECK_TOL
    if delta > delta_floor:
        lemma31_ok = lemma31_ok and worst["gap_x"] < 0 and worst["gap_x_star"] < 0

    vol_k, vol_kp = k.volume, kp.volume
    vol_d, vol_dp = s.volume, s.polar_volume
    base = vol_d * vol_dp
    margin32 = flags.Q.absolute * flags.Q_dual.absolute - base
    diff_p = abs(flags.P.absolute - flags.Q.absolute)
    diff_pp = abs(flags.P_dual.absolute - flags.Q_dual.absolute)
    d = delta if delta > delta_floor else None
    ratio34 = None if d is None else max((vol_k - flags.P.absolute) / d, (vol_kp - flags.P_dual.absolute) / d)
    ratio35 = _ratio(vol_k * vol_kp - base, d)

    ts = np.array([td.t for td in tangents.values()])
    contain = {
        "P_in_K": all(contains(k, td.x) for td in tangents.values()),
        "P_dual_in_K_polar": all(contains(kp, td.x_star) for td in tangents.values()),
        "Q_between": bool(ts.min() >= 1 - delta - CHECK_TOL and ts.max() <= 1 + CHECK_TOL),
        "Q_dual_between": bool(
            (1 / ts).min() >= 1 - CHECK_TOL and (1 / ts).max() <= 1 / (1 - delta) + CHECK_TOL
        ),
    }

    return {
        "n": n,
        "delta": delta,
        "facet_centroids_ok": facet_centroids_inside(k, s),
        "volumes": {
            "K": vol_k,
            "K_polar": vol_kp,
            "simplex": vol_d,
            "simplex_polar": vol_dp,
            "P": flags.P.absolute,
            "P_dual": flags.P_dual.absolute,
            "Q": flags.Q.absolute,
            "Q_dual": flags.Q_dual.absolute,
            "P_signed": flags.P.signed,
            "P_dual_signed": flags.P_dual.signed,
            "Q_signed": flags.Q.signed,
            "Q_dual_signed": flags.Q_dual.signed,
        },
        "overlap": {
            "P": flags.P.overlap,
            "P_dual": flags.P_dual.overlap,
            "Q": flags.Q.overlap,
            "Q_dual": flags.Q_dual.overlap,
        },
        "containment": contain,
        "lemma31": {
            "ok": bool(lemma31_ok),
            "max_residual": lemma31_residual,
            "max_gap_x_minus_2delta": worst["gap_x"],
            "max_gap_x_star_minus_2ndelta": worst["gap_x_star"],
        },
        "lemma32": {"margin": margin32, "ok": bool(margin32 >= -CHECK_TOL)},
        "lemma33": {
            "P_minus_Q": diff_p,
            "P_dual_minus_Q_dual": diff_pp,
            "P_ratio": _ratio(diff_p, None if d is None else d * d),
            "P_dual_ratio": _ratio(diff_pp, None if d is None else d * d),
        },
        "lemma34": {"ratio": ratio34, "ok": None if ratio34 is None else bool(ratio34 > 0)},
        "prop35": {"ratio": ratio35, "ok": None if ratio35 is None else bool(ratio35 > 0)},
    }
