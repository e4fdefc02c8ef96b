"""Small dense linear algebra, a Bland-rule simplex LP solver, and least squares fits.

Problem sizes in this package are tiny (a few dozen variables), so everything
is dense numpy and favours determinism over speed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleError, LPError, UnboundedLPError

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9


def as_vector(x, n=None) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(m) -> np.ndarray:
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def determinant(m) -> float:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"determinant of a non-square {a.shape[0]}x{a.shape[1]} matrix")
    return float(np.linalg.det(a))


def affine_rank(points, tol=1e-9) -> int:
    """Dimension of the affine hull of ``points`` (rows)."""
    p = as_matrix(points)
    if p.shape[0] <= 1:
        return 0
    d = p[1:] - p[0]
    s = np.linalg.svd(d, compute_uv=False)
    scale = max(1.0, float(np.abs(p).max()))
    return int(np.sum(s > tol * scale))


def normal_of(points) -> np.ndarray:
    """Unit normal of the hyperplane through n affinely independent points in R^n."""
    p = as_matrix(points)
    d = p[1:] - p[0]
    _, _, vt = np.linalg.svd(d)
    return vt[-1]


def orthonormal_frame(points):
    """Origin and orthonormal basis (rows) of the affine hull of ``points``."""
    p = as_matrix(points)
    origin = p.mean(axis=0)
    u, s, vt = np.linalg.svd(p - origin, full_matrices=False)
    scale = max(1.0, float(np.abs(p).max()))
    r = int(np.sum(s > 1e-9 * scale))
    return origin, vt[:r]


# ---------------------------------------------------------------- linear programs


@dataclass(frozen=True)
class LinearProgram:
    """maximize <objective, x> subject to

        A_eq x = b_eq,  A_ub x <= b_ub,  x_j >= 0 where nonneg[j],  x_j <= upper[j].

    Variables without the nonnegativity flag are free.  ``upper`` entries of
    ``inf`` mean no upper bound.
    """

    objective: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    nonneg: Optional[Sequence[bool]] = None
    upper: Optional[Sequence[float]] = None

    def __post_init__(self):
        c = as_vector(self.objective)
        nv = c.shape[0]
        object.__setattr__(self, "objective", c)
        for a_name, b_name in (("A_eq", "b_eq"), ("A_ub", "b_ub")):
            a, b = getattr(self, a_name), getattr(self, b_name)
            if a is None and b is None:
                a, b = np.zeros((0, nv)), np.zeros(0)
            elif a is None or b is None:
                raise ValueError(f"{a_name} and {b_name} must be given together")
            a = np.asarray(a, dtype=float).reshape(-1, nv)
            b = as_vector(b, a.shape[0])
            object.__setattr__(self, a_name, a)
            object.__setattr__(self, b_name, b)
        nonneg = np.ones(nv, bool) if self.nonneg is None else np.asarray(self.nonneg, bool)
        upper = np.full(nv, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if nonneg.shape != (nv,) or upper.shape != (nv,):
            raise ValueError("nonneg/upper must have one entry per variable")
        object.__setattr__(self, "nonneg", nonneg)
        object.__setattr__(self, "upper", upper)

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]


def _pivot(T, basis, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _run_simplex(T, basis, cost, max_iter):
    """Primal simplex on the tableau ``T = B^-1 [A | b]`` with Bland's rule (maximisation)."""
    ncols = T.shape[1] - 1
    for _ in range(max_iter):
        reduced = cost - cost[basis] @ T[:, :ncols]
        candidates = np.nonzero(reduced > PIVOT_TOL)[0]
        if candidates.size == 0:
            return
        c = int(candidates[0])
        column = T[:, c]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if rows.size == 0:
            raise UnboundedLPError()
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
    raise LPError("simplex iteration limit reached")


def solve_lp(lp: LinearProgram, max_iter: int = 10_000):
    """Solve ``lp`` by the two-phase dense simplex method with Bland's rule.

    Returns ``(value, x)`` where ``x`` is a vertex optimizer.  Raises
    :class:`InfeasibleError` or :class:`UnboundedLPError`.
    """
    nv = lp.num_vars
    # columns of the standard form: one per nonneg var, two per free var
    col_of = []
    k = 0
    for j in range(nv):
        if lp.nonneg[j]:
            col_of.append((k,))
            k += 1
        else:
            col_of.append((k, k + 1))
            k += 2
    n_struct = k

    def expand(row):
        out = np.zeros(n_struct)
        for j in range(nv):
            cols = col_of[j]
            out[cols[0]] += row[j]
            if len(cols) == 2:
                out[cols[1]] -= row[j]
        return out

    eq_rows, eq_rhs = [expand(r) for r in lp.A_eq], list(lp.b_eq)
    ub_rows, ub_rhs = [expand(r) for r in lp.A_ub], list(lp.b_ub)
    for j in range(nv):
        if np.isfinite(lp.upper[j]):
            e = np.zeros(nv)
            e[j] = 1.0
            ub_rows.append(expand(e))
            ub_rhs.append(lp.upper[j])

    n_slack = len(ub_rows)
    m = len(eq_rows) + n_slack
    ncols = n_struct + n_slack
    A = np.zeros((m, ncols))
    b = np.zeros(m)
    for i, (row, rhs) in enumerate(zip(eq_rows, eq_rhs)):
        A[i, :n_struct] = row
        b[i] = rhs
    for i, (row, rhs) in enumerate(zip(ub_rows, ub_rhs)):
        r = len(eq_rows) + i
        A[r, :n_struct] = row
        A[r, n_struct + i] = 1.0
        b[r] = rhs
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    c_std = np.zeros(ncols)
    c_std[:n_struct] = expand(lp.objective)

    if m == 0:
        if np.any(c_std > PIVOT_TOL):
            raise UnboundedLPError()
        return 0.0, np.zeros(nv)

    # phase 1: one artificial per row
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(ncols, ncols + m))
    cost1 = np.zeros(ncols + m)
    cost1[ncols:] = -1.0
    _run_simplex(T, basis, cost1, max_iter)
    if T[:, -1] @ -cost1[basis] > FEAS_TOL * max(1.0, float(np.abs(b).max())):
        raise InfeasibleError()

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= ncols:
            nz = np.nonzero(np.abs(T[r, :ncols]) > PIVOT_TOL)[0]
            if nz.size == 0:
                continue
            _pivot(T, basis, r, int(nz[0]))
        keep.append(r)
    T = np.hstack([T[keep, :ncols], T[keep, -1:]])
    basis = [basis[r] for r in keep]

    _run_simplex(T, basis, c_std, max_iter)

    x_std = np.zeros(ncols)
    x_std[basis] = T[:, -1]
    x = np.array([x_std[cols[0]] - (x_std[cols[1]] if len(cols) == 2 else 0.0) for cols in col_of])
    return float(lp.objective @ x), x


# ---------------------------------------------------------------- fits


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    exponent: Optional[float] = None
    n_points: int = field(default=0)

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "exponent": self.exponent,
            "residual": self.residual,
            "n_points": self.n_points,
        }


def _ols(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("x values must be distinct")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    residual = float(np.sqrt(np.sum((y - (slope * x + intercept)) ** 2)))
    return slope, intercept, residual


def _split(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise ValueError(f"need at least 3 points to fit, got {pts.shape[0]}")
    return pts[:, 0], pts[:, 1]


def fit_linear(points) -> FitResult:
    """Ordinary least squares line through ``(x, y)`` pairs."""
    x, y = _split(points)
    slope, intercept, residual = _ols(x, y)
    return FitResult(slope, intercept, residual, None, len(x))


def fit_loglog(points) -> FitResult:
    """OLS of ``log y`` against ``log x``; ``exponent`` is the fitted slope."""
    x, y = _split(points)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive x and y")
    slope, intercept, residual = _ols(np.log(x), np.log(y))
    return FitResult(slope, intercept, residual, slope, len(x))
