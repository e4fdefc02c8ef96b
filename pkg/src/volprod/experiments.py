"""Perturbation families around the regular simplex and seeded δ-sweeps.

Every generated body satisfies ``(1-δ')Δ ⊂ K ⊂ Δ`` with ``δ' <= δ``.  The
random stream of a record is derived from ``(seed, sample)``: the same sample
index gets the same shape parameters at every δ of a grid, so δ-sweeps follow
fixed shapes as they shrink.  Records are plain rows for CSV output; the
aggregated :class:`SweepSummary` is written as JSON.
"""
from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError
from .numkit import fit_linear, fit_loglog
from .polarity import polar, polar_volume, santalo_point, simplex_volume_product
from .polytope import Polytope, convex_hull, halfspace_intersection, hausdorff, inradius_at
from .simplexflags import RegularSimplex, facet_centroids_inside, lemma_report, sandwich_delta

log = logging.getLogger(__name__)

FAMILIES = ("vertex-shrink", "facet-cut", "random-support", "scaling")
AFFINE_TRIVIAL = frozenset({"scaling"})
MAX_DELTA = 0.05
CUT_TILT = 0.25


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one generated body.

    ``fractions`` are per-vertex shrink (vertex-shrink) or cut-depth
    (facet-cut) fractions in [0, 1]; when omitted they are drawn from the
    seeded stream with the largest set to 1, so that δ' = δ.
    """

    family: str
    n: int
    delta: float
    seed: int = 0
    sample: int = 0
    fractions: Optional[tuple] = None
    tilt: float = CUT_TILT

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if not 2 <= self.n <= 5:
            raise ValueError(f"dimension must be in 2..5, got {self.n}")
        if not 0 <= self.delta <= MAX_DELTA:
            raise ValueError(f"delta must be in [0, {MAX_DELTA}], got {self.delta}")
        if self.fractions is not None:
            fr = tuple(float(f) for f in self.fractions)
            if len(fr) != self.n + 1 or any(not 0 <= f <= 1 for f in fr):
                raise ValueError(f"fractions must be {self.n + 1} values in [0, 1]")
            object.__setattr__(self, "fractions", fr)
        if not 0 <= self.tilt <= 0.25:
            raise ValueError("tilt must be in [0, 0.25]")

    def rng(self):
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.sample,)))


_SIMPLICES = {}


def reference_simplex(n) -> RegularSimplex:
    if n not in _SIMPLICES:
        _SIMPLICES[n] = RegularSimplex(n)
    return _SIMPLICES[n]


def _fractions(spec, rng):
    drawn = rng.uniform(0.0, 1.0, spec.n + 1)
    drawn[rng.integers(spec.n + 1)] = 1.0
    return np.array(spec.fractions) if spec.fractions is not None else drawn


def generate(spec: GeneratorSpec) -> Polytope:
    s = reference_simplex(spec.n)
    v = s.vertices
    rng = spec.rng()
    fr = _fractions(spec, rng)
    if spec.delta == 0:
        return s.polytope
    if spec.family == "scaling":
        return convex_hull((1 - spec.delta) * v)
    if spec.family == "vertex-shrink":
        pts = np.vstack([-v / spec.n, (1 - spec.delta * fr)[:, None] * v])
        return convex_hull(pts)
    if spec.family == "facet-cut":
        hs = [(-spec.n * vj, 1.0) for vj in v]
        for j, vj in enumerate(v):
            u = rng.normal(size=spec.n)
            u -= (u @ vj) * vj
            u *= spec.tilt * rng.uniform() / np.linalg.norm(u)
            if fr[j] > 0:
                # <a, v_j> = 1 = h_Δ(a), so the cut passes through (1 - fδ) v_j
                hs.append((vj + u, 1.0 - fr[j] * spec.delta))
        return halfspace_intersection(hs, np.zeros(spec.n))
    # random-support
    m = 4 * (spec.n + 1)
    pts = [(1 - spec.delta * fr)[:, None] * v]
    omit = rng.integers(spec.n + 1, size=m)
    for j in omit:
        w = rng.dirichlet(np.ones(spec.n))
        others = np.delete(v, j, axis=0)
        pts.append(((1 - spec.delta * rng.uniform()) * (w @ others))[None, :])
    return convex_hull(np.vstack(pts))


# ------------------------------------------------------------------ records

def csv_columns(n):
    return (
        ["family", "n", "seed", "record_index", "delta_spec", "delta_actual", "hausdorff"]
        + [f"santalo_x{i + 1}" for i in range(n)]
        + [
            "vol_K",
            "vol_polar_s",
            "vp",
            "vol_polar_0_product",
            "lemma32_margin",
            "lemma33_P_ratio",
            "lemma33_Pp_ratio",
            "lemma34_ratio",
            "prop35_ratio",
            "facet_centroids_ok",
            "runtime_ms",
        ]
    )


@dataclass
class ExperimentRecord:
    spec: GeneratorSpec
    record_index: int
    delta_actual: Optional[float] = None
    hausdorff: Optional[float] = None
    santalo: Optional[np.ndarray] = None
    vol_K: Optional[float] = None
    vol_polar_s: Optional[float] = None
    vp: Optional[float] = None
    vol_polar_0_product: Optional[float] = None
    facet_centroids_ok: Optional[bool] = None
    report: Optional[dict] = None
    runtime_ms: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None

    def lemma(self, section, key):
        if self.report is None:
            return None
        return self.report[section][key]

    def row(self):
        n = self.spec.n
        s = [None] * n if self.santalo is None else list(self.santalo)
        return (
            [self.spec.family, n, self.spec.seed, self.record_index, self.spec.delta,
             self.delta_actual, self.hausdorff]
            + s
            + [
                self.vol_K,
                self.vol_polar_s,
                self.vp,
                self.vol_polar_0_product,
                self.lemma("lemma32", "margin"),
                self.lemma("lemma33", "P_ratio"),
                self.lemma("lemma33", "P_dual_ratio"),
                self.lemma("lemma34", "ratio"),
                self.lemma("prop35", "ratio"),
                self.facet_centroids_ok,
                self.runtime_ms,
            ]
        )


def compute_record(spec: GeneratorSpec, record_index: int = 0, lemmas: bool = True,
                   timing: bool = False) -> ExperimentRecord:
    """Generate the body of ``spec`` and measure everything a sweep row reports.

    Geometric failures are caught and stored in ``error``.
    """
    rec = ExperimentRecord(spec, record_index)
    start = time.perf_counter()
    try:
        s = reference_simplex(spec.n)
        k = generate(spec)
        rec.delta_actual = sandwich_delta(k, s)
        rec.hausdorff = hausdorff(k, s.polytope)
        sol = santalo_point(k)
        rec.santalo = np.array(sol.point)
        rec.vol_K = k.volume
        rec.vol_polar_s = sol.polar_volume
        rec.vp = rec.vol_K * rec.vol_polar_s
        rec.vol_polar_0_product = rec.vol_K * polar(k).volume
        rec.facet_centroids_ok = facet_centroids_inside(k, s)
        if lemmas:
            rec.report = lemma_report(k, s)
    except GeometryError as exc:
        log.warning("record %d (%s) failed: %s", record_index, spec, exc)
        rec.error = f"{type(exc).__name__}: {exc}"
    if timing:
        rec.runtime_ms = round((time.perf_counter() - start) * 1000.0, 3)
    return rec


def _compute_star(args):
    return compute_record(*args)


def sweep_specs(families, n, deltas, samples, seed, fractions=None):
    if isinstance(families, str):
        families = [families]
    deltas = list(deltas)
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("delta grid must be strictly decreasing")
    if any(not 0 < d <= MAX_DELTA for d in deltas):
        raise ValueError(f"delta grid must lie in (0, {MAX_DELTA}]")
    return [
        GeneratorSpec(fam, n, d, seed, i, fractions)
        for fam in families
        for d in deltas
        for i in range(samples)
    ]


def run_records(specs, lemmas=True, jobs=1, timing=False):
    """Compute records in order; ``jobs > 1`` uses a process pool with identical output."""
    args = [(spec, i, lemmas, timing) for i, spec in enumerate(specs)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_compute_star, args, chunksize=4))
    return [_compute_star(a) for a in args]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(records, path, n=None):
    n = records[0].spec.n if n is None else n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_columns(n))
        for rec in records:
            w.writerow([_fmt(v) for v in rec.row()])


def read_csv(path):
    """Rows as dicts with numeric fields converted (blank -> None)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            conv = {}
            for key, val in row.items():
                if key == "family":
                    conv[key] = val
                elif val == "":
                    conv[key] = None
                elif val in ("true", "false"):
                    conv[key] = val == "true"
                elif key in ("n", "seed", "record_index"):
                    conv[key] = int(val)
                else:
                    conv[key] = float(val)
            out.append(conv)
    return out


# ------------------------------------------------------------------ summaries


@dataclass
class SweepSummary:
    kind: str
    family: str
    n: int
    deltas: list
    per_delta: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    records: list = field(default_factory=list, repr=False)

    @property
    def passed(self):
        return all(v for v in self.checks.values() if v is not None)

    def to_dict(self):
        return {
            "kind": self.kind,
            "family": self.family,
            "n": self.n,
            "deltas": list(self.deltas),
            "per_delta": self.per_delta,
            "fits": {k: (None if v is None else v.as_dict()) for k, v in self.fits.items()},
            "constants": self.constants,
            "checks": self.checks,
            "passed": self.passed,
            "notes": self.notes,
            "failures": self.failures,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, default=_json_default)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _family_label(families):
    return families if isinstance(families, str) else "+".join(families)


def _loglog_or_none(points, floor=1e-11):
    """log-log fit of positive data; ``None`` when the data vanish identically."""
    pts = [(x, y) for x, y in points if y is not None]
    if len(pts) < 3 or all(y <= floor for _, y in pts):
        return None
    if any(y <= 0 for _, y in pts):
        raise GeometryError("cannot fit exponent to data with zero entries")
    return fit_loglog(pts)


def theorem_summary(records, family_label, n, deltas):
    """Aggregate VP(K) - VP(Δ_n) per δ and fit the per-δ minima linearly."""
    base = simplex_volume_product(n)
    summary = SweepSummary("theorem", family_label, n, list(deltas), records=records)
    summary.failures = [{"record_index": r.record_index, "error": r.error} for r in records if not r.ok]
    good = [r for r in records if r.ok]
    trivial = all(r.spec.family in AFFINE_TRIVIAL for r in good)
    minima = []
    for d in deltas:
        rows = [r for r in good if r.spec.delta == d]
        gaps = [r.vp - base for r in rows]
        if not gaps:
            continue
        minima.append((d, min(gaps)))
        summary.per_delta.append({
            "delta": d,
            "count": len(gaps),
            "min_gap": min(gaps),
            "mean_gap": float(np.mean(gaps)),
            "min_gap_over_delta": min(gaps) / d,
            "max_vp": max(r.vp for r in rows),
        })
    fit = fit_linear(minima) if len(minima) >= 3 else None
    summary.fits["vp_gap_vs_delta"] = fit
    fit_records = [r for r in good if r.spec.family not in AFFINE_TRIVIAL]
    summary.constants["C_empirical"] = min((r.vp - base) / r.spec.delta for r in fit_records) if fit_records else None
    summary.checks["no_failures"] = not summary.failures
    summary.checks["vp_never_exceeds_polar_at_0"] = all(r.vp <= r.vol_polar_0_product * (1 + 1e-12) for r in good)
    if trivial:
        summary.notes.append("affine-trivial family: VP(K) = VP(simplex), excluded from the slope claim")
        summary.checks["affine_trivial_flat"] = all(abs(r.vp - base) <= 1e-9 * base for r in good)
    else:
        summary.checks["all_above_simplex"] = all(r.vp - base > 0 for r in fit_records)
        summary.checks["slope_positive"] = None if fit is None else bool(fit.slope > 0)
    if n == 2:
        summary.checks["planar_mahler"] = all(r.vp >= base - 1e-9 for r in good)
    return summary


def run_theorem_sweep(family, n, deltas, samples=20, seed=0, jobs=1, timing=False, lemmas=True):
    """δ-sweep of VP(K) - VP(Δ_n) over one or more families."""
    if n > 4:
        raise ValueError("sweeps are limited to n <= 4")
    specs = sweep_specs(family, n, deltas, samples, seed)
    records = run_records(specs, lemmas=lemmas, jobs=jobs, timing=timing)
    return theorem_summary(records, _family_label(family), n, deltas)


def run_santalo_stability(family, n, deltas, seed=0, samples=1, fractions=None, jobs=1):
    """Ratio |s(K) - s(Δ_n)| / d_H(K, Δ_n) along a δ grid (s(Δ_n) = 0)."""
    specs = sweep_specs(family, n, deltas, samples, seed, fractions)
    records = run_records(specs, lemmas=False, jobs=jobs)
    summary = SweepSummary("santalo_stability", _family_label(family), n, list(deltas), records=records)
    summary.failures = [{"record_index": r.record_index, "error": r.error} for r in records if not r.ok]
    good = [r for r in records if r.ok]
    ratios_by_delta = []
    pairs = []
    for d in deltas:
        rows = [r for r in good if r.spec.delta == d]
        ratios = [float(np.linalg.norm(r.santalo)) / r.hausdorff for r in rows if r.hausdorff > 0]
        pairs.extend((r.hausdorff, float(np.linalg.norm(r.santalo))) for r in rows)
        if ratios:
            ratios_by_delta.append(float(np.mean(ratios)))
            summary.per_delta.append({"delta": d, "mean_ratio": float(np.mean(ratios)), "max_ratio": max(ratios)})
    bound = max((p["max_ratio"] for p in summary.per_delta), default=None)
    summary.constants["ratio_bound"] = bound
    half = len(ratios_by_delta) // 2
    large, small = ratios_by_delta[:half], ratios_by_delta[len(ratios_by_delta) - half:]
    trend = None
    if half:
        trend = bool(np.mean(small) <= 1.2 * np.mean(large) + 1e-12)
        summary.constants["small_delta_mean_ratio"] = float(np.mean(small))
        summary.constants["large_delta_mean_ratio"] = float(np.mean(large))
    summary.checks["no_failures"] = not summary.failures
    summary.checks["no_growth_as_delta_shrinks"] = trend
    summary.fits["santalo_vs_hausdorff"] = _loglog_or_none(pairs, floor=1e-12)
    return summary


def run_square_order(body: Polytope, samples: int = 8, seed: int = 0, shells: Sequence[float] = None):
    """Growth of ``|K^z| / |K^{s(K)}| - 1`` on spheres around the Santaló point.

    ``shells`` are radii relative to the inradius r_0 at s(K); the default
    geometric grid runs from r_0/4 down to r_0/128.
    """
    sol = santalo_point(body)
    s = sol.point
    r0 = inradius_at(body, s)
    rel = [2.0 ** -k for k in range(2, 8)] if shells is None else list(shells)
    if any(not 0 < x <= 0.5 for x in rel):
        raise ValueError("shell radii must lie in (0, r0/2]")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, body.dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    summary = SweepSummary("square_order", "body", body.dim, rel)
    points = []
    for x in rel:
        rho = x * r0
        excess = []
        for u in dirs:
            try:
                excess.append(polar_volume(body, s + rho * u) / sol.polar_volume - 1.0)
            except GeometryError as exc:
                log.info("shell rho=%g skipped: %s", rho, exc)
        if not excess:
            continue
        mean = float(np.mean(excess))
        points.append((rho, mean))
        summary.per_delta.append({
            "rho": rho,
            "rho_over_r0": x,
            "mean_excess": mean,
            "min_excess": float(np.min(excess)),
            "max_excess": float(np.max(excess)),
            "excess_over_rho": mean / rho,
            "c_estimate": float(np.max(excess)) / x ** 2,
        })
    fit = fit_loglog(points)
    summary.fits["excess_vs_rho"] = fit
    summary.constants.update({
        "r0": r0,
        "santalo_point": s.tolist(),
        "c_empirical": max(p["c_estimate"] for p in summary.per_delta),
        "exponent": fit.exponent,
    })
    lin = [p["excess_over_rho"] for p in summary.per_delta]
    shrink = summary.per_delta[-1]["rho"] / summary.per_delta[0]["rho"]
    summary.checks["excess_positive"] = all(p["min_excess"] > 0 for p in summary.per_delta)
    summary.checks["exponent_at_least_1.9"] = bool(fit.exponent >= 1.9)
    summary.checks["first_order_vanishes"] = bool(lin[-1] <= lin[0] * np.sqrt(shrink))
    return summary


def lemma_summary(records, family_label, n, deltas):
    summary = SweepSummary("lemma_suite", family_label, n, list(deltas), records=records)
    summary.failures = [{"record_index": r.record_index, "error": r.error} for r in records if not r.ok]
    good = [r for r in records if r.ok and r.report is not None]
    hyp = [r for r in good if r.report["facet_centroids_ok"]]
    if len(hyp) < len(good):
        summary.notes.append(f"{len(good) - len(hyp)} bodies miss a facet centroid; excluded from the dichotomy and gap-ratio checks")
    diff_p, diff_pp = [], []
    for d in deltas:
        rows = [r for r in good if r.spec.delta == d]
        if not rows:
            continue
        dp = max(r.report["lemma33"]["P_minus_Q"] for r in rows)
        dpp = max(r.report["lemma33"]["P_dual_minus_Q_dual"] for r in rows)
        diff_p.append((d, dp))
        diff_pp.append((d, dpp))
        hrows = [r for r in hyp if r.spec.delta == d]
        summary.per_delta.append({
            "delta": d,
            "count": len(rows),
            "min_lemma32_margin": min(r.report["lemma32"]["margin"] for r in rows),
            "max_P_minus_Q": dp,
            "max_P_dual_minus_Q_dual": dpp,
            "max_lemma33_P_ratio": max(r.report["lemma33"]["P_ratio"] for r in rows),
            "max_lemma33_P_dual_ratio": max(r.report["lemma33"]["P_dual_ratio"] for r in rows),
            "min_lemma34_ratio": min((r.report["lemma34"]["ratio"] for r in hrows), default=None),
            "min_prop35_ratio": min((r.report["prop35"]["ratio"] for r in hrows), default=None),
            "max_lemma31_residual": max(r.report["lemma31"]["max_residual"] for r in rows),
        })
    fit_p = _loglog_or_none(diff_p)
    fit_pp = _loglog_or_none(diff_pp)
    summary.fits["P_minus_Q_vs_delta"] = fit_p
    summary.fits["P_dual_minus_Q_dual_vs_delta"] = fit_pp
    c34 = min((r.report["lemma34"]["ratio"] for r in hyp), default=None)
    c35 = min((r.report["prop35"]["ratio"] for r in hyp), default=None)
    summary.constants.update({
        "lemma34_c_prime": c34,
        "prop35_C": c35,
        "lemma33_C1": max((r.report["lemma33"]["P_ratio"] for r in good), default=None),
        "lemma33_C2": max((r.report["lemma33"]["P_dual_ratio"] for r in good), default=None),
        "lemma33_P_identically_zero": fit_p is None,
        "lemma33_P_dual_identically_zero": fit_pp is None,
    })
    summary.checks["no_failures"] = not summary.failures
    summary.checks["lemma31"] = all(r.report["lemma31"]["ok"] for r in good)
    summary.checks["lemma32"] = all(r.report["lemma32"]["margin"] >= -1e-9 for r in good)
    summary.checks["lemma33_P_exponent"] = True if fit_p is None else bool(fit_p.exponent >= 1.9)
    summary.checks["lemma33_P_dual_exponent"] = True if fit_pp is None else bool(fit_pp.exponent >= 1.9)
    summary.checks["lemma34"] = None if c34 is None else bool(c34 > 0)
    summary.checks["prop35"] = None if c35 is None else bool(c35 > 0)
    summary.checks["containments"] = all(all(r.report["containment"].values()) for r in good)
    return summary


def run_lemma_suite(family, n, deltas, samples=5, seed=0, jobs=1):
    specs = sweep_specs(family, n, deltas, samples, seed)
    records = run_records(specs, lemmas=True, jobs=jobs)
    return lemma_summary(records, _family_label(family), n, deltas)
