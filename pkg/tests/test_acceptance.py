"""Acceptance criteria, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion followed by the measured values.
"""
import time
from math import factorial, pi

import numpy as np
import pytest

from conftest import random_body
from volprod import experiments as ex
from volprod.numkit import fit_linear
from volprod.polarity import (
    ball_volume_product,
    polar,
    polar_volume,
    polar_volume_gradient,
    santalo_point,
    simplex_volume_product,
    volume_product,
)
from volprod.polytope import convex_hull, cube, inradius_at
from volprod.simplexflags import RegularSimplex

criterion = pytest.mark.criterion

GRID_N = 400


def _same_vertex_set(P, Q):
    d = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def _grid_polar_areas(k, xs, ys):
    """|K^z| on a grid by the shoelace formula, ordering polar vertices by normal angle.

    Each polar vertex a_i / (b_i - <a_i, z>) is a positive multiple of a_i, so
    the angular order of the normals is the cyclic order of the polar polygon.
    Points outside the interior get +inf.
    """
    order = np.argsort(np.arctan2(k.A[:, 1], k.A[:, 0]))
    A, b = k.A[order], k.b[order]
    Z = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    gaps = b - Z @ A.T
    inside = np.all(gaps > 1e-12, axis=-1)
    gaps = np.where(inside[..., None], gaps, 1.0)
    Px = A[:, 0] / gaps
    Py = A[:, 1] / gaps
    area = 0.5 * np.sum(Px * np.roll(Py, -1, axis=-1) - np.roll(Px, -1, axis=-1) * Py, axis=-1)
    return np.where(inside, area, np.inf)


@pytest.fixture(scope="module")
def theorem_sweep():
    start = time.perf_counter()
    summary = ex.run_theorem_sweep(["vertex-shrink", "facet-cut"], 2, [0.04, 0.02, 0.01], samples=20, seed=2024)
    return summary, time.perf_counter() - start


@pytest.fixture(scope="module")
def tangent_sweep():
    """60 bodies: three families, n = 2 and 3, δ in {0.04, 0.02}, five shapes each."""
    records = []
    for n in (2, 3):
        specs = ex.sweep_specs(["vertex-shrink", "facet-cut", "random-support"], n, [0.04, 0.02], 5, seed=77)
        records.extend(ex.run_records(specs))
    return records


@pytest.fixture(scope="module")
def lemma_sweep():
    return ex.run_lemma_suite(["vertex-shrink", "facet-cut"], 2, [0.04, 0.02, 0.01, 0.005], samples=10, seed=31)


@pytest.fixture(scope="module")
def stability_sweeps():
    grid = [0.04, 0.02, 0.01, 0.005]
    single = ex.run_santalo_stability("vertex-shrink", 2, grid, seed=5, fractions=(1, 0, 0))
    family = ex.run_santalo_stability("vertex-shrink", 2, grid, seed=5, samples=5)
    return single, family


@criterion(1, "exact baseline VP(simplex) for n = 2, 3, 4 within 1e-9 relative, under 10 s")
def test_c01_simplex_baseline(note):
    start = time.perf_counter()
    exact = {2: 6.75, 3: 256 / 36, 4: 3125 / 576}
    for n, value in exact.items():
        assert simplex_volume_product(n) == pytest.approx(value, rel=1e-15)
        vp = volume_product(RegularSimplex(n).polytope).vp
        rel = abs(vp - value) / value
        note(f"n={n}: VP={vp!r} relative error {rel:.1e}")
        assert rel <= 1e-9
    elapsed = time.perf_counter() - start
    note(f"runtime {elapsed:.2f} s")
    assert elapsed < 10


@criterion(2, "polar(simplex) = -n simplex within 1e-10; bipolar on 50 random bodies within 1e-8")
def test_c02_duality(note):
    worst = 0.0
    for n in (2, 3, 4, 5):
        s = RegularSimplex(n)
        worst = max(worst, _same_vertex_set(polar(s.polytope).vertices, -n * s.vertices))
    note(f"max vertex error polar(simplex) vs -n simplex: {worst:.1e}")
    assert worst <= 1e-10
    rng = np.random.default_rng(50)
    worst = 0.0
    for i in range(50):
        n = 2 + i % 3
        k = random_body(rng, n)
        z = 0.2 * rng.uniform(-1, 1, n)
        back = polar(convex_hull(polar(k, z).vertices))
        worst = max(worst, _same_vertex_set(back.vertices + z, k.vertices))
    note(f"max bipolar vertex error over 50 bodies (n = 2..4): {worst:.1e}")
    assert worst <= 1e-8


@criterion(3, "Santalo solver: centroid <= 1e-10, gradient vs finite differences, 400x400 grid oracle")
def test_c03_santalo_solver(note):
    rng = np.random.default_rng(3)
    bodies = [RegularSimplex(n).polytope for n in (2, 3, 4)] + [cube(n) for n in (2, 3, 4)]
    bodies += [random_body(rng, n) for n in (2, 3, 4) for _ in range(4)]
    bodies += [ex.generate(ex.GeneratorSpec(f, n, 0.04, seed=3)) for f in ex.FAMILIES for n in (2, 3, 4)]
    worst = max(santalo_point(k).centroid_norm for k in bodies)
    note(f"max centroid norm at s(K) over {len(bodies)} bodies: {worst:.1e}")
    assert worst <= 1e-10

    worst_rel = 0.0
    for n in (2, 3, 4):
        k = random_body(rng, n)
        z = santalo_point(k).point + 0.1 * rng.uniform(-1, 1, n) * inradius_at(k, santalo_point(k).point)
        _, g, _ = polar_volume_gradient(k, z)
        h = 1e-6
        fd = np.array([(polar_volume(k, z + h * e) - polar_volume(k, z - h * e)) / (2 * h) for e in np.eye(n)])
        worst_rel = max(worst_rel, np.linalg.norm(g - fd) / np.linalg.norm(g))
    note(f"gradient vs central differences, max relative error: {worst_rel:.1e}")
    assert worst_rel <= 1e-5

    worst_cells, worst_gap = 0.0, 0.0
    for i in range(10):
        k = random_body(rng, 2) if i % 2 else ex.generate(ex.GeneratorSpec("random-support", 2, 0.05, seed=i))
        sol = santalo_point(k)
        lo, hi = k.vertices.min(axis=0), k.vertices.max(axis=0)
        xs, ys = np.linspace(lo[0], hi[0], GRID_N), np.linspace(lo[1], hi[1], GRID_N)
        grid = _grid_polar_areas(k, xs, ys)
        ij = np.unravel_index(np.argmin(grid), grid.shape)
        cell = np.array([xs[1] - xs[0], ys[1] - ys[0]])
        offset = np.abs(np.array([xs[ij[0]], ys[ij[1]]]) - sol.point) / cell
        worst_cells = max(worst_cells, offset.max())
        worst_gap = max(worst_gap, (grid.min() - sol.polar_volume) / sol.polar_volume)
        # the solver's minimum may not lie above any grid value
        assert sol.polar_volume <= grid.min() * (1 + 1e-12)
    note(f"grid argmin offset from s(K): at most {worst_cells:.2f} cells per axis")
    note(f"grid minimum above solver minimum by at most {worst_gap:.1e} relative")
    assert worst_cells <= 1.0


@criterion(4, "tangent-point identities within 1e-9 on 60 bodies (n = 2, 3; delta <= 0.04)")
def test_c04_tangent_identities(tangent_sweep, note):
    reports = [r.report for r in tangent_sweep]
    assert len(reports) == 60 and all(r.ok for r in tangent_sweep)
    residual = max(rep["lemma31"]["max_residual"] for rep in reports)
    gap = max(rep["lemma31"]["max_gap_x_minus_2delta"] for rep in reports)
    gap_star = max(rep["lemma31"]["max_gap_x_star_minus_2ndelta"] for rep in reports)
    note(f"max identity residual {residual:.1e}")
    note(f"max |x_F - y_F| - 2 delta = {gap:.2e}; max |x*_F - y*_F| - 2 n delta = {gap_star:.2e}")
    assert residual <= 1e-9
    assert gap < 0 and gap_star < 0
    assert all(rep["lemma31"]["ok"] for rep in reports)


@criterion(5, "|Q||Q'| >= |simplex||simplex polar| margin >= -1e-9 on every sweep record")
def test_c05_q_volume_product(theorem_sweep, tangent_sweep, lemma_sweep, note):
    records = theorem_sweep[0].records + tangent_sweep + lemma_sweep.records
    margins = [r.report["lemma32"]["margin"] for r in records]
    note(f"{len(margins)} records, min margin {min(margins):.2e}")
    assert min(margins) >= -1e-9


@criterion(6, "||P|-|Q|| and ||P'|-|Q'|| scale with exponent >= 1.9 (n = 2, delta 0.04..0.005)")
def test_c06_flag_volume_exponents(lemma_sweep, note):
    fit_p = lemma_sweep.fits["P_minus_Q_vs_delta"]
    fit_pp = lemma_sweep.fits["P_dual_minus_Q_dual_vs_delta"]
    max_p = max(row["max_P_minus_Q"] for row in lemma_sweep.per_delta)
    if fit_p is None:
        # below the floor at every δ, the δ² bound holds for any positive constant
        note(f"||P|-|Q||: at most {max_p:.1e} at every delta, so no exponent can be fitted; "
             "the delta^2 bound holds trivially")
        assert max_p <= 1e-11
    else:
        note(f"||P|-|Q|| exponent {fit_p.exponent:.3f}")
        assert fit_p.exponent >= 1.9
    assert fit_pp is not None
    note(f"||P'|-|Q'|| exponent {fit_pp.exponent:.3f} (per-delta maxima over 20 bodies)")
    assert fit_pp.exponent >= 1.9


@criterion(7, "VP(K) > VP(simplex) on every record, positive slope of per-delta minima, under 5 min")
def test_c07_theorem_sweep(theorem_sweep, note):
    summary, elapsed = theorem_sweep
    base = simplex_volume_product(2)
    assert len(summary.records) == 120 and not summary.failures
    gaps = [r.vp - base for r in summary.records]
    note(f"120 records, min VP(K) - 27/4 = {min(gaps):.3e}; runtime {elapsed:.1f} s")
    assert min(gaps) > 0
    fit = summary.fits["vp_gap_vs_delta"]
    note(f"combined slope {fit.slope:.4f}, empirical C = {summary.constants['C_empirical']:.4f}")
    assert fit.slope > 0
    for fam in ("vertex-shrink", "facet-cut"):
        minima = [(d, min(r.vp - base for r in summary.records if r.spec.family == fam and r.spec.delta == d))
                  for d in summary.deltas]
        slope = fit_linear(minima).slope
        note(f"{fam} slope {slope:.4f}")
        assert slope > 0
    assert elapsed < 300


@criterion(8, "|s(K)| / d_H(K, simplex) shows no growth as delta shrinks and is bounded")
def test_c08_santalo_stability(stability_sweeps, note):
    for label, summary in zip(("single-vertex shrink", "vertex-shrink, 5 shapes"), stability_sweeps):
        c = summary.constants
        note(f"{label}: ratio bound {c['ratio_bound']:.4f}; mean ratio "
             f"small-delta half {c['small_delta_mean_ratio']:.4f} vs large-delta half {c['large_delta_mean_ratio']:.4f}")
        assert not summary.failures
        assert summary.checks["no_growth_as_delta_shrinks"]
        assert np.isfinite(c["ratio_bound"]) and c["ratio_bound"] > 0


@criterion(9, "(|K^z|/|K^s| - 1) vs |z - s| exponent in [1.9, 2.1] for the triangle and 5 perturbed bodies")
def test_c09_square_order(note):
    bodies = [("triangle", RegularSimplex(2).polytope)]
    bodies += [(f"{fam} seed {seed}", ex.generate(ex.GeneratorSpec(fam, 2, 0.05, seed=seed)))
               for seed, fam in enumerate(["vertex-shrink", "facet-cut", "random-support", "random-support",
                                           "vertex-shrink"])]
    for label, body in bodies:
        summary = ex.run_square_order(body, samples=8, seed=9)
        e = summary.fits["excess_vs_rho"].exponent
        note(f"{label}: exponent {e:.4f}, c estimate {summary.constants['c_empirical']:.3f}")
        assert 1.9 <= e <= 2.1
        assert summary.checks["first_order_vanishes"]


@criterion(10, "planar Mahler VP >= 27/4 - 1e-9; Blaschke-Santalo upper bound holds")
def test_c10_planar_and_upper_bounds(theorem_sweep, tangent_sweep, lemma_sweep, note):
    records = theorem_sweep[0].records + tangent_sweep + lemma_sweep.records
    records += ex.run_records(ex.sweep_specs(["random-support", "scaling"], 4, [0.04, 0.01], 3, seed=10))
    planar = [r.vp for r in records if r.spec.n == 2]
    note(f"{len(planar)} planar generated bodies, min VP {min(planar):.6f}")
    assert min(planar) >= 27 / 4 - 1e-9
    highest = max(r.vp for r in records)
    note(f"{len(records)} generated bodies (n = 2, 3, 4), max VP {highest:.6f} <= pi^2")
    assert highest <= pi**2 + 1e-6
    # reference bodies far from the simplex: the ball bound in their own dimension
    rng = np.random.default_rng(10)
    for n in (2, 3, 4):
        for k in [cube(n)] + [random_body(rng, n) for _ in range(5)]:
            vp = volume_product(k).vp
            assert vp <= ball_volume_product(n) + 1e-6
            if n == 2:
                assert 27 / 4 - 1e-9 <= vp <= pi**2 + 1e-6
    note(f"cube:3 VP = {4.0 ** 3 / factorial(3):.4f} exceeds pi^2 but not the 3-ball value "
         f"{ball_volume_product(3):.4f}")


@criterion(11, "repeated sweep with identical seed gives bitwise-identical CSV")
def test_c11_determinism(tmp_path, note):
    specs = ex.sweep_specs(["vertex-shrink", "facet-cut", "random-support"], 2, [0.04, 0.02, 0.01], 4, seed=99)
    paths = [tmp_path / "first.csv", tmp_path / "second.csv", tmp_path / "parallel.csv"]
    ex.write_csv(ex.run_records(specs), paths[0])
    ex.write_csv(ex.run_records(specs), paths[1])
    ex.write_csv(ex.run_records(specs, jobs=3), paths[2])
    data = [p.read_bytes() for p in paths]
    note(f"{len(specs)} records, {len(data[0])} bytes; serial, repeat and 3-process runs identical")
    assert data[0] == data[1] == data[2]
