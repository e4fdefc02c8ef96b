from math import factorial

import numpy as np
import pytest

from volprod.errors import NotInteriorError, SandwichError
from volprod.experiments import GeneratorSpec, generate
from volprod.polytope import contains, convex_hull
from volprod.simplexflags import (
    RegularSimplex,
    build_flag_polytopes,
    lemma_report,
    sandwich_delta,
    tangent_data,
    tangent_touch,
    tangent_touch_dual,
)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_face_and_flag_counts(n):
    s = RegularSimplex(n)
    assert len(s.faces) == 2 ** (n + 1) - 2
    assert len(s.flags()) == factorial(n + 1)
    dims = [f.dim for f in s.faces]
    assert dims == sorted(dims)
    for f in s.faces:
        assert f.centroid @ f.dual_centroid == pytest.approx(1.0)


def test_regular_simplex_geometry():
    s = RegularSimplex(3)
    np.testing.assert_allclose(np.linalg.norm(s.vertices, axis=1), 1.0)
    np.testing.assert_allclose(s.vertices.sum(axis=0), 0.0, atol=1e-15)
    G = s.vertices @ s.vertices.T
    np.testing.assert_allclose(G[~np.eye(4, dtype=bool)], -1 / 3)
    with pytest.raises(ValueError):
        RegularSimplex(1)


def _bisection_delta(k, s):
    """Oracle: for each vertex direction, bisect on membership of t v_j."""
    taus = []
    for v in s.vertices:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = (lo + hi) / 2
            lo, hi = (mid, hi) if contains(k, mid * v, tol=0.0) else (lo, mid)
        taus.append(lo)
    return 1 - min(taus)


@pytest.mark.parametrize("family", ["vertex-shrink", "facet-cut", "random-support"])
def test_sandwich_delta_against_bisection(family):
    s = RegularSimplex(3)
    for sample in range(3):
        k = generate(GeneratorSpec(family, 3, 0.03, seed=5, sample=sample))
        assert sandwich_delta(k, s) == pytest.approx(_bisection_delta(k, s), abs=1e-12)


def test_sandwich_errors():
    s = RegularSimplex(2)
    with pytest.raises(SandwichError):
        sandwich_delta(convex_hull(1.1 * s.vertices), s)
    near_vertex = convex_hull(0.9 * s.vertices[0] + 0.05 * s.vertices)
    with pytest.raises(NotInteriorError):
        sandwich_delta(near_vertex, s)


@pytest.mark.parametrize("n", [2, 3])
def test_simplex_is_its_own_tangent_configuration(n):
    s = RegularSimplex(n)
    for key, td in tangent_data(s.polytope, s).items():
        assert td.t == pytest.approx(1.0)
        np.testing.assert_allclose(td.x, td.y, atol=1e-12)
        np.testing.assert_allclose(td.y, s.face(key).centroid, atol=1e-12)
        np.testing.assert_allclose(td.y_star, s.face(key).dual_centroid, atol=1e-12)
    fp = build_flag_polytopes(s.polytope, s)
    assert fp.Q.absolute == pytest.approx(s.volume)
    assert fp.Q_dual.absolute == pytest.approx(s.polar_volume)
    assert fp.P.signed == pytest.approx(fp.P.absolute)
    assert not any([fp.P.overlap, fp.Q.overlap, fp.P_dual.overlap, fp.Q_dual.overlap])


def test_control_report_at_delta_zero():
    s = RegularSimplex(2)
    rep = lemma_report(s.polytope, s)
    assert rep["delta"] <= 1e-12
    assert abs(rep["lemma32"]["margin"]) <= 1e-9
    assert rep["lemma33"]["P_ratio"] is None and rep["lemma34"]["ratio"] is None
    assert rep["prop35"]["ratio"] is None
    assert rep["lemma31"]["ok"]


def test_primal_and_dual_tangents_are_reciprocal():
    s = RegularSimplex(2)
    k = generate(GeneratorSpec("random-support", 2, 0.04, seed=2))
    for f in s.faces:
        t, x, y = tangent_touch(k, s, f)
        ts, xs, ys = tangent_touch_dual(k, s, f, t=t)
        assert t * ts == pytest.approx(1.0, abs=1e-9)
        assert x @ xs == pytest.approx(1.0, abs=1e-9)
        assert 1 - 0.04 - 1e-12 <= t <= 1.0


@pytest.mark.parametrize("n", [2, 3])
def test_report_on_generated_body(n):
    s = RegularSimplex(n)
    k = generate(GeneratorSpec("facet-cut", n, 0.02, seed=11))
    rep = lemma_report(k, s)
    assert rep["delta"] == pytest.approx(0.02, abs=1e-12)
    assert rep["lemma31"]["ok"] and rep["lemma32"]["ok"]
    assert all(rep["containment"].values())
    assert rep["prop35"]["ratio"] > 0
    assert set(rep) == {"n", "delta", "facet_centroids_ok", "volumes", "overlap", "containment",
                        "lemma31", "lemma32", "lemma33", "lemma34", "prop35"}
