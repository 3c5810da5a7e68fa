from fractions import Fraction
from math import factorial

import mpmath
import pytest
from mpmath import mpf

from triakis.critical import OCTA_CHI2, TETRA_CHI1, isolate_positive_roots, r0_exact
from triakis.geometry import build, cross, dot, vsub
from triakis.harmonic import b3_system, solve
from triakis.meanvalue import (direct_defect, edge_rule, mean_value_defect, sample_centers, skeleton_measure,
                               skeleton_moments, tetra_rule, triangle_rule, verify_space)
from triakis.polycore import (Poly, alternating_a3, alternating_b3, e2, jumped_generator, monomials_of_degree,
                              to_float)

RADII = (Fraction(1, 2), Fraction(1), Fraction(2))


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.parametrize("family,r,k,want", [("tetra", 1, 0, 8), ("tetra", 3, 3, 8), ("octa", 1, 3, Fraction(4, 3)),
                                             ("octa", 2, 0, 14)])
def test_measure_examples(family, r, k, want):
    with mpmath.workprec(100):
        assert abs(skeleton_measure(build(family, r), k) - to_float(want)) < mpf("1e-25")


def test_measures_against_elementary_formulas():
    inst = build("octa", Fraction(5, 2))
    with mpmath.workprec(100):
        length = mpmath.fsum(mpmath.sqrt(dot(vsub(inst.vertices[e.vertices[0]], inst.vertices[e.vertices[1]]),
                                             vsub(inst.vertices[e.vertices[0]], inst.vertices[e.vertices[1]])))
                             for e in inst.edges)
        assert rel(skeleton_measure(inst, 1), length) < mpf("1e-25")
        # each of the 8 pyramids adds (1/3) * base area * height over the regular octahedron
        face_area = mpmath.sqrt(3) / 2
        height = (mpf(5) / 2 - 1) / mpmath.sqrt(3)
        assert rel(skeleton_measure(inst, 3), mpf(4) / 3 + 8 * face_area * height / 3) < mpf("1e-25")


@pytest.mark.parametrize("degree", range(0, 14))
def test_quadrature_exactness(degree):
    with mpmath.workprec(100):
        edge, tri, tet = edge_rule(), triangle_rule(), tetra_rule()
        assert edge.degree >= 14 and tri.degree >= 14 and tet.degree >= 14
        got = mpmath.fsum(w * s ** degree for (s,), w in zip(edge.nodes, edge.weights))
        assert rel(got, mpf(1) / (degree + 1)) < mpf("1e-14")
        for a in range(degree + 1):
            b = degree - a
            got = mpmath.fsum(w * s ** a * t ** b for (s, t), w in zip(tri.nodes, tri.weights))
            want = mpf(factorial(a) * factorial(b)) / factorial(a + b + 2)
            assert rel(got, want) < mpf("1e-14")
        for a, b, c in monomials_of_degree(degree):
            got = mpmath.fsum(w * s ** a * t ** b * u ** c for (s, t, u), w in zip(tet.nodes, tet.weights))
            want = mpf(factorial(a) * factorial(b) * factorial(c)) / factorial(a + b + c + 3)
            assert rel(got, want) < mpf("1e-14")


def test_rule_measures():
    with mpmath.workprec(100):
        assert abs(edge_rule().measure - 1) < mpf("1e-25")
        assert abs(triangle_rule().measure - mpf(1) / 2) < mpf("1e-25")
        assert abs(tetra_rule().measure - mpf(1) / 6) < mpf("1e-25")


def test_constants_have_no_defect():
    inst = build("tetra", Fraction(5, 2))
    for k in range(4):
        assert mean_value_defect(inst, k, Poly.const(1), (Fraction(1, 3), 0, 2), 3) < mpf("1e-25")


def test_e2_vertex_average():
    inst = build("octa", 1)
    # 6 unit vertices and 8 apexes of squared length 1/3
    want = (6 + 8 * Fraction(1, 3)) / 14
    with mpmath.workprec(100):
        got = mean_value_defect(inst, 0, e2(), (0, 0, 0), 1)
        assert abs(got - mpf(want.numerator) / want.denominator) < mpf("1e-25")
        assert got > 0


def test_alternating_polynomial_passes_at_vertex_critical_value():
    inst = build("octa", r0_exact())
    for x in sample_centers():
        for rho in RADII:
            assert mean_value_defect(inst, 0, alternating_b3(), x, rho) < mpf("1e-10")


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_moment_functional_matches_direct_quadrature(k):
    inst = build("tetra", Fraction(7, 3))
    f = alternating_a3() + e2() * 3
    for x, rho in ((sample_centers()[0], Fraction(1, 2)), (sample_centers()[3], Fraction(2))):
        a = mean_value_defect(inst, k, f, x, rho)
        b = direct_defect(inst, k, f, x, rho)
        assert abs(a - b) <= mpf("1e-20") * max(1, abs(b))


def test_volume_rules_agree():
    inst = build("tetra", Fraction(5, 4))
    with mpmath.workprec(100):
        cone = skeleton_moments(inst, 3, 8, "cone").values
        tet = skeleton_moments(inst, 3, 8, "tetra").values
        assert max(abs(cone[m] - tet[m]) for m in cone) < mpf("1e-25")


def test_edge_space_at_critical_value():
    r1 = isolate_positive_roots(TETRA_CHI1).values[0]
    rep = verify_space(build("tetra", r1), 1, solve(b3_system(), 9))
    assert rep.ok, rep.failures
    assert len(rep.defects) == 48
    assert rep.counterexamples["e2"] > mpf("1e-3")


def test_jumped_generator_fails_away_from_critical_value():
    rep = verify_space(build("octa", 2), 0, [("F", jumped_generator())])
    assert not rep.ok
    assert rep.defects["F"] > mpf("1e-4")


@pytest.mark.parametrize("family,r", [("octa", None), ("octa", Fraction(2)), ("octa", Fraction(5, 4)),
                                      ("tetra", Fraction(2)), ("tetra", Fraction(9, 2))])
def test_face_and_volume_verdicts_agree(family, r):
    r = isolate_positive_roots(OCTA_CHI2).values[0] if r is None else r
    inst = build(family, r)
    polys = {"e2": e2(), "A3": alternating_a3(), "B3": alternating_b3(), "F": jumped_generator()}
    face, volume = (verify_space(inst, k, list(polys.items()), counterexamples={}).defects for k in (2, 3))
    for name in polys:
        for worst in (face[name], volume[name]):
            assert worst < mpf("1e-9") or worst > mpf("1e-4"), (name, worst)
        assert (face[name] < mpf("1e-9")) == (volume[name] < mpf("1e-9")), name


def test_faces_are_oriented_outward():
    from triakis.meanvalue import oriented_faces

    inst = build("tetra", Fraction(1, 2))
    with mpmath.workprec(100):
        vol = mpmath.fsum(dot(a, cross(b, c)) / 6 for a, b, c in oriented_faces(inst))
        assert vol > 0
        # excavated pyramids remove volume from the cube-inscribed tetrahedron (volume 8/3)
        assert vol < mpf(8) / 3


def test_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        mean_value_defect(build("tetra", 2), 0, e2(), (0, 0, 0), 0)
