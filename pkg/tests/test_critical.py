from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from triakis.closed_forms import coefficient_closed_forms
from triakis.critical import (OCTA_CHI1, OCTA_CHI2, OCTA_R0, TETRA_CHI1, UnivariatePoly, a6_face_minimum,
                              count_roots, critical_scan, isolate_positive_roots, r0_exact, sign_certificates,
                              sturm_sequence, squarefree_part, verify_radical_identity)
from triakis.geometry import Family, build
from triakis.invariants import decision_coefficients


@pytest.mark.parametrize("poly,approx", [(TETRA_CHI1, "3.62398"), (OCTA_CHI1, "2.24580"), (OCTA_CHI2, "1.82977")])
def test_unique_positive_roots(poly, approx):
    rep = isolate_positive_roots(poly)
    assert rep.unique
    (lo, hi), value = rep.intervals[0], rep.values[0]
    assert hi - lo <= Fraction(1, 10**12)
    assert poly(lo) * poly(hi) < 0
    assert abs(value - mpf(approx)) < mpf("1e-5")
    with mpmath.workprec(100):
        assert abs(poly(value)) < mpf("1e-9")


def test_vertex_root_is_closed_form():
    rep = isolate_positive_roots(OCTA_R0)
    assert rep.unique
    with mpmath.workprec(100):
        assert abs(rep.values[0] - 3 * mpf(2) ** mpf(-0.75)) < mpf("1e-25")
    assert abs(r0_exact() - mpf("1.78381")) < mpf("1e-5")


def test_rational_roots_are_exact():
    p = UnivariatePoly.from_descending([-1, 0, 0, 27])
    rep = isolate_positive_roots(p)
    assert rep.intervals == [(Fraction(3), Fraction(3))]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=5))
def test_sturm_counts_match_constructed_roots(roots):
    p = UnivariatePoly([1])
    for a in roots:
        p = p * UnivariatePoly([-a, 1])
    seq = sturm_sequence(squarefree_part(p))
    assert count_roots(seq, Fraction(0), Fraction(100)) == len({a for a in roots if a > 0})
    assert isolate_positive_roots(p).positive_root_count == len({a for a in roots if a > 0})


@pytest.mark.parametrize("family", ["tetra", "octa"])
def test_radical_identity(family):
    rep = verify_radical_identity(family)
    assert rep.ok, rep.failures
    assert len(rep.samples) == 20
    assert rep.max_relative < mpf("1e-25")


def test_radical_identity_near_root():
    root = isolate_positive_roots(TETRA_CHI1).values[0]
    with mpmath.workprec(128):
        a3 = coefficient_closed_forms("tetra", 1, 3, root, 128)
        assert abs(a3) < mpf("1e-25")
        assert abs(TETRA_CHI1(root)) < mpf("1e-25")


def test_octa_edge_coefficient_at_zero():
    with mpmath.workprec(100):
        got = coefficient_closed_forms("octa", 1, 4, Fraction(0))
        assert abs(got - (-4 * (4 + 3 * mpmath.sqrt(2)))) < mpf("1e-25")


@pytest.mark.parametrize("family,psi0", [("tetra", 81), ("octa", 243)])
def test_sign_certificates(family, psi0):
    rep = sign_certificates(family, grid_points=400)
    assert rep.ok, [c for c in rep.checks if not c.ok]
    assert rep.get("psi(0) > 0").detail == str(psi0)


def test_face_coefficient_minimum():
    x_golden, r_min, v_min = a6_face_minimum()
    assert abs(x_golden - 0.743471) < 1e-4
    assert abs(r_min - mpf("0.743471")) < mpf("1e-4")
    assert abs(v_min - mpf("22.0304")) < mpf("1e-3")
    # every other grid value is larger
    with mpmath.workprec(100):
        grid = [mpf(i) / 200 for i in range(0, 1000)]
        assert min(coefficient_closed_forms("octa", 2, 6, x) for x in grid) >= v_min


def test_scan_tetra_edge():
    scan = critical_scan("tetra", 1)
    (c,) = scan.critical
    assert abs(c.r - mpf("3.62398")) < mpf("1e-5")
    assert c.space == "B3Space" and c.dimension == 48
    assert min(abs(v[0]) for v in c.companions.values()) > 1


def test_scan_tetra_vertex_has_no_critical_value():
    scan = critical_scan("tetra", 0)
    assert scan.critical == []
    (c,) = scan.candidates
    assert c.r == 3 and c.symmetry == "B3" and c.certificate == "exact"


def test_scan_octa_face():
    (c,) = critical_scan("octa", 2).critical
    assert abs(c.r - mpf("1.82977")) < mpf("1e-5")
    assert abs(c.companions[8][0] - mpf("13.2853")) < mpf("1e-3")
    assert c.space == "JumpedSpace" and c.dimension == 96


@pytest.mark.parametrize("family,k", [("tetra", 1), ("octa", 0), ("octa", 1), ("octa", 2)])
def test_geometry_agrees_with_scan(family, k):
    (c,) = critical_scan(family, k).critical
    m = c.vanishing[0]
    with mpmath.workprec(100):
        assert abs(decision_coefficients(build(family, c.r), k, [m])[m]) < mpf("1e-8")
        for shift in (mpf("-0.01"), mpf("0.01")):
            assert abs(decision_coefficients(build(family, c.r + shift), k, [m])[m]) > mpf("1e-4")


def test_univariate_basics():
    p = UnivariatePoly.from_descending([1, -3, 2])
    assert p.degree == 2 and p(Fraction(1)) == 0
    assert p.derivative() == UnivariatePoly.from_descending([2, -3])
    with pytest.raises(ValueError):
        UnivariatePoly([0, 0])
    assert Family.parse("tetra") is Family.TETRA
