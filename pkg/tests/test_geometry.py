from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf, sqrt

from triakis.geometry import (Family, GeometryError, build, cross, det3, dot, enumerate_flags, flag_weights,
                              face_weight_scale, vsub)
from triakis.polycore import apply_signed_permutation, signed_permutations, to_float

GRID = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5)]


def tetra_incidence(r):
    s = sqrt(3 * (r * r - 2 * r + 9))
    t = sqrt(3 * (r * r - 2 * r + 3))
    return {"ve1": sqrt(2), "ve2": (9 - r) / s, "ve3": r * (r - 1) / s,
            "ef1": (3 - r) / t, "ef2": sqrt(2) * r * (r - 1) / sqrt((r * r - 2 * r + 3) * (r * r - 2 * r + 9))}


def octa_incidence(r):
    s = sqrt(3 * (r * r - 2 * r + 3))
    u = 2 * r * r - 4 * r + 3
    return {"ve1": 1 / sqrt(2), "ve2": (3 - r) / s, "ve3": r * (r - 1) / s,
            "ef1": (3 - 2 * r) / sqrt(6 * u), "ef2": r * (r - 1) / sqrt((r * r - 2 * r + 3) * u)}


@pytest.mark.parametrize("family,counts", [("tetra", (8, 18, 12, 72)), ("octa", (14, 36, 24, 144))])
@pytest.mark.parametrize("r", [Fraction(1), Fraction(3, 2), Fraction(3), Fraction(7, 2)])
def test_counts_are_constant(family, counts, r):
    inst = build(family, r)
    assert (len(inst.vertices), len(inst.edges), len(inst.faces), len(enumerate_flags(inst))) == counts


def test_flag_count_by_brute_force():
    inst = build("tetra", 2)
    n = sum(1 for f in inst.faces for e in inst.edges for v in e.vertices
            if set(e.vertices) <= set(f.vertices))
    assert n == len(inst.flags) == 72


def test_tetra_examples():
    inst = build("tetra", 1)
    assert inst.vertices["d"] == (Fraction(-1, 3),) * 3
    inst = build("tetra", 3)
    foot = inst.edges[inst.edge_index("Ad")].foot
    assert foot == (0, -1, -1)


@pytest.mark.parametrize("r", GRID)
def test_octa_face_foot(r):
    inst = build("octa", r)
    d = 3 * (2 * r * r - 4 * r + 3)
    p, q = r * (3 - 2 * r) / d, r * r / d
    assert inst.faces[inst.face_index("A+B+D+++")].foot == (q, q, p)


@pytest.mark.parametrize("family", ["tetra", "octa"])
@pytest.mark.parametrize("r", GRID)
def test_feet_are_orthogonal_projections(family, r):
    inst = build(family, to_float(r), prec=100)
    with mpmath.workprec(100):
        for e in inst.edges:
            a, b = (inst.vertices[v] for v in e.vertices)
            assert abs(dot(e.foot, vsub(b, a))) < mpf("1e-12")
            assert abs(to_float(sum(c * c for c in cross(vsub(e.foot, a), vsub(b, a))))) < mpf("1e-24")
        for f in inst.faces:
            a, b, c = (inst.vertices[v] for v in f.vertices)
            assert abs(dot(f.foot, vsub(b, a))) < mpf("1e-12")
            assert abs(dot(f.foot, vsub(c, a))) < mpf("1e-12")
            assert abs(det3(vsub(f.foot, a), vsub(b, a), vsub(c, a))) < mpf("1e-12")


@pytest.mark.parametrize("family,oracle", [("tetra", tetra_incidence), ("octa", octa_incidence)])
@pytest.mark.parametrize("r", GRID)
def test_incidence_numbers_match_closed_forms(family, oracle, r):
    inst = build(family, r)
    with mpmath.workprec(100):
        want = oracle(to_float(r))
        for key, value in inst.incidence.as_dict().items():
            assert abs(value - want[key]) <= mpf("1e-12") * max(1, abs(want[key])), key


def test_incidence_zeros():
    assert build("tetra", 9).incidence.ve2 == 0
    assert build("tetra", 1).incidence.ve3 == 0
    assert build("octa", Fraction(3, 2)).incidence.ef1 == 0


def test_some_incidence_numbers_are_negative():
    assert build("tetra", 10).incidence.ve2 < 0


def test_flag_types():
    inst = build("tetra", 2)
    labels = inst.vertex_labels
    by_name = {(labels[f.vertex], inst.edges[f.edge].label, inst.faces[f.face].label): f.type for f in inst.flags}
    assert by_name[("A", "AB", "ABd")] == 1
    assert by_name[("A", "Ad", "ABd")] == 2
    assert by_name[("d", "Ad", "ABd")] == 3


@pytest.mark.parametrize("family,even", [("tetra", True), ("octa", False)])
def test_symmetry_closure(family, even):
    inst = build(family, Fraction(5, 2))
    verts = set(inst.vertices.values())
    edges = {frozenset(inst.vertices[v] for v in e.vertices) for e in inst.edges}
    faces = {frozenset(inst.vertices[v] for v in f.vertices) for f in inst.faces}
    efeet = {e.foot for e in inst.edges}
    ffeet = {f.foot for f in inst.faces}
    group = signed_permutations(even_only=even)
    assert len(group) == (24 if even else 48)
    for perm, signs in group:
        g = lambda p: apply_signed_permutation(perm, signs, p)  # noqa: E731
        assert {g(p) for p in verts} == verts
        assert {frozenset(map(g, e)) for e in edges} == edges
        assert {frozenset(map(g, f)) for f in faces} == faces
        assert {g(p) for p in efeet} == efeet
        assert {g(p) for p in ffeet} == ffeet


def test_normalized_weights_are_rational_ratios():
    for family in ("tetra", "octa"):
        inst = build(family, Fraction(5, 2))
        raw, norm = flag_weights(inst, False), flag_weights(inst, True)
        assert all(isinstance(w, Fraction) for w in norm.values())
        with mpmath.workprec(100):
            scale = face_weight_scale(inst)
            for t in raw:
                assert abs(raw[t] / scale - to_float(norm[t])) < mpf("1e-25")


def test_tetra_face_normalization():
    # after normalization the type-1 weight is a rational function of r
    r = Fraction(5, 2)
    w = flag_weights(build("tetra", r), True)
    assert w[1] == (3 - r) / (r * r - 2 * r + 3)


def test_bad_parameters():
    with pytest.raises(GeometryError):
        build("tetra", 0)
    with pytest.raises(GeometryError):
        build("octa", Fraction(-1))
    with pytest.raises(ValueError, match="unsupported family"):
        build("icosa", 1)
    assert Family.parse("OCTA") is Family.OCTA
