"""Labelled skeletons of isohedral triakis tetrahedra and octahedra.

A solid is built from a regular base polyhedron centred at the origin by
raising (r > 1) or sinking (r < 1) a pyramid on every base face; the apex
over a face sits at ``r`` times the face centroid.  The combinatorial
complex is the same for every r > 0, including the values where faces
become coplanar.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import isqrt

import mpmath
from mpmath import mpf

from .polycore import is_exact, to_exact, to_float


class Family(enum.Enum):
    TETRA = "tetra"
    OCTA = "octa"

    @classmethod
    def parse(cls, text) -> "Family":
        if isinstance(text, Family):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unsupported family {text!r} (expected tetra or octa)") from None


class GeometryError(ValueError):
    pass


# -- small vector helpers ---------------------------------------------------

def vadd(p, q):
    return tuple(a + b for a, b in zip(p, q))


def vsub(p, q):
    return tuple(a - b for a, b in zip(p, q))


def vscale(c, p):
    return tuple(c * a for a in p)


def dot(p, q):
    return sum(a * b for a, b in zip(p, q))


def cross(p, q):
    return (p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0])


def det3(p, q, s):
    return dot(p, cross(q, s))


def line_foot(a, b):
    """Foot of the perpendicular from the origin to the line through a and b."""
    u = vsub(b, a)
    t = -dot(a, u) / dot(u, u)
    return vadd(a, vscale(t, u))


def plane_foot(a, b, c):
    """Foot of the perpendicular from the origin to the plane through a, b, c.

    Solves the 2x2 Gram system for p = a + s u + t v with p orthogonal to
    both spanning directions u, v.
    """
    u, v = vsub(b, a), vsub(c, a)
    guu, guv, gvv = dot(u, u), dot(u, v), dot(v, v)
    ru, rv = -dot(a, u), -dot(a, v)
    det = guu * gvv - guv * guv
    if det == 0:
        raise GeometryError("degenerate face")
    s = (ru * gvv - rv * guv) / det
    t = (guu * rv - guv * ru) / det
    return vadd(a, vadd(vscale(s, u), vscale(t, v)))


# -- data model -------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    label: str
    vertices: tuple  # two vertex labels
    foot: tuple
    kind: str  # "base" or "apex"


@dataclass(frozen=True)
class Face:
    label: str
    vertices: tuple  # (base, base, apex) labels
    foot: tuple
    base_normal: tuple  # outward normal of the underlying base face


@dataclass(frozen=True)
class Flag:
    vertex: int
    edge: int
    face: int
    type: int  # 1, 2 or 3


@dataclass(frozen=True)
class IncidenceNumbers:
    ve1: mpf
    ve2: mpf
    ve3: mpf
    ef1: mpf
    ef2: mpf

    def vertex_edge(self, vtype: int) -> mpf:
        return (self.ve1, self.ve2, self.ve3)[vtype - 1]

    def edge_face(self, etype: int) -> mpf:
        return (self.ef1, self.ef2)[etype - 1]

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("ve1", "ve2", "ve3", "ef1", "ef2")}


@dataclass(frozen=True)
class SolidInstance:
    family: Family
    r: object
    vertices: dict  # label -> point, base vertices first
    apexes: frozenset  # labels of pyramid apexes
    edges: tuple
    faces: tuple
    flags: tuple = field(repr=False)
    incidence: IncidenceNumbers = field(repr=False)
    prec: int = 100

    @property
    def exact(self) -> bool:
        return is_exact(self.r)

    @property
    def vertex_labels(self) -> list:
        return list(self.vertices)

    def edge_index(self, label: str) -> int:
        return next(i for i, e in enumerate(self.edges) if e.label == label)

    def face_index(self, label: str) -> int:
        return next(i for i, f in enumerate(self.faces) if f.label == label)

    def vertex_edge_type(self, vlabel: str, edge: Edge) -> int:
        if edge.kind == "base":
            return 1
        return 3 if vlabel in self.apexes else 2

    def edge_face_type(self, edge: Edge) -> int:
        return 1 if edge.kind == "base" else 2

    def to_json(self) -> dict:
        def pt(p):
            return [str(c) if is_exact(c) else mpmath.nstr(c, 30) for c in p]

        return {
            "family": self.family.value,
            "r": str(self.r) if self.exact else mpmath.nstr(self.r, 30),
            "vertices": {k: pt(v) for k, v in self.vertices.items()},
            "edges": [{"label": e.label, "vertices": list(e.vertices), "foot": pt(e.foot)} for e in self.edges],
            "faces": [{"label": f.label, "vertices": list(f.vertices), "foot": pt(f.foot)} for f in self.faces],
            "flags": [[self.vertex_labels[fl.vertex], self.edges[fl.edge].label,
                       self.faces[fl.face].label, fl.type] for fl in self.flags],
            "incidence": {k: mpmath.nstr(v, 30) for k, v in self.incidence.as_dict().items()},
        }


# -- construction -----------------------------------------------------------

def _coerce_r(r):
    if isinstance(r, str):
        from .polycore import parse_scalar

        r = parse_scalar(r)
    if isinstance(r, float):
        r = mpf(r)
    if is_exact(r):
        r = to_exact(r)
    if r <= 0:
        raise GeometryError(f"parameter r must be positive, got {r}")
    return r


def _tetra_layout(r, one):
    base = {
        "A": (one, -one, -one),
        "B": (-one, one, -one),
        "C": (-one, -one, one),
        "D": (one, one, one),
    }
    names = list(base)
    apex = {}
    base_faces = []
    for opp in names:
        tri = [n for n in names if n != opp]
        centroid = vscale(one / 3, vadd(vadd(base[tri[0]], base[tri[1]]), base[tri[2]]))
        apex[opp.lower()] = vscale(r, centroid)
        base_faces.append((tri, opp.lower(), centroid))
    base_edges = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    return base, apex, base_edges, base_faces


def _octa_layout(r, one):
    zero = one - one
    base = {}
    for axis, name in enumerate("ABC"):
        for s, sign in (("+", one), ("-", -one)):
            p = [zero, zero, zero]
            p[axis] = sign
            base[name + s] = tuple(p)
    apex = {}
    base_faces = []
    for a, b, c in product("+-", repeat=3):
        tri = ["A" + a, "B" + b, "C" + c]
        centroid = vscale(one / 3, vadd(vadd(base[tri[0]], base[tri[1]]), base[tri[2]]))
        label = "D" + a + b + c
        apex[label] = vscale(r, centroid)
        base_faces.append((tri, label, centroid))
    names = list(base)
    base_edges = [(p, q) for i, p in enumerate(names) for q in names[i + 1:] if p[0] != q[0]]
    return base, apex, base_edges, base_faces


def build(family, r, prec: int = 100) -> SolidInstance:
    """Construct the labelled skeleton at parameter ``r``.

    Coordinates and feet are exact when ``r`` is rational; incidence numbers
    involve square roots and are always mpf at ``prec`` bits.
    """
    family = Family.parse(family)
    with mpmath.workprec(prec):
        r = _coerce_r(r)
        layout = _tetra_layout if family is Family.TETRA else _octa_layout
        base, apex, base_edges, base_faces = layout(r, Fraction(1) if is_exact(r) else mpf(1))
        vertices = dict(base)
        vertices.update(apex)

        edges = [Edge(a + b, (a, b), line_foot(vertices[a], vertices[b]), "base") for a, b in base_edges]
        faces = []
        for tri, top, normal in base_faces:
            for v in tri:
                edges.append(Edge(v + top, (v, top), line_foot(vertices[v], vertices[top]), "apex"))
            for i in range(3):
                for j in range(i + 1, 3):
                    p, q = tri[i], tri[j]
                    faces.append(Face(p + q + top, (p, q, top),
                                      plane_foot(vertices[p], vertices[q], vertices[top]), normal))
        edges.sort(key=lambda e: (e.kind != "base", e.label))
        faces.sort(key=lambda f: f.label)

        inst = SolidInstance(family, r, vertices, frozenset(apex), tuple(edges), tuple(faces),
                             flags=(), incidence=None, prec=prec)
        flags = tuple(_enumerate_flags(inst))
        object.__setattr__(inst, "flags", flags)
        object.__setattr__(inst, "incidence", incidence_numbers(inst))
    return inst


def _enumerate_flags(inst: SolidInstance):
    vidx = {k: i for i, k in enumerate(inst.vertices)}
    edge_by_pair = {frozenset(e.vertices): i for i, e in enumerate(inst.edges)}
    for fi, face in enumerate(inst.faces):
        vs = face.vertices
        for i in range(3):
            for j in range(i + 1, 3):
                ei = edge_by_pair[frozenset((vs[i], vs[j]))]
                edge = inst.edges[ei]
                for v in edge.vertices:
                    yield Flag(vidx[v], ei, fi, flag_type(inst, v, edge))


def flag_type(inst: SolidInstance, vlabel: str, edge: Edge) -> int:
    """1: base vertex/base edge, 2: base vertex/apex edge, 3: apex/apex edge."""
    return inst.vertex_edge_type(vlabel, edge)


def enumerate_flags(inst: SolidInstance) -> list:
    return list(inst.flags)


# -- incidence numbers ------------------------------------------------------

def exact_sqrt(q):
    """Square root of a non-negative rational if it is rational, else None."""
    q = to_exact(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _ve_parts(inst: SolidInstance, vlabel: str, edge: Edge):
    """[v : e] as (num, sq) with value num / sqrt(sq).

    The outward unit normal of e at v is (v - w)/|v - w|, w the other end.
    """
    v = inst.vertices[vlabel]
    other = inst.vertices[edge.vertices[1] if edge.vertices[0] == vlabel else edge.vertices[0]]
    n = vsub(v, other)
    return dot(vsub(v, edge.foot), n), dot(n, n)


def _ef_parts(inst: SolidInstance, edge: Edge, face: Face):
    """[e : f] as (num, sq); the in-plane normal points away from the opposite vertex."""
    a, b = (inst.vertices[x] for x in edge.vertices)
    (opp,) = [x for x in face.vertices if x not in edge.vertices]
    w = vsub(a, inst.vertices[opp])
    u = vsub(b, a)
    n = vsub(w, vscale(dot(w, u) / dot(u, u), u))
    return dot(vsub(edge.foot, face.foot), n), dot(n, n)


def _value(parts) -> mpf:
    num, sq = parts
    if sq == 0:
        raise GeometryError("degenerate normal vector")
    return to_float(num) / mpmath.sqrt(to_float(sq))


def vertex_edge_incidence(inst: SolidInstance, vlabel: str, edge: Edge) -> mpf:
    with mpmath.workprec(inst.prec):
        return _value(_ve_parts(inst, vlabel, edge))


def edge_face_incidence(inst: SolidInstance, edge: Edge, face: Face) -> mpf:
    with mpmath.workprec(inst.prec):
        return _value(_ef_parts(inst, edge, face))


def _representatives(inst: SolidInstance) -> dict:
    reps = {}
    for fl in inst.flags:
        edge = inst.edges[fl.edge]
        face = inst.faces[fl.face]
        vlabel = inst.vertex_labels[fl.vertex]
        reps.setdefault(f"ve{fl.type}", _ve_parts(inst, vlabel, edge))
        reps.setdefault(f"ef{inst.edge_face_type(edge)}", _ef_parts(inst, edge, face))
    return reps


def incidence_numbers(inst: SolidInstance) -> IncidenceNumbers:
    """One representative incidence per type, computed from the geometry."""
    with mpmath.workprec(inst.prec):
        reps = _representatives(inst)
        return IncidenceNumbers(**{k: _value(reps[k]) for k in ("ve1", "ve2", "ve3", "ef1", "ef2")})


def face_weight_scale_sq(inst: SolidInstance):
    """Square of the common factor removed from the flag weights ve*ef.

    The factor is l * |apex| / (sqrt(6) h), with l the base edge length,
    |apex| the apex distance and h the distance of a face plane from the
    origin.  Dividing by it turns every flag weight into a rational
    function of r.
    """
    e0 = inst.edges[0]
    a, b = (inst.vertices[x] for x in e0.vertices)
    l2 = dot(vsub(a, b), vsub(a, b))
    apex = inst.vertices[inst.faces[0].vertices[2]]
    h2 = dot(inst.faces[0].foot, inst.faces[0].foot)
    return l2 * dot(apex, apex) / (6 * h2)


def face_weight_scale(inst: SolidInstance) -> mpf:
    with mpmath.workprec(inst.prec):
        return mpmath.sqrt(to_float(face_weight_scale_sq(inst)))


FLAG_TYPES = {1: ("ve1", "ef1"), 2: ("ve2", "ef2"), 3: ("ve3", "ef2")}


def flag_weights(inst: SolidInstance, normalized: bool = True) -> dict:
    """Weight [v:e][e:f] per flag type, optionally divided by the common scale.

    Normalized weights are returned as Fractions when r is rational.
    """
    with mpmath.workprec(inst.prec):
        reps = _representatives(inst)
        s2 = face_weight_scale_sq(inst) if normalized else 1
        out = {}
        for t, (ve, ef) in FLAG_TYPES.items():
            (n1, q1), (n2, q2) = reps[ve], reps[ef]
            num, sq = n1 * n2, q1 * q2 * s2
            root = exact_sqrt(sq) if inst.exact else None
            out[t] = num / root if root else _value((num, sq))
        return out
