"""Mean value property on polyhedral skeletons, checked by exact-degree quadrature.

Every cell rule is exact for the polynomial degrees in play, so the skeleton
moments M_a = integral of y^a over P(k) are exact up to rounding.  Averages of
f(x + rho*y) then follow from the moments by Taylor expansion, which lets one
moment table serve every center, radius and test polynomial.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import gmpy2
import mpmath
import numpy as np
from mpmath import mpf

from .geometry import SolidInstance, cross, dot, vscale, vsub
from .polycore import Poly, e2, monomials_of_degree, to_float

PASS_TOL = mpf("1e-9")
FAIL_TOL = mpf("1e-4")
DEFAULT_RADII = (Fraction(1, 2), Fraction(1), Fraction(2))


class RuleKind(enum.Enum):
    VERTEX_SUM = "VertexSum"
    EDGE_GAUSS = "EdgeGauss"
    TRIANGLE = "TriangleSymmetric"
    TETRA = "TetraSubdivision"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in barycentric-free reference coordinates and matching weights.

    Reference cells: [0, 1] (length 1), the triangle (0,0),(1,0),(0,1)
    (area 1/2) and the tetrahedron spanned by the unit vectors (volume 1/6).
    """

    kind: RuleKind
    nodes: tuple
    weights: tuple
    degree: int

    @property
    def measure(self) -> mpf:
        return mpmath.fsum(self.weights)


def _legendre_with_derivative(n: int, x):
    p0, p1 = mpf(1), x
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, n * (x * p1 - p0) / (x * x - 1)


def gauss_legendre(n: int, prec: int = 100) -> tuple:
    """Nodes and weights on [-1, 1]: numpy's double-precision rule polished by Newton steps."""
    x0, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    with mpmath.workprec(prec + 20):
        for x in x0:
            x = mpf(float(x))
            for _ in range(6):
                p, dp = _legendre_with_derivative(n, x)
                x -= p / dp
            _, dp = _legendre_with_derivative(n, x)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


def edge_rule(n: int = 8, prec: int = 100) -> QuadratureRule:
    x, w = gauss_legendre(n, prec)
    with mpmath.workprec(prec + 20):
        nodes = tuple(((xi + 1) / 2,) for xi in x)
        weights = tuple(wi / 2 for wi in w)
    return QuadratureRule(RuleKind.EDGE_GAUSS, nodes, weights, 2 * n - 1)


def triangle_rule(n: int = 8, prec: int = 100) -> QuadratureRule:
    """Collapsed (Duffy) product rule: (s, t) -> (s, (1 - s) t), Jacobian 1 - s."""
    x, w = gauss_legendre(n, prec)
    with mpmath.workprec(prec + 20):
        u = [(xi + 1) / 2 for xi in x]
        wu = [wi / 2 for wi in w]
        nodes, weights = [], []
        for s, ws in zip(u, wu):
            for t, wt in zip(u, wu):
                nodes.append((s, (1 - s) * t))
                weights.append(ws * wt * (1 - s))
    return QuadratureRule(RuleKind.TRIANGLE, tuple(nodes), tuple(weights), 2 * n - 2)


def tetra_rule(n: int = 9, prec: int = 100) -> QuadratureRule:
    """Collapsed product rule on the unit tetrahedron, Jacobian (1 - s)^2 (1 - t)."""
    x, w = gauss_legendre(n, prec)
    with mpmath.workprec(prec + 20):
        u = [(xi + 1) / 2 for xi in x]
        wu = [wi / 2 for wi in w]
        nodes, weights = [], []
        for s, ws in zip(u, wu):
            for t, wt in zip(u, wu):
                for v, wv in zip(u, wu):
                    nodes.append((s, (1 - s) * t, (1 - s) * (1 - t) * v))
                    weights.append(ws * wt * wv * (1 - s) ** 2 * (1 - t))
    return QuadratureRule(RuleKind.TETRA, tuple(nodes), tuple(weights), 2 * n - 3)


# -- skeleton cells ---------------------------------------------------------

def _pt(inst: SolidInstance, label: str) -> tuple:
    return tuple(to_float(c) for c in inst.vertices[label])


def oriented_faces(inst: SolidInstance) -> list:
    """Face triangles ordered so that they inherit the outward orientation of their base face.

    With this orientation the faces form the boundary of the solid as a
    chain, which stays meaningful when pyramids are excavated (r < 1) or
    faces are coplanar.
    """
    out = []
    for face in inst.faces:
        a, b, apex = (_pt(inst, v) for v in face.vertices)
        centroid = vscale(1 / to_float(inst.r), apex)
        n = tuple(to_float(c) for c in face.base_normal)
        if dot(cross(vsub(b, a), vsub(centroid, a)), n) < 0:
            a, b = b, a
        out.append((a, b, apex))
    return out


def _norm(v) -> mpf:
    return mpmath.sqrt(dot(v, v))


def skeleton_measure(inst: SolidInstance, k: int):
    """Vertex count, total edge length, total face area or enclosed (signed) volume."""
    with mpmath.workprec(inst.prec):
        if k == 0:
            return len(inst.vertices)
        if k == 1:
            return mpmath.fsum(_norm(vsub(_pt(inst, e.vertices[1]), _pt(inst, e.vertices[0])))
                               for e in inst.edges)
        if k == 2:
            return mpmath.fsum(_norm(cross(vsub(b, a), vsub(c, a))) / 2 for a, b, c in oriented_faces(inst))
        if k == 3:
            return mpmath.fsum(dot(a, cross(b, c)) / 6 for a, b, c in oriented_faces(inst))
    raise ValueError(f"k must be 0, 1, 2 or 3, got {k}")


# -- moments ----------------------------------------------------------------

# The moment loops run in gmpy2's mpfr, which is far faster than mpf for
# this many scalar operations; values cross over exactly in both directions.

def _to_mpfr(v):
    sign, man, exp, _ = mpf(v)._mpf_
    x = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -x if sign else x


def _from_mpfr(x) -> mpf:
    man, exp = x.as_mantissa_exp()
    return mpf((int(man), int(exp)))


class _Accumulator:
    def __init__(self, monos: list):
        self.monos = monos
        self.top = max(sum(m) for m in monos)
        self.sums = [gmpy2.mpfr(0)] * len(monos)

    def add(self, y, w):
        top = self.top
        p = []
        for i in range(3):
            yi = _to_mpfr(y[i])
            row = [gmpy2.mpfr(1)] * (top + 1)
            for j in range(1, top + 1):
                row[j] = row[j - 1] * yi
            p.append(row)
        wf = _to_mpfr(w)
        p0, p1, p2 = p
        sums = self.sums
        for idx, (a, b, c) in enumerate(self.monos):
            sums[idx] += wf * p0[a] * p1[b] * p2[c]

    def values(self) -> dict:
        return {m: _from_mpfr(v) for m, v in zip(self.monos, self.sums)}


@dataclass
class Moments:
    """M_a / |P(k)| for all exponents a of total degree <= top."""

    k: int
    top: int
    measure: object
    values: dict


_MOMENT_CACHE: dict = {}


def skeleton_moments(inst: SolidInstance, k: int, top: int, volume_rule: str = "cone") -> Moments:
    """Normalized moments of the k-skeleton up to total degree ``top``.

    For k = 3 the default integrates each cone over a face radially, which is
    exact: the cone's moment of degree n is h/(n + 3) times the face moment,
    h being the signed distance of the face plane.  ``volume_rule="tetra"``
    uses a collapsed Gauss rule per cone instead (slower; for cross-checks).
    """
    key = (inst.family, str(inst.r), inst.prec, k, top, volume_rule)
    if key in _MOMENT_CACHE:
        return _MOMENT_CACHE[key]
    monos = [m for d in range(top + 1) for m in monomials_of_degree(d)]
    work = inst.prec + 10
    with mpmath.workprec(work), gmpy2.context(precision=work):
        acc = _Accumulator(monos)
        if k == 0:
            for lab in inst.vertices:
                acc.add(_pt(inst, lab), mpf(1))
        elif k == 1:
            rule = edge_rule(max(8, top // 2 + 1), inst.prec)
            for e in inst.edges:
                a, b = _pt(inst, e.vertices[0]), _pt(inst, e.vertices[1])
                d = vsub(b, a)
                length = _norm(d)
                for (s,), w in zip(rule.nodes, rule.weights):
                    acc.add(tuple(a[i] + s * d[i] for i in range(3)), w * length)
        elif k == 2 or (k == 3 and volume_rule == "cone"):
            rule = triangle_rule(max(8, top // 2 + 1), inst.prec)
            for a, b, c in oriented_faces(inst):
                u, v = vsub(b, a), vsub(c, a)
                nvec = cross(u, v)
                jac = _norm(nvec)
                if jac == 0:
                    continue
                # for volumes, each cone contributes h/(n + 3) times the face moment
                h = dot(a, nvec) / jac if k == 3 else None
                face = _Accumulator(monos)
                for (s, t), w in zip(rule.nodes, rule.weights):
                    face.add(tuple(a[i] + s * u[i] + t * v[i] for i in range(3)), w * jac)
                hf = _to_mpfr(h) if h is not None else None
                for idx, m in enumerate(monos):
                    val = face.sums[idx]
                    acc.sums[idx] += val if hf is None else hf * val / (sum(m) + 3)
        elif k == 3 and volume_rule == "tetra":
            rule = tetra_rule(max(9, top // 2 + 2), inst.prec)
            for a, b, c in oriented_faces(inst):
                jac = dot(a, cross(b, c))
                for (s, t, u), w in zip(rule.nodes, rule.weights):
                    acc.add(tuple(s * a[i] + t * b[i] + u * c[i] for i in range(3)), w * jac)
        else:
            raise ValueError(f"k must be 0, 1, 2 or 3, got {k}")
        measure = skeleton_measure(inst, k)
        values = {m: v / measure for m, v in acc.values().items()}
    out = Moments(k, top, measure, values)
    _MOMENT_CACHE[key] = out
    return out


# -- defects ----------------------------------------------------------------

def _defect_functional(moments: Moments, x, rho, top: int, needed=None) -> dict:
    """c_b with  average of (x + rho y)^b  -  x^b  =  c_b, for every |b| <= top (or just ``needed``)."""
    work = mpmath.mp.prec + 10
    with gmpy2.context(precision=work):
        M = {m: _to_mpfr(v) for m, v in moments.values.items() if sum(m) <= top}
        xp = []
        for i in range(3):
            xi = _to_mpfr(x[i])
            row = [gmpy2.mpfr(1)] * (top + 1)
            for j in range(1, top + 1):
                row[j] = row[j - 1] * xi
            xp.append(row)
        rf = _to_mpfr(rho)
        rp = [gmpy2.mpfr(1)] * (top + 1)
        for j in range(1, top + 1):
            rp[j] = rp[j - 1] * rf
        # scaled moments rho^|a| M_a, then a binomial convolution per axis
        S = {m: rp[sum(m)] * v for m, v in M.items()}
        out = {}
        wanted = needed if needed is not None else [b for d in range(top + 1) for b in monomials_of_degree(d)]
        for b in wanted:
            s = gmpy2.mpfr(0)
            for a1 in range(b[0] + 1):
                c1 = comb(b[0], a1) * xp[0][b[0] - a1]
                for a2 in range(b[1] + 1):
                    c2 = c1 * comb(b[1], a2) * xp[1][b[1] - a2]
                    for a3 in range(b[2] + 1):
                        if a1 + a2 + a3:
                            s += c2 * comb(b[2], a3) * xp[2][b[2] - a3] * S[(a1, a2, a3)]
            out[b] = _from_mpfr(s)
    return out


def _apply(functional: dict, f: Poly) -> mpf:
    return abs(mpmath.fsum(to_float(c) * functional[m] for m, c in f.terms.items()))


def mean_value_defect(inst: SolidInstance, k: int, f: Poly, x, rho) -> mpf:
    """|average of f(x + rho y) over y in P(k)  -  f(x)|."""
    if to_float(rho) <= 0:
        raise ValueError("rho must be positive")
    top = max(f.degree, 0)
    with mpmath.workprec(inst.prec):
        mom = skeleton_moments(inst, k, top)
        xf = tuple(to_float(c) for c in x)
        return _apply(_defect_functional(mom, xf, to_float(rho), top, list(f.terms)), f)


def direct_defect(inst: SolidInstance, k: int, f: Poly, x, rho) -> mpf:
    """Same quantity by summing f over the quadrature nodes themselves (slow; for cross-checks)."""
    with mpmath.workprec(inst.prec):
        xf = tuple(to_float(c) for c in x)
        rf = to_float(rho)
        g = lambda y: f.to_float().evaluate(tuple(xf[i] + rf * y[i] for i in range(3)))  # noqa: E731
        total = mpf(0)
        deg = max(f.degree, 1)
        if k == 0:
            total = mpmath.fsum(g(_pt(inst, lab)) for lab in inst.vertices)
        elif k == 1:
            rule = edge_rule(max(8, deg // 2 + 1), inst.prec)
            for e in inst.edges:
                a, b = _pt(inst, e.vertices[0]), _pt(inst, e.vertices[1])
                d = vsub(b, a)
                L = _norm(d)
                total += mpmath.fsum(w * L * g(tuple(a[i] + s * d[i] for i in range(3)))
                                     for (s,), w in zip(rule.nodes, rule.weights))
        elif k == 2:
            rule = triangle_rule(max(8, deg // 2 + 1), inst.prec)
            for a, b, c in oriented_faces(inst):
                u, v = vsub(b, a), vsub(c, a)
                jac = _norm(cross(u, v))
                total += mpmath.fsum(w * jac * g(tuple(a[i] + s * u[i] + t * v[i] for i in range(3)))
                                     for (s, t), w in zip(rule.nodes, rule.weights))
        else:
            rule = tetra_rule(max(9, deg // 2 + 2), inst.prec)
            for a, b, c in oriented_faces(inst):
                jac = dot(a, cross(b, c))
                total += mpmath.fsum(w * jac * g(tuple(s * a[i] + t * b[i] + u * c[i] for i in range(3)))
                                     for (s, t, u), w in zip(rule.nodes, rule.weights))
        return abs(total / skeleton_measure(inst, k) - f.to_float().evaluate(xf))


def sample_centers(n: int = 5, seed: int = 7, box: int = 1) -> list:
    """Reproducible rational centers in [-box, box]^3."""
    rng = random.Random(seed)
    return [tuple(Fraction(rng.randint(-1000 * box, 1000 * box), 1000) for _ in range(3)) for _ in range(n)]


@dataclass
class DefectReport:
    family: str
    r: str
    k: int
    centers: list
    radii: list
    measure: object
    defects: dict  # name -> max defect over the grid
    counterexamples: dict  # name -> max defect over the grid
    pass_tol: mpf = PASS_TOL
    fail_tol: mpf = FAIL_TOL
    failures: list = field(default_factory=list)
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        s = lambda v: mpmath.nstr(v, 6)  # noqa: E731
        return {
            "family": self.family,
            "r": self.r,
            "k": self.k,
            "measure": s(to_float(self.measure)),
            "centers": [[str(c) for c in x] for x in self.centers],
            "radii": [str(r) for r in self.radii],
            "pass_tol": s(self.pass_tol),
            "fail_tol": s(self.fail_tol),
            "members": len(self.defects),
            "max_member_defect": s(max(self.defects.values(), default=mpf(0))),
            "defects": {k: s(v) for k, v in self.defects.items()},
            "counterexamples": {k: s(v) for k, v in self.counterexamples.items()},
            "ok": self.ok,
            "failures": self.failures,
            "note": self.note,
        }


DEGENERATE_NOTE = ("faces are kept distinct at degenerate r, so coincident cells count with multiplicity; "
                   "volumes are signed")


def verify_space(inst: SolidInstance, k: int, basis, counterexamples=None, centers=None, radii=DEFAULT_RADII,
                 pass_tol=PASS_TOL, fail_tol=FAIL_TOL) -> DefectReport:
    """Every member must satisfy the mean value property; every counterexample must violate it.

    ``basis`` is a GradedBasis or a list of polynomials (or (name, poly)
    pairs).  ``counterexamples`` defaults to {"e2": e2}.
    """
    members = basis.elements() if hasattr(basis, "elements") else list(basis)
    named = [(m if isinstance(m, tuple) else (f"b{i}", m)) for i, m in enumerate(members)]
    counter = dict(counterexamples) if counterexamples is not None else {"e2": e2()}
    centers = centers if centers is not None else sample_centers()
    top = max([f.degree for _, f in named] + [f.degree for f in counter.values()] + [0])
    needed = sorted({m for f in [f for _, f in named] + list(counter.values()) for m in f.terms})
    defects = {n: mpf(0) for n, _ in named}
    cdef = {n: mpf(0) for n in counter}
    with mpmath.workprec(inst.prec):
        mom = skeleton_moments(inst, k, top)
        for x in centers:
            xf = tuple(to_float(c) for c in x)
            for rho in radii:
                fn = _defect_functional(mom, xf, to_float(rho), top, needed)
                for n, f in named:
                    defects[n] = max(defects[n], _apply(fn, f))
                for n, f in counter.items():
                    cdef[n] = max(cdef[n], _apply(fn, f))
    failures = [f"{n}: defect {mpmath.nstr(v, 5)} >= {mpmath.nstr(pass_tol, 3)}"
                for n, v in defects.items() if v >= pass_tol]
    failures += [f"counterexample {n}: defect {mpmath.nstr(v, 5)} <= {mpmath.nstr(fail_tol, 3)}"
                 for n, v in cdef.items() if v <= fail_tol]
    r = str(inst.r) if isinstance(inst.r, Fraction) else mpmath.nstr(inst.r, 15)
    return DefectReport(inst.family.value, r, k, centers, list(radii), mom.measure, defects, cdef,
                        pass_tol, fail_tol, failures, DEGENERATE_NOTE)
