"""Skeleton polynomials of a solid and their expansion in invariant bases."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpf

from .geometry import SolidInstance, flag_weights, face_weight_scale
from .polycore import (LinearForm, Poly, complete_symmetric_sequence, e2, e3, e4, e6,
                       monomial_key, to_float)


class NotInvariantError(ValueError):
    """The polynomial is not in the span of the invariant basis products."""

    def __init__(self, monomial, residual):
        super().__init__(f"not invariant: residual {mpmath.nstr(to_float(residual), 8)} at monomial {monomial}")
        self.monomial = monomial
        self.residual = residual


class Group(enum.Enum):
    A3 = "A3"
    B3 = "B3"


@dataclass(frozen=True)
class InvariantBasis:
    group: Group
    generators: tuple
    weights: tuple

    @classmethod
    def of(cls, group) -> "InvariantBasis":
        group = Group(group) if not isinstance(group, Group) else group
        if group is Group.A3:
            return _A3
        return _B3

    def keys(self, degree: int) -> list:
        """Exponent triples (powers of the generators) of weighted degree ``degree``."""
        w1, w2, w3 = self.weights
        out = []
        for a in range(degree // w1 + 1):
            for b in range((degree - a * w1) // w2 + 1):
                rest = degree - a * w1 - b * w2
                if rest % w3 == 0:
                    out.append((a, b, rest // w3))
        return sorted(out, reverse=True)

    def product(self, key) -> Poly:
        return _product(self.group, key)


_A3 = InvariantBasis(Group.A3, (e2(), e3(), e4()), (2, 3, 4))
_B3 = InvariantBasis(Group.B3, (e2(), e4(), e6()), (2, 4, 6))


@lru_cache(maxsize=None)
def _product(group: Group, key) -> Poly:
    basis = _A3 if group is Group.A3 else _B3
    out = Poly.const(1)
    for g, n in zip(basis.generators, key):
        out = out * g ** n
    return out


@dataclass(frozen=True)
class InvariantDecomposition:
    group: Group
    degree: int
    coefficients: dict  # generator exponents -> scalar
    residual: object = 0

    def __getitem__(self, key):
        return self.coefficients.get(tuple(key), 0)

    def reconstruct(self) -> Poly:
        basis = InvariantBasis.of(self.group)
        exact = all(isinstance(c, (int, Fraction)) for c in self.coefficients.values())
        out = Poly.zero(exact)
        for key, c in self.coefficients.items():
            p = basis.product(key)
            out = out + (p if exact else p.to_float()) * c
        return out


@lru_cache(maxsize=None)
def _solver(group: Group, degree: int):
    """Pivot monomials and exact inverse for expressing a degree-``degree`` invariant."""
    basis = InvariantBasis.of(group)
    keys = basis.keys(degree)
    prods = [basis.product(k) for k in keys]
    monos = sorted({m for p in prods for m in p.terms}, key=monomial_key)
    chosen = []
    rows = []
    for mono in monos:
        row = [p.coeff(mono) for p in prods]
        if _rank(rows + [row]) > len(rows):
            rows.append(row)
            chosen.append(mono)
        if len(rows) == len(keys):
            break
    if len(rows) != len(keys):
        raise ArithmeticError("invariant basis products are dependent")
    return keys, prods, chosen, _inverse(rows)


def _rank(rows) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, len(m)):
            f = m[i][c] / m[rank][c]
            m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _inverse(rows):
    n = len(rows)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [row[n:] for row in m]


def default_tolerance(prec: int) -> mpf:
    return max(mpf("1e-20"), mpf(2) ** (20 - prec))


def decompose(f: Poly, basis, tol=None, scale=None) -> InvariantDecomposition:
    """Unique expansion of a homogeneous invariant ``f`` in basis products.

    Exact input gives exact coefficients and requires an exactly zero
    residual.  Float input is accepted when the max residual is below
    ``tol`` relative to ``scale`` (default: the max coefficient of ``f``).
    Pass the size of the summands when ``f`` came out of heavy cancellation.
    """
    if not isinstance(basis, InvariantBasis):
        basis = InvariantBasis.of(basis)
    if f.is_zero():
        return InvariantDecomposition(basis.group, 0, {}, 0)
    degree = f.homogeneous_degree
    if degree is None:
        raise ValueError("decompose needs a homogeneous polynomial")
    keys, prods, chosen, inv = _solver(basis.group, degree) if basis.keys(degree) else ([], [], [], [])
    rhs = [f.coeff(m) for m in chosen]
    if f.exact:
        coeffs = [sum((a * b for a, b in zip(row, rhs)), Fraction(0)) for row in inv]
    else:
        coeffs = [mpmath.fsum(to_float(a) * b for a, b in zip(row, rhs)) for row in inv]
    recon = Poly.zero(f.exact)
    for c, p in zip(coeffs, prods):
        recon = recon + (p if f.exact else p.to_float()) * c
    resid = f - recon
    worst = max(resid.terms.items(), key=lambda t: abs(to_float(t[1])), default=None)
    if f.exact:
        if worst is not None:
            raise NotInvariantError(worst[0], worst[1])
        residual = 0
    else:
        tol = default_tolerance(mpmath.mp.prec) if tol is None else tol
        scale = f.norm() if scale is None else to_float(scale)
        residual = abs(worst[1]) / scale if worst is not None else mpf(0)
        if residual > tol:
            raise NotInvariantError(worst[0], worst[1])
    return InvariantDecomposition(basis.group, degree, dict(zip(keys, coeffs)), residual)


# -- skeleton polynomials ---------------------------------------------------

@dataclass(frozen=True)
class TauPolynomial:
    """A skeleton polynomial together with its per-type components and weights."""

    k: int
    m: int
    poly: Poly
    components: dict = field(repr=False)  # incidence type -> Poly
    weights: dict = field(repr=False)  # incidence type -> scalar
    normalized: bool = False
    scale: object = 1  # factor divided out of the weights
    magnitude: object = 0  # size of the weighted summands before they cancel


class _Series:
    """Running per-degree sums of one incidence type, plus the total size of the summands."""

    def __init__(self, top: int, exact: bool):
        self.polys = [Poly.zero(exact)] * (top + 1)
        self.sizes = [mpf(0)] * (top + 1)

    def add(self, seq: list):
        for j, p in enumerate(seq):
            self.polys[j] = self.polys[j] + p
            self.sizes[j] += p.norm()


def _empty(types, top: int, exact: bool) -> dict:
    return {t: _Series(top, exact) for t in types}


def tau_vertex_components(inst: SolidInstance, top: int) -> dict:
    """Per vertex type (1 base, 2 apex), the sums of <v, x>**j for j = 0..top."""
    comps = _empty((1, 2), top, inst.exact)
    for label, v in inst.vertices.items():
        seq = complete_symmetric_sequence(top, [LinearForm(tuple(v))], inst.exact)
        comps[2 if label in inst.apexes else 1].add(seq)
    return comps


def tau_edge_components(inst: SolidInstance, top: int) -> dict:
    """Per vertex-edge type, the sums of h_j(<v, x>, <foot(e), x>) for j = 0..top."""
    comps = _empty((1, 2, 3), top, inst.exact)
    for edge in inst.edges:
        for v in edge.vertices:
            forms = [LinearForm(tuple(inst.vertices[v])), LinearForm(tuple(edge.foot))]
            comps[inst.vertex_edge_type(v, edge)].add(complete_symmetric_sequence(top, forms, inst.exact))
    return comps


def tau_face_components(inst: SolidInstance, top: int) -> dict:
    """Per flag type, the sums of h_j(<v, x>, <foot(e), x>, <foot(f), x>) for j = 0..top."""
    comps = _empty((1, 2, 3), top, inst.exact)
    labels = inst.vertex_labels
    for fl in inst.flags:
        pts = [inst.vertices[labels[fl.vertex]], inst.edges[fl.edge].foot, inst.faces[fl.face].foot]
        forms = [LinearForm(tuple(p)) for p in pts]
        comps[fl.type].add(complete_symmetric_sequence(top, forms, inst.exact))
    return comps


def _combine(comps: dict, weights: dict) -> Poly:
    exact = all(isinstance(w, (int, Fraction)) for w in weights.values()) and \
        all(p.exact for p in comps.values())
    out = Poly.zero(exact)
    for t, p in comps.items():
        out = out + (p if exact else p.to_float()) * weights[t]
    return out


def tau_series(inst: SolidInstance, k: int, top: int, normalized: bool = True) -> dict:
    """Skeleton polynomials of every degree 1..top at once, keyed by degree.

    k = 3 is answered by the face problem.  For faces, ``normalized`` divides
    every flag weight by :func:`triakis.geometry.face_weight_scale`; only the
    ratio of the weights matters for the solution space.
    """
    if top < 1:
        raise ValueError("m must be at least 1")
    if k == 3:
        k = 2
    if k not in (0, 1, 2):
        raise ValueError(f"k must be 0, 1, 2 or 3, got {k}")
    scale = 1
    with mpmath.workprec(inst.prec):
        if k == 0:
            comps = tau_vertex_components(inst, top)
            weights = {1: 1, 2: 1}
        elif k == 1:
            comps = tau_edge_components(inst, top)
            inc = inst.incidence
            weights = {1: inc.ve1, 2: inc.ve2, 3: inc.ve3}
        else:
            comps = tau_face_components(inst, top)
            weights = flag_weights(inst, normalized)
            if normalized:
                scale = face_weight_scale(inst)
        out = {}
        for m in range(1, top + 1):
            by_type = {t: ser.polys[m] for t, ser in comps.items()}
            size = max(abs(to_float(weights[t])) * ser.sizes[m] for t, ser in comps.items())
            out[m] = TauPolynomial(k, m, _combine(by_type, weights), by_type, weights,
                                   normalized and k == 2, scale, size)
    return out


def tau(inst: SolidInstance, k: int, m: int, normalized: bool = True) -> TauPolynomial:
    """Degree-m skeleton polynomial of the k-skeleton."""
    return tau_series(inst, k, m, normalized)[m]


def tau_vertex(inst: SolidInstance, m: int) -> Poly:
    return tau(inst, 0, m).poly


def tau_edge(inst: SolidInstance, m: int) -> Poly:
    return tau(inst, 1, m).poly


def tau_face(inst: SolidInstance, m: int, normalized: bool = True) -> Poly:
    return tau(inst, 2, m, normalized).poly


def symmetry_basis(inst: SolidInstance) -> InvariantBasis:
    from .geometry import Family

    return InvariantBasis.of(Group.A3 if inst.family is Family.TETRA else Group.B3)


def decision_coefficients(inst: SolidInstance, k: int, degrees=None, normalized: bool = True) -> dict:
    """Leading coefficients a_m (see :mod:`triakis.closed_forms`) keyed by m."""
    from .closed_forms import LEADING_KEY

    keys = LEADING_KEY[inst.family]
    basis = symmetry_basis(inst)
    out = {}
    degrees = list(degrees or sorted(keys))
    series = tau_series(inst, k, max(degrees), normalized)
    with mpmath.workprec(inst.prec):
        for m in degrees:
            t = series[m]
            out[m] = decompose(t.poly, basis, scale=t.magnitude if not t.poly.exact else None)[keys[m]]
    return out
