"""Certified positive roots of the critical polynomials and the critical-value scan."""
from __future__ import annotations

import random
from math import gcd
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf
from scipy.optimize import minimize_scalar

from .closed_forms import coefficient_closed_forms
from .geometry import Family, build
from .polycore import apply_signed_permutation, signed_permutations, to_float


class UnivariatePoly:
    """Polynomial in one variable with rational coefficients, stored ascending."""

    __slots__ = ("coeffs", "name")

    def __init__(self, coeffs, name: str = ""):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise ValueError("the zero polynomial has no roots to isolate")
        self.coeffs = tuple(cs)
        self.name = name

    @classmethod
    def from_descending(cls, coeffs, name: str = "") -> "UnivariatePoly":
        return cls(list(reversed(list(coeffs))), name)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, Fraction) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) else to_float(c))
        return acc

    def __eq__(self, other):
        return isinstance(other, UnivariatePoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UnivariatePoly({self.format()})"

    def format(self) -> str:
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("r" if i == 1 else f"r^{i}")
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)

    def derivative(self) -> "UnivariatePoly | None":
        if self.degree == 0:
            return None
        return UnivariatePoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __add__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        n = max(len(self.coeffs), len(other.coeffs))
        pad = lambda cs: list(cs) + [Fraction(0)] * (n - len(cs))  # noqa: E731
        return UnivariatePoly([a + b for a, b in zip(pad(self.coeffs), pad(other.coeffs))])

    def __mul__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        out = [Fraction(0)] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UnivariatePoly(out)

    def scale(self, c) -> "UnivariatePoly":
        return UnivariatePoly([c * a for a in self.coeffs])


def _divmod(a: tuple, b: tuple):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return q, a


def poly_gcd(p: UnivariatePoly, q: UnivariatePoly) -> UnivariatePoly:
    a, b = list(p.coeffs), list(q.coeffs)
    while b:
        _, rem = _divmod(a, b)
        a, b = b, rem
    g = UnivariatePoly(a)
    return g.scale(1 / g.leading)


def squarefree_part(p: UnivariatePoly) -> UnivariatePoly:
    d = p.derivative()
    if d is None:
        return p
    g = poly_gcd(p, d)
    if g.degree == 0:
        return p
    q, rem = _divmod(p.coeffs, g.coeffs)
    assert not rem
    return UnivariatePoly(q, p.name)


def sturm_sequence(p: UnivariatePoly) -> list:
    seq = [list(p.coeffs)]
    d = p.derivative()
    if d is None:
        return [p]
    seq.append(list(d.coeffs))
    while True:
        _, rem = _divmod(seq[-2], seq[-1])
        if not rem:
            break
        seq.append([-c for c in rem])
    return [UnivariatePoly(s) for s in seq]


def _sign_changes(seq, x: Fraction) -> int:
    signs = [s for s in ((q(x) > 0) - (q(x) < 0) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in (lo, hi] of the first polynomial of a Sturm sequence."""
    return _sign_changes(seq, lo) - _sign_changes(seq, hi)


def cauchy_bound(p: UnivariatePoly) -> Fraction:
    return 1 + max(abs(c / p.leading) for c in p.coeffs[:-1]) if p.degree else Fraction(1)


@dataclass
class RootReport:
    polynomial: UnivariatePoly
    positive_root_count: int
    intervals: list  # [(lo, hi)] as Fractions; lo == hi for an exact rational root
    values: list  # mpf refinements
    width: Fraction

    @property
    def unique(self) -> bool:
        return self.positive_root_count == 1

    def to_json(self) -> dict:
        return {
            "polynomial": self.polynomial.name or self.polynomial.format(),
            "positive_roots": self.positive_root_count,
            "intervals": [[str(lo), str(hi)] for lo, hi in self.intervals],
            "decimal": [mpmath.nstr(v, 15) for v in self.values],
        }


def _refine(p: UnivariatePoly, lo: Fraction, hi: Fraction, width: Fraction):
    """Exact sign bisection of a simple root bracketed by a sign change."""
    slo = p(lo) > 0
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = p(mid)
        if v == 0:
            return mid, mid
        if (v > 0) == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _divisors(n: int) -> list:
    n = abs(n)
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def rational_positive_roots(p: UnivariatePoly, limit: int = 10**6) -> list:
    """Positive rational roots by the rational root theorem (skipped for huge coefficients)."""
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    while ints and ints[0] == 0:
        ints.pop(0)
    if not ints or abs(ints[0]) > limit or abs(ints[-1]) > limit:
        return []
    return sorted({Fraction(a, b) for a in _divisors(ints[0]) for b in _divisors(ints[-1])
                   if p(Fraction(a, b)) == 0})


def isolate_positive_roots(p: UnivariatePoly, width=Fraction(1, 10**12), prec: int = 100) -> RootReport:
    """Isolate every positive real root with a Sturm count, then bisect.

    Intervals are returned at ``width``; decimal values are refined further
    so that they are correct to about ``prec`` bits.
    """
    q = squarefree_part(p)
    seq = sturm_sequence(q)
    bound = cauchy_bound(q)
    total = count_roots(seq, Fraction(0), bound)
    pending = [(Fraction(0), bound)]
    isolated = []
    while pending:
        lo, hi = pending.pop()
        n = count_roots(seq, lo, hi)
        if n == 0:
            continue
        if n == 1:
            isolated.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        pending += [(lo, mid), (mid, hi)]
    isolated.sort()
    exact_roots = rational_positive_roots(q)
    intervals, values = [], []
    fine = Fraction(1, 2 ** (prec + 4))
    for lo, hi in isolated:
        hit = [x for x in exact_roots if lo < x <= hi]
        if hit:
            intervals.append((hit[0], hit[0]))
            with mpmath.workprec(prec + 10):
                values.append(to_float(hit[0]))
            continue
        a, b = _refine(q, lo, hi, width)
        intervals.append((a, b))
        c, d = (a, b) if a == b else _refine(q, a, b, fine * max(1, b))
        with mpmath.workprec(prec + 10):
            values.append(to_float((c + d) / 2))
    return RootReport(p, total, intervals, values, width)


# -- the polynomials -----------------------------------------------------------

TETRA_CHI1 = UnivariatePoly.from_descending([1, 2, 1, -36, -45, -270, -405], "tetra chi1")
OCTA_CHI1 = UnivariatePoly.from_descending([16, 32, 40, -48, -396, -432, -810, -972, -729], "octa chi1")
OCTA_CHI2 = UnivariatePoly.from_descending([4, 8, 6, -18, -81], "octa chi2")
OCTA_R0 = UnivariatePoly.from_descending([8, 0, 0, 0, -81], "octa r0 quartic")
TETRA_VERTEX_CUBIC = UnivariatePoly.from_descending([-1, 0, 0, 27], "(3 - r)(r^2 + 3r + 9)")
TETRA_FACE_CUBIC = UnivariatePoly.from_descending([-1, -2, 3, 36], "(3 - r)(r^2 + 5r + 12)")

CHI_POLYNOMIALS = {"tetra-chi1": TETRA_CHI1, "octa-chi1": OCTA_CHI1, "octa-chi2": OCTA_CHI2,
                   "octa-r0": OCTA_R0}


def r0_exact(prec: int = 100) -> mpf:
    with mpmath.workprec(prec):
        return 3 * mpf(2) ** (mpf(-3) / 4)


# -- radical identities ----------------------------------------------------------

def _P(*desc) -> UnivariatePoly:
    return UnivariatePoly.from_descending(desc)


# family -> (vanishing edge coefficient m, constant c with a = c*sqrt2 + Q*sqrt(S), Q, S, factor, chi)
_IDENTITY = {
    Family.TETRA: (3, 96, _P(-1, -1, 3, 27).scale(Fraction(8, 9)), _P(3, -6, 27),
                   _P(1, -2, 3).scale(Fraction(64, 27)), TETRA_CHI1),
    Family.OCTA: (4, -12, _P(2, 2, 0, -9, -27).scale(Fraction(16, 81)), _P(3, -6, 9),
                  _P(2, -4, 3).scale(Fraction(32, 2187)), OCTA_CHI1),
}


@dataclass
class IdentityReport:
    family: Family
    polynomial_identity: bool  # (Q^2 S - 2c^2) equals factor*chi over the rationals
    samples: list  # (r, lhs, rhs, relative difference)
    tolerance: mpf
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.polynomial_identity and not self.failures

    @property
    def max_relative(self) -> mpf:
        return max((s[3] for s in self.samples), default=mpf(0))


def verify_radical_identity(family, samples: int = 20, seed: int = 20240611, prec: int = 128,
                            tol=mpf("1e-25")) -> IdentityReport:
    """Check a_m(r) * (Q(r) sqrt(S(r)) - c sqrt 2) = factor(r) chi(r).

    a_m is the closed-form edge coefficient that vanishes at the critical
    value; the left side is its product with the conjugate radical.
    """
    family = Family.parse(family)
    m, c, Q, S, factor, chi = _IDENTITY[family]
    poly_ok = Q * Q * S + _P(-2 * c * c) == factor * chi
    rng = random.Random(seed)
    rows, failures = [], []
    with mpmath.workprec(prec):
        for _ in range(samples):
            r = Fraction(rng.randint(1, 10**6 - 1), 10**5)
            a = coefficient_closed_forms(family, 1, m, r, prec)
            conj = to_float(Q(r)) * mpmath.sqrt(to_float(S(r))) - c * mpmath.sqrt(2)
            lhs = a * conj
            rhs = to_float(factor(r)) * to_float(chi(r))
            rel = abs(lhs - rhs) / max(abs(rhs), abs(lhs))
            rows.append((r, lhs, rhs, rel))
            if rel >= tol:
                failures.append(f"r = {r}: relative difference {mpmath.nstr(rel, 5)}")
    return IdentityReport(family, poly_ok, rows, tol, failures)


# -- sign certificates ------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class SignReport:
    family: Family
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def get(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


# psi and its derivative written as a sum of terms that are positive for r > 0
_PSI = {
    Family.TETRA: (_P(1, 1, -3, 9, 81), _P(4, 0, 0, 0) + _P(1, -2, 1).scale(3) + _P(6)),
    Family.OCTA: (_P(16, 16, 0, -18, 0, 81, 243),
                  _P(96, 0, 0, 0, 0, 0) + _P(71, 0, 0, 0, 0) + _P(3, 0, -9) * _P(3, 0, -9)),
}

OCTA_FACE_A6 = _P(16, 32, 24, -18, -54, 0, 243).scale(Fraction(8, 81))


def _grid(lo, hi, n):
    return [lo + (hi - lo) * Fraction(i, n) for i in range(n + 1)]


def _no_positive_root(p: UnivariatePoly) -> bool:
    seq = sturm_sequence(squarefree_part(p))
    return count_roots(seq, Fraction(0), cauchy_bound(p)) == 0


def a6_face_minimum(prec: int = 100) -> tuple:
    """(r, value) at the minimum of the octa face coefficient a_6 over r >= 0.

    Golden-section search gives the location; the derivative's Sturm-isolated
    positive root confirms it to full precision.
    """
    res = minimize_scalar(lambda x: float(OCTA_FACE_A6(mpf(x))), bracket=(0.0, 0.5, 2.0), method="golden",
                          tol=1e-10)
    roots = isolate_positive_roots(OCTA_FACE_A6.derivative(), prec=prec)
    with mpmath.workprec(prec):
        crit = min(roots.values, key=lambda v: abs(v - res.x))
        return float(res.x), crit, OCTA_FACE_A6(crit)


def sign_certificates(family, grid_points: int = 2000, grid_top: int = 20) -> SignReport:
    family = Family.parse(family)
    psi, rewrite = _PSI[family]
    dpsi = psi.derivative()
    checks = [Check("psi(0) > 0", psi(Fraction(0)) > 0, str(psi(Fraction(0))))]
    checks.append(Check("psi' equals its sum-of-positives rewrite", rewrite == dpsi, dpsi.format()))
    grid = _grid(Fraction(0), Fraction(grid_top), grid_points)
    checks.append(Check("psi' > 0 on grid", all(dpsi(x) > 0 for x in grid), f"[0, {grid_top}], {grid_points} steps"))
    checks.append(Check("psi' has no positive root (Sturm)", _no_positive_root(dpsi)))
    checks.append(Check("psi > 0 on grid", all(psi(x) > 0 for x in grid)))
    if family is Family.OCTA:
        with mpmath.workprec(100):
            a0 = coefficient_closed_forms(family, 1, 4, Fraction(0))
            expected = -4 * (4 + 3 * mpmath.sqrt(2))
            checks.append(Check("a_4 edge coefficient at r = 0", abs(a0 - expected) < mpf(10) ** -25,
                                mpmath.nstr(a0, 15)))
            worst = mpf(0)
            for x in _grid(Fraction(1, 10), Fraction(10), 40):
                xf = to_float(x)
                num = mpmath.diff(lambda t: coefficient_closed_forms(family, 1, 4, t, mpmath.mp.prec), xf)
                closed = 160 * xf**3 * (xf**2 - xf + 1) / (27 * mpmath.sqrt(3 * (xf**2 - 2 * xf + 3)))
                worst = max(worst, abs(num - closed) / abs(closed))
            checks.append(Check("derivative of a_4 edge coefficient matches closed form", worst < mpf(10) ** -15,
                                mpmath.nstr(worst, 3)))
            # r^3 (r^2 - r + 1) > 0 for r > 0, so the derivative is positive there
            checks.append(Check("derivative of a_4 edge coefficient positive",
                                _no_positive_root(_P(1, -1, 1))))
        x_golden, r_min, v_min = a6_face_minimum()
        checks.append(Check("a_6 face coefficient minimum", v_min > 0,
                            f"r = {mpmath.nstr(r_min, 10)}, value = {mpmath.nstr(v_min, 10)}, "
                            f"golden-section r = {x_golden:.8f}"))
    return SignReport(family, checks)


# -- symmetry of a skeleton ---------------------------------------------------

def _on_segment(p, a, b, tol) -> bool:
    d = [b[i] - a[i] for i in range(3)]
    w = [p[i] - a[i] for i in range(3)]
    dd = sum(x * x for x in d)
    t = sum(x * y for x, y in zip(w, d)) / dd
    if t < -tol or t > 1 + tol:
        return False
    return sum((w[i] - t * d[i]) ** 2 for i in range(3)) < tol * tol * dd


def _in_triangle(p, a, b, c, tol) -> bool:
    u = [b[i] - a[i] for i in range(3)]
    v = [c[i] - a[i] for i in range(3)]
    w = [p[i] - a[i] for i in range(3)]
    uu = sum(x * x for x in u)
    uv = sum(x * y for x, y in zip(u, v))
    vv = sum(x * x for x in v)
    wu = sum(x * y for x, y in zip(w, u))
    wv = sum(x * y for x, y in zip(w, v))
    det = uu * vv - uv * uv
    s = (vv * wu - uv * wv) / det
    t = (uu * wv - uv * wu) / det
    if s < -tol or t < -tol or s + t > 1 + tol:
        return False
    res = [w[i] - s * u[i] - t * v[i] for i in range(3)]
    return sum(x * x for x in res) < tol * tol * max(uu, vv)


def skeleton_symmetry(inst, k: int, tol=1e-9) -> str:
    """'B3' when the k-skeleton is invariant under all 48 signed permutations, else 'A3'.

    Membership is tested on sample points of every cell, which suffices for
    the piecewise-linear cells involved here.
    """
    if k == 3:
        k = 2
    pts = {lab: [float(c) for c in v] for lab, v in inst.vertices.items()}
    if k == 0:
        cells = [[p] for p in pts.values()]
        samples = [p for p in pts.values()]
        member = lambda q: any(sum((q[i] - p[i]) ** 2 for i in range(3)) < tol for p in pts.values())  # noqa: E731
    elif k == 1:
        cells = [[pts[a] for a in e.vertices] for e in inst.edges]
        samples = [[a[i] + t * (b[i] - a[i]) for i in range(3)] for a, b in cells for t in (0.31, 0.77)]
        member = lambda q: any(_on_segment(q, a, b, tol) for a, b in cells)  # noqa: E731
    else:
        cells = [[pts[a] for a in f.vertices] for f in inst.faces]
        bary = ((0.2, 0.3), (0.55, 0.15), (0.1, 0.7))
        samples = [[a[i] + s * (b[i] - a[i]) + t * (c[i] - a[i]) for i in range(3)]
                   for a, b, c in cells for s, t in bary]
        member = lambda q: any(_in_triangle(q, a, b, c, tol) for a, b, c in cells)  # noqa: E731
    for perm, signs in signed_permutations():
        for p in samples:
            if not member(apply_signed_permutation(perm, signs, p)):
                return "A3"
    return "B3"


# -- critical scan ----------------------------------------------------------

# (family, k) -> (candidate polynomial, vanishing coefficient degree, companion degrees)
_SOURCES = {
    (Family.TETRA, 0): (TETRA_VERTEX_CUBIC, 3, (2, 4, 6)),
    (Family.TETRA, 1): (TETRA_CHI1, 3, (2, 4, 6)),
    (Family.TETRA, 2): (TETRA_FACE_CUBIC, 3, (2, 4, 6)),
    (Family.OCTA, 0): (OCTA_R0, 4, (2, 6, 8)),
    (Family.OCTA, 1): (OCTA_CHI1, 4, (2, 6, 8)),
    (Family.OCTA, 2): (OCTA_CHI2, 4, (2, 6, 8)),
}

COMPANION_FLOOR = mpf("1e-6")


@dataclass
class CriticalValue:
    family: Family
    k: int
    r: mpf
    bracket: tuple
    source: str
    vanishing: tuple  # (m, value)
    companions: dict  # m -> (value at lo, value at hi)
    symmetry: str
    space: str
    dimension: int
    critical: bool
    certificate: str = "numeric"
    note: str = ""

    def to_json(self) -> dict:
        lo, hi = self.bracket
        return {
            "family": self.family.value,
            "k": self.k,
            "r": mpmath.nstr(self.r, 15),
            "bracket": [str(lo), str(hi)],
            "source": self.source,
            "vanishing_coefficient": {"m": self.vanishing[0], "value": mpmath.nstr(self.vanishing[1], 5)},
            "companions": {str(m): mpmath.nstr(v[0], 10) for m, v in self.companions.items()},
            "symmetry": self.symmetry,
            "space": self.space,
            "dimension": self.dimension,
            "critical": self.critical,
            "certificate": self.certificate,
            "note": self.note,
        }


@dataclass
class CriticalScan:
    family: Family
    k: int
    candidates: list

    @property
    def critical(self) -> list:
        return [c for c in self.candidates if c.critical]


def critical_scan(family, k: int, prec: int = 100, vanish_tol=None) -> CriticalScan:
    """Positive r where the polyhedral harmonics of the k-skeleton exceed the group harmonics.

    Candidates are the positive roots of the polynomial controlling the
    vanishing coefficient.  A candidate is kept when the closed-form
    coefficient really vanishes there (the edge problems' conjugate radical
    factor produces spurious roots otherwise) and the companion coefficients
    stay away from zero on the whole bracket.  If the skeleton itself gains
    the larger symmetry at that r, the jump is shared by the group and the
    value is not critical.
    """
    family = Family.parse(family)
    kk = 2 if k == 3 else k
    poly, m, companions = _SOURCES[(family, kk)]
    vanish_tol = vanish_tol if vanish_tol is not None else mpf(2) ** (-(2 * prec) // 3)
    report = isolate_positive_roots(poly, prec=prec)
    out = []
    with mpmath.workprec(prec):
        for (lo, hi), val in zip(report.intervals, report.values):
            r = lo if lo == hi else val
            a = coefficient_closed_forms(family, kk, m, r, prec)
            if abs(to_float(a)) > vanish_tol:
                continue
            comp = {c: (to_float(coefficient_closed_forms(family, kk, c, lo, prec)),
                        to_float(coefficient_closed_forms(family, kk, c, hi, prec))) for c in companions}
            steady = all(x * y > 0 and min(abs(x), abs(y)) > COMPANION_FLOOR for x, y in comp.values())
            inst = build(family, r, prec)
            sym = skeleton_symmetry(inst, kk)
            base = "A3" if family is Family.TETRA else "B3"
            if not steady:
                space, dim, crit = "indeterminate", 0, False
                note = "companion coefficient not bounded away from zero"
            elif family is Family.TETRA:
                space, dim = "B3Space", 48
                crit = sym == base
                note = "" if crit else "skeleton symmetry jumps to B3 at the same r"
            else:
                space, dim = "JumpedSpace", 96
                crit = True
                note = ""
            cert = "exact" if lo == hi else "numeric"
            out.append(CriticalValue(family, k, to_float(r), (lo, hi), poly.name, (m, to_float(a)), comp,
                                     sym, space, dim, crit, cert, note))
    return CriticalScan(family, k, out)


def critical_roots(family, k: int, prec: int = 100) -> list:
    """Certified critical r values for (family, k) as mpf."""
    return [c.r for c in critical_scan(family, k, prec).critical]
