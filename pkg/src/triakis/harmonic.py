"""Solution spaces of constant-coefficient PDE systems, graded by degree."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
from mpmath import mpf

from . import linalg
from .geometry import Family, build
from .invariants import decision_coefficients, tau_series
from .polycore import (Poly, alternating_a3, alternating_b3, apply_operator, e2, e3, e4, e6,
                       is_exact, jumped_generator, monomials_of_degree, to_float)

GUARD_DEGREES = 2


@dataclass(frozen=True)
class PdeSystem:
    """The system phi(d) f = 0 for every phi in ``generators``."""

    generators: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            d = g.homogeneous_degree
            if d is None or d < 1:
                raise ValueError("system generators must be homogeneous of degree >= 1")

    @property
    def exact(self) -> bool:
        return all(g.exact for g in self.generators)


def a3_system() -> PdeSystem:
    return PdeSystem((e2(), e3(), e4()), "a3")


def b3_system() -> PdeSystem:
    return PdeSystem((e2(), e4(), e6()), "b3")


def jumped_system() -> PdeSystem:
    return PdeSystem((e2(), e6(), e4() ** 2), "jumped")


SYSTEMS = {"a3": a3_system, "b3": b3_system, "jumped": jumped_system}


@dataclass(frozen=True)
class GradedBasis:
    """Per-degree bases of a graded polynomial space, each in reduced echelon form."""

    per_degree: dict
    max_degree_checked: int

    @property
    def total_dim(self) -> int:
        return sum(len(b) for b in self.per_degree.values())

    @property
    def dims(self) -> dict:
        return {d: len(b) for d, b in sorted(self.per_degree.items()) if b}

    @property
    def top_degree(self) -> int | None:
        nonzero = [d for d, b in self.per_degree.items() if b]
        return max(nonzero) if nonzero else None

    def elements(self) -> list:
        return [f for d in sorted(self.per_degree) for f in self.per_degree[d]]

    def truncate(self, max_degree: int) -> "GradedBasis":
        return GradedBasis({d: b for d, b in self.per_degree.items() if d <= max_degree},
                           min(max_degree, self.max_degree_checked))

    def to_json(self) -> dict:
        return {
            "total_dim": self.total_dim,
            "max_degree_checked": self.max_degree_checked,
            "dims": {str(d): n for d, n in self.dims.items()},
            "basis": {str(d): [f.to_json() for f in b] for d, b in sorted(self.per_degree.items()) if b},
        }


# -- coordinates -------------------------------------------------------------

def _column_index(d: int) -> dict:
    return {m: i for i, m in enumerate(monomials_of_degree(d))}


def to_vector(f: Poly, d: int) -> dict:
    idx = _column_index(d)
    return {idx[m]: c for m, c in f.terms.items()}


def from_vector(vec: dict, d: int, exact: bool) -> Poly:
    monos = monomials_of_degree(d)
    return Poly({monos[i]: c for i, c in vec.items()}, exact=exact)


def reduce_span(polys, d: int, exact: bool = True, tol=None) -> list:
    """Canonical basis (reduced echelon form) of the span of degree-d polynomials."""
    rows = [to_vector(p, d) for p in polys if not p.is_zero()]
    if not rows:
        return []
    piv = linalg.rref(rows, len(monomials_of_degree(d)), exact, tol)
    return [from_vector(piv[c], d, exact) for c in sorted(piv)]


def span_rank(polys, d: int, exact: bool = True, tol=None) -> int:
    return len(reduce_span(polys, d, exact, tol))


# -- solution spaces ---------------------------------------------------------

def _degree_kernel(system: PdeSystem, d: int, tol=None) -> list:
    exact = system.exact
    monos = monomials_of_degree(d)
    rows = {}
    for j, mono in enumerate(monos):
        x = Poly({mono: 1}, exact=exact)
        for gi, phi in enumerate(system.generators):
            img = apply_operator(phi, x)
            for m, c in img.terms.items():
                rows.setdefault((gi, m), {})[j] = c
    if not rows:
        ker = linalg.kernel_from_rref({}, len(monos), exact)
        return [from_vector(v, d, exact) for v in ker]
    ker = linalg.nullspace(list(rows.values()), len(monos), exact, tol)
    return [from_vector(v, d, exact) for v in ker]


@lru_cache(maxsize=64)
def _solve_cached(system: PdeSystem, max_degree: int, tol) -> GradedBasis:
    return GradedBasis({d: _degree_kernel(system, d, tol) for d in range(max_degree + 1)}, max_degree)


def solve(system: PdeSystem, max_degree: int, tol=None) -> GradedBasis:
    """Per-degree kernels of f -> (phi(d) f) for degrees 0..max_degree."""
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if not system.exact and tol is None:
        raise ValueError("a float system needs a rank tolerance")
    return _solve_cached(system, max_degree, tol)


def module_span(generator: Poly, max_degree: int, tol=None) -> GradedBasis:
    """Span of all derivatives of ``generator``, graded by degree up to max_degree."""
    if generator.is_zero():
        return GradedBasis({d: [] for d in range(max_degree + 1)}, max_degree)
    top = generator.degree
    exact = generator.exact
    per_degree = {d: [] for d in range(max_degree + 1)}
    # each homogeneous part generates its own layers; merge per degree
    parts = {}
    for m, c in generator.terms.items():
        parts.setdefault(sum(m), {})[m] = c
    layers = {sum(next(iter(t))): [Poly(t, exact=exact)] for t in parts.values()}
    collected = {d: list(v) for d, v in layers.items()}
    for d in range(top, 0, -1):
        current = reduce_span(collected.get(d, []), d, exact, tol)
        collected[d] = current
        below = collected.setdefault(d - 1, [])
        for f in current:
            for axis in (1, 2, 3):
                g = f.partial(axis)
                if not g.is_zero():
                    below.append(g)
    collected[0] = reduce_span(collected.get(0, []), 0, exact, tol)
    for d in per_degree:
        per_degree[d] = collected.get(d, [])
    return GradedBasis(per_degree, max_degree)


def same_space(a: GradedBasis, b: GradedBasis, max_degree: int | None = None) -> bool:
    """Degree-by-degree equality of two canonically reduced bases."""
    top = max_degree if max_degree is not None else max(a.max_degree_checked, b.max_degree_checked)
    for d in range(top + 1):
        if a.per_degree.get(d, []) != b.per_degree.get(d, []):
            return False
    return True


def annihilation_residual(phi: Poly, f: Poly, phi_size=None) -> mpf:
    """max |coeff of phi(d) f| relative to the a-priori bound for its size.

    The bound is (sum |phi|) (sum |f|) times the largest derivative factor
    deg(f)!/(deg(f) - deg(phi))!.  ``phi_size`` replaces sum |phi| when phi
    is the result of cancellation and its own size says nothing.
    """
    img = apply_operator(phi, f)
    if img.is_zero():
        return mpf(0)
    l1 = lambda p: mpmath.fsum(abs(to_float(c)) for c in p.terms.values())  # noqa: E731
    size = l1(phi) if phi_size is None else max(l1(phi), to_float(phi_size))
    falling = mpmath.ff(f.degree, phi.degree) if f.degree >= phi.degree else 1
    return img.norm() / (size * l1(f) * falling)


# -- exact sequence ----------------------------------------------------------

@dataclass
class ExactSequenceReport:
    dim_sol: int
    dim_b3: int
    b3_in_sol: bool
    image_dim: int
    image_is_b3: bool
    kernel_dim: int
    kernel_is_b3: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return dict(self.__dict__, ok=self.ok)


def verify_exact_sequence(max_degree: int = 13) -> ExactSequenceReport:
    """Check 0 -> H_B3 -> Sol -> H_B3 -> 0 where the last map is e4(d)."""
    if max_degree < 13:
        raise ValueError("the jumped space reaches degree 13")
    top = max_degree + GUARD_DEGREES
    sol = solve(jumped_system(), top)
    hb3 = solve(b3_system(), top)
    kernel = solve(PdeSystem(jumped_system().generators + (e4(),), "jumped+e4"), top)
    op = e4()
    failures = []
    contained = True
    image_dim = 0
    image_ok = True
    for d in range(top + 1):
        s, h = sol.per_degree[d], hb3.per_degree[d]
        if span_rank(s + h, d) != len(s):
            contained = False
            failures.append(f"degree {d}: H_B3 not inside Sol (defect {span_rank(s + h, d) - len(s)})")
        if d >= 4:
            img = reduce_span([apply_operator(op, f) for f in s], d - 4)
            image_dim += len(img)
            if img != hb3.per_degree[d - 4]:
                image_ok = False
                failures.append(f"degree {d - 4}: image of e4(d) differs from H_B3 "
                                f"({len(img)} vs {len(hb3.per_degree[d - 4])})")
        if kernel.per_degree[d] != h:
            failures.append(f"degree {d}: kernel of e4(d) differs from H_B3 "
                            f"({len(kernel.per_degree[d])} vs {len(h)})")
    kernel_ok = same_space(kernel, hb3, top)
    if sol.total_dim != 96:
        failures.append(f"dim Sol = {sol.total_dim}, expected 96")
    if image_dim != hb3.total_dim:
        image_ok = False
    return ExactSequenceReport(sol.total_dim, hb3.total_dim, contained, image_dim, image_ok,
                               kernel.total_dim, kernel_ok, failures)


# -- identification of polyhedral harmonics --------------------------------

class Space(enum.Enum):
    A3 = "A3Space"
    B3 = "B3Space"
    JUMPED = "JumpedSpace"
    INDETERMINATE = "indeterminate"


SPACE_INFO = {
    Space.A3: ("a3", 24, alternating_a3),
    Space.B3: ("b3", 48, alternating_b3),
    Space.JUMPED: ("jumped", 96, jumped_generator),
}

ZERO_BAND = mpf("1e-8")
ANNIHILATION_TOL = mpf("1e-18")


def zero_threshold(prec: int) -> mpf:
    """Values at or below this are treated as zero for a float computation."""
    return mpf(2) ** (-(2 * prec) // 3)


def classify_zero(value, prec: int, band=ZERO_BAND) -> str:
    if is_exact(value):
        return "zero" if value == 0 else "nonzero"
    a = abs(value)
    if a <= zero_threshold(prec):
        return "zero"
    if a <= band:
        return "indeterminate"
    return "nonzero"


def decide_space(family: Family, pattern: dict) -> Space:
    """Apply the case analysis on the zero pattern of the decision coefficients."""
    nz = lambda *ms: all(pattern[m] == "nonzero" for m in ms)  # noqa: E731
    if family is Family.TETRA:
        if nz(2, 3, 4):
            return Space.A3
        if pattern[3] == "zero" and nz(2, 4, 6):
            return Space.B3
        return Space.INDETERMINATE
    if nz(2, 4, 6):
        return Space.B3
    if pattern[4] == "zero" and nz(2, 6, 8):
        return Space.JUMPED
    return Space.INDETERMINATE


@dataclass
class Equivalence:
    family: Family
    k: int
    r: object
    space: Space
    coefficients: dict
    pattern: dict
    dimension: int | None
    generator: str | None
    annihilation: dict  # degree -> relative residual of tau_m(d) on the generator
    annihilated: bool
    band: tuple

    def to_json(self) -> dict:
        num = lambda v: str(v) if is_exact(v) else mpmath.nstr(v, 15)  # noqa: E731
        return {
            "family": self.family.value,
            "k": self.k,
            "r": num(self.r),
            "space": self.space.value,
            "dimension": self.dimension,
            "generator": self.generator,
            "coefficients": {str(m): num(v) for m, v in self.coefficients.items()},
            "pattern": {str(m): p for m, p in self.pattern.items()},
            "annihilation": {str(m): mpmath.nstr(v, 5) for m, v in self.annihilation.items()},
            "annihilated": self.annihilated,
            "zero_band": [mpmath.nstr(self.band[0], 5), mpmath.nstr(self.band[1], 5)],
        }


def equivalence_check(family, k: int, r, max_degree: int | None = None, max_tau_degree: int = 8,
                      prec: int = 100, full_basis: bool = False, instance=None) -> Equivalence:
    """Identify the polyhedral harmonic space of the k-skeleton at parameter r.

    The zero pattern of the decision coefficients picks the space; then the
    skeleton operators of degree <= max_tau_degree are applied to the
    space's module generator.  Because each space is closed under
    differentiation and these operators commute with derivatives, killing
    the generator kills the whole space.  ``full_basis`` also checks every
    basis element explicitly.
    """
    family = Family.parse(family)
    inst = instance or build(family, r, prec)
    with mpmath.workprec(inst.prec):
        coeffs = decision_coefficients(inst, k)
        pattern = {m: classify_zero(v, inst.prec) for m, v in coeffs.items()}
        space = decide_space(family, pattern)
        annihilation = {}
        ok = False
        dim = gen_name = None
        if space is not Space.INDETERMINATE:
            name, dim, gen_fn = SPACE_INFO[space]
            gen_name = gen_fn.__name__
            targets = [gen_fn()]
            if full_basis:
                top = max_degree if max_degree is not None else gen_fn().degree + GUARD_DEGREES
                basis = solve(SYSTEMS[name](), top)
                dim = basis.total_dim
                targets = basis.elements()
            series = tau_series(inst, k, max_tau_degree)
            ok = True
            for m, t in series.items():
                size = None if t.poly.exact else t.magnitude
                annihilation[m] = max(annihilation_residual(t.poly, f, size) for f in targets)
                ok = ok and annihilation[m] <= (0 if t.poly.exact else ANNIHILATION_TOL)
    return Equivalence(family, k, inst.r, space, coeffs, pattern, dim, gen_name,
                       annihilation, ok, (zero_threshold(inst.prec), ZERO_BAND))
