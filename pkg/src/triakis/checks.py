"""One-shot reproduction of every checkable numeric and algebraic claim.

Each ``check_*`` function returns a :class:`CheckResult` made of individual
:class:`Item` comparisons, so a caller can print a pass/fail matrix or gate
a CI job on :func:`run_all`.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .closed_forms import coefficient_closed_forms, listed
from .critical import (OCTA_CHI1, OCTA_CHI2, OCTA_R0, TETRA_CHI1, a6_face_minimum, critical_scan,
                       isolate_positive_roots, r0_exact, verify_radical_identity)
from .geometry import Family, build
from .harmonic import (GUARD_DEGREES, b3_system, jumped_system, a3_system, module_span, same_space, solve,
                       verify_exact_sequence)
from .invariants import decision_coefficients
from .meanvalue import mean_value_defect, sample_centers, verify_space, DEFAULT_RADII
from .polycore import alternating_b3, apply_operator, e2, e4, e6, is_exact, jumped_generator, to_float

R_GRID = tuple(Fraction(s) for s in ("1/2", "1", "3/2", "2", "5/2", "3", "4", "5", "9"))

# published decimal truncations of the critical values
ROOT_TARGETS = {
    "tetra edge": (TETRA_CHI1, mpf("3.62398")),
    "octa edge": (OCTA_CHI1, mpf("2.24580")),
    "octa face": (OCTA_CHI2, mpf("1.82977")),
}
VERTEX_ROOT_TARGET = mpf("1.78381")


@dataclass
class Item:
    label: str
    passed: bool
    observed: str = ""
    expected: str = ""

    def to_json(self) -> dict:
        return {"label": self.label, "passed": self.passed, "observed": self.observed, "expected": self.expected}


@dataclass
class CheckResult:
    key: str
    title: str
    items: list = field(default_factory=list)
    seconds: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.items) and all(i.passed for i in self.items)

    @property
    def failures(self) -> list:
        return [i for i in self.items if not i.passed]

    def add(self, label, passed, observed="", expected=""):
        self.items.append(Item(label, bool(passed), str(observed), str(expected)))

    def line(self) -> str:
        n, bad = len(self.items), len(self.failures)
        return f"{'PASS' if self.passed else 'FAIL'}  {self.key}  {self.title}  ({n - bad}/{n} items, {self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {"key": self.key, "title": self.title, "passed": self.passed, "seconds": round(self.seconds, 3),
                "warnings": self.warnings, "items": [i.to_json() for i in self.items]}


def _s(v, digits=12) -> str:
    return str(v) if is_exact(v) else mpmath.nstr(v, digits)


def check_roots(prec: int = 100) -> CheckResult:
    res = CheckResult("roots", "critical roots are certified and unique")
    with mpmath.workprec(prec):
        for name, (poly, target) in ROOT_TARGETS.items():
            rep = isolate_positive_roots(poly, prec=prec)
            res.add(f"{name}: one positive root (Sturm)", rep.unique, rep.positive_root_count, 1)
            value = rep.values[0] if rep.values else mpf("nan")
            res.add(f"{name}: root value", abs(value - target) < mpf("1e-5"), _s(value, 15), f"{target} +- 1e-5")
        rep = isolate_positive_roots(OCTA_R0, prec=prec)
        closed = 3 * mpf(2) ** mpf(-0.75)
        res.add("octa vertex: one positive root (Sturm)", rep.unique, rep.positive_root_count, 1)
        res.add("octa vertex: root equals 3 * 2^(-3/4)", abs(rep.values[0] - closed) < mpf("1e-10"),
                _s(rep.values[0], 15), _s(closed, 15))
        res.add("octa vertex: closed value", abs(r0_exact(prec) - closed) < mpf("1e-10"), _s(r0_exact(prec), 15),
                _s(closed, 15))
        res.add("octa vertex: decimal value", abs(closed - VERTEX_ROOT_TARGET) < mpf("1e-5"), _s(closed, 15),
                f"{VERTEX_ROOT_TARGET} +- 1e-5")
    return res


def check_oracles(prec: int = 100, grid=R_GRID) -> CheckResult:
    """Geometric assembly plus decomposition against every closed form on the r-grid."""
    res = CheckResult("oracles", "assembled coefficients match the closed forms")
    cells = {}
    for family, k, m in listed():
        cells.setdefault((family, k), []).append(m)
    with mpmath.workprec(prec):
        for (family, k), degrees in cells.items():
            for r in grid:
                inst = build(family, r, prec)
                got = decision_coefficients(inst, k, degrees)
                for m in degrees:
                    want = coefficient_closed_forms(family, k, m, r, prec)
                    if want == 0:
                        ok = abs(to_float(got[m])) < mpf("1e-10")
                    else:
                        ok = abs(to_float(got[m]) - to_float(want)) <= mpf("1e-10") * abs(to_float(want))
                    res.add(f"{family.value} k={k} m={m} r={r}", ok, _s(got[m]), _s(want))
    return res


def check_dimensions() -> CheckResult:
    res = CheckResult("dimensions", "harmonic space dimensions with empty guard degrees")
    for name, system, dim, top in (("A3", a3_system(), 24, 6), ("B3", b3_system(), 48, 9),
                                   ("jumped", jumped_system(), 96, 13)):
        basis = solve(system, top + GUARD_DEGREES)
        res.add(f"{name}: total dimension", basis.total_dim == dim, basis.total_dim, dim)
        res.add(f"{name}: top degree", basis.top_degree == top, basis.top_degree, top)
        empty = all(not basis.per_degree.get(d) for d in range(top + 1, top + GUARD_DEGREES + 1))
        res.add(f"{name}: degrees {top + 1}..{top + GUARD_DEGREES} empty", empty)
    return res


def check_generators() -> CheckResult:
    res = CheckResult("generators", "module generators and their operator identities")
    gen, alt = jumped_generator(), alternating_b3()
    res.add("e2(d) F = 0", apply_operator(e2(), gen).is_zero())
    res.add("e6(d) F = 0", apply_operator(e6(), gen).is_zero())
    image = apply_operator(e4(), gen)
    res.add("e4(d) F = -15120 * Delta_B3", image == alt * -15120)
    res.add("span of F and its derivatives = jumped solutions",
            same_space(module_span(gen, 13), solve(jumped_system(), 13), 13))
    res.add("span of Delta_B3 and its derivatives = B3 solutions",
            same_space(module_span(alt, 9), solve(b3_system(), 9), 9))
    return res


def check_exact_sequence() -> CheckResult:
    res = CheckResult("exact-sequence", "e4(d) maps the jumped space onto the B3 harmonics")
    rep = verify_exact_sequence(13)
    res.add("H_B3 inside Sol", rep.b3_in_sol)
    res.add("kernel dimension", rep.kernel_dim == 48, rep.kernel_dim, 48)
    res.add("kernel equals H_B3", rep.kernel_is_b3)
    res.add("image dimension", rep.image_dim == 48, rep.image_dim, 48)
    res.add("image equals H_B3", rep.image_is_b3)
    for f in rep.failures:
        res.add("diagnostic", False, f)
    return res


def check_radical_identities() -> CheckResult:
    res = CheckResult("radical-identities", "conjugate-radical factorizations of the edge coefficients")
    for family in (Family.TETRA, Family.OCTA):
        rep = verify_radical_identity(family, samples=20, prec=128)
        res.add(f"{family.value}: polynomial identity over the rationals", rep.polynomial_identity)
        res.add(f"{family.value}: 20 seeded samples at 128 bits", not rep.failures,
                _s(rep.max_relative, 3), "< 1e-25")
    return res


def check_spot_values(prec: int = 100) -> CheckResult:
    """Published decimals of the companion coefficients, compared with the geometric assembly."""
    res = CheckResult("spot-values", "reference decimal values of nonvanishing coefficients")
    with mpmath.workprec(prec):
        cases = (
            ("tetra edge a_6 at its critical r", Family.TETRA, 1, 6, TETRA_CHI1, mpf("1661.36"), mpf("0.01")),
            ("octa edge a_8 at its critical r", Family.OCTA, 1, 8, OCTA_CHI1, mpf("54.1247"), mpf("0.001")),
            ("octa face a_8 at its critical r", Family.OCTA, 2, 8, OCTA_CHI2, mpf("13.2853"), mpf("0.001")),
        )
        for label, family, k, m, poly, target, tol in cases:
            r = isolate_positive_roots(poly, prec=prec).values[0]
            got = decision_coefficients(build(family, r, prec), k, [m])[m]
            closed = coefficient_closed_forms(family, k, m, r, prec)
            res.add(label, abs(got - target) <= tol, f"{_s(got, 10)} (closed form {_s(closed, 10)})",
                    f"{target} +- {tol}")
        x_golden, r_min, v_min = a6_face_minimum(prec)
        res.add("octa face a_6 minimum value", abs(v_min - mpf("22.0304")) <= mpf("1e-3"), _s(v_min, 10),
                "22.0304 +- 1e-3")
        res.add("octa face a_6 minimum location", abs(r_min - mpf("0.743471")) <= mpf("1e-4"),
                f"{_s(r_min, 10)} (golden section {x_golden:.8f})", "0.743471 +- 1e-4")
    return res


def _critical_instances(prec: int):
    tetra_r1 = isolate_positive_roots(TETRA_CHI1, prec=prec).values[0]
    octa_r1 = isolate_positive_roots(OCTA_CHI1, prec=prec).values[0]
    octa_r2 = isolate_positive_roots(OCTA_CHI2, prec=prec).values[0]
    return [
        (Family.TETRA, 1, tetra_r1, b3_system()),
        (Family.OCTA, 0, r0_exact(prec), jumped_system()),
        (Family.OCTA, 1, octa_r1, jumped_system()),
        (Family.OCTA, 2, octa_r2, jumped_system()),
    ]


def check_mean_value(prec: int = 100) -> CheckResult:
    res = CheckResult("mean-value", "mean value property of the identified spaces")
    centers = sample_centers()
    with mpmath.workprec(prec):
        for family, k, r, system in _critical_instances(prec):
            inst = build(family, r, prec)
            basis = solve(system, 13)
            rep = verify_space(inst, k, basis, counterexamples={})
            worst = max(rep.defects.values())
            res.add(f"{family.value} k={k} r={_s(r, 8)}: {basis.total_dim} members", worst < rep.pass_tol,
                    _s(worst, 3), f"< {_s(rep.pass_tol, 3)}")
            least = min(mean_value_defect(inst, k, e2(), x, rho) for x in centers for rho in DEFAULT_RADII)
            res.add(f"{family.value} k={k}: e2 fails everywhere", least > mpf("1e-3"), _s(least, 6), "> 1e-3")
        inst = build(Family.OCTA, 2, prec)
        rep = verify_space(inst, 0, [("F", jumped_generator())], counterexamples={})
        worst = rep.defects["F"]
        res.add("octa k=0 r=2: F fails", worst > mpf("1e-4"), _s(worst, 6), "> 1e-4")
    return res


# expected critical sets: family -> k -> list of root polynomials (None for the exact vertex root)
_EXPECTED = {
    Family.TETRA: {0: [], 1: [TETRA_CHI1], 2: [], 3: []},
    Family.OCTA: {0: [OCTA_R0], 1: [OCTA_CHI1], 2: [OCTA_CHI2], 3: [OCTA_CHI2]},
}


def check_truth_table(prec: int = 100) -> CheckResult:
    res = CheckResult("truth-table", "critical scan reproduces the complete critical sets")
    with mpmath.workprec(prec):
        for family, by_k in _EXPECTED.items():
            for k, polys in by_k.items():
                scan = critical_scan(family, k, prec)
                found = [c.r for c in scan.critical]
                want = [isolate_positive_roots(p, prec=prec).values[0] for p in polys]
                ok = len(found) == len(want) and all(abs(a - b) < mpf("1e-10") for a, b in zip(found, want))
                res.add(f"{family.value} k={k}: critical set", ok, [_s(v, 12) for v in found],
                        [_s(v, 12) for v in want])
        for k in (0, 2, 3):
            scan = critical_scan(Family.TETRA, k, prec)
            at3 = [c for c in scan.candidates if abs(c.r - 3) < mpf("1e-20")]
            ok = len(at3) == 1 and not at3[0].critical and at3[0].symmetry == "B3"
            res.add(f"tetra k={k}: r=3 is a shared symmetry jump, not critical", ok,
                    at3[0].note if at3 else "no candidate at r=3")
    return res


CHECKS = {
    "roots": check_roots,
    "oracles": check_oracles,
    "dimensions": check_dimensions,
    "generators": check_generators,
    "exact-sequence": check_exact_sequence,
    "radical-identities": check_radical_identities,
    "spot-values": check_spot_values,
    "mean-value": check_mean_value,
    "truth-table": check_truth_table,
}

_PRECISION_AWARE = {"roots", "oracles", "spot-values", "mean-value", "truth-table"}
FULL_PRECISION = 100


def run_check(key: str, prec: int = FULL_PRECISION) -> CheckResult:
    fn = CHECKS[key]
    start = time.perf_counter()
    warnings = []
    if key in _PRECISION_AWARE:
        if prec < FULL_PRECISION:
            warnings.append(f"{prec} bits is below the {FULL_PRECISION} bits the tolerances assume; "
                            f"ran at {FULL_PRECISION}")
        res = fn(max(prec, FULL_PRECISION))
    else:
        res = fn()
    res.seconds = time.perf_counter() - start
    res.warnings = warnings
    return res


def run_all(prec: int = FULL_PRECISION, only=None) -> list:
    return [run_check(key, prec) for key in CHECKS if only is None or key in only]
