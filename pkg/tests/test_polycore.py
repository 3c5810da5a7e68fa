import random
from fractions import Fraction
from itertools import product
from math import comb

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from triakis.polycore import (LinearForm, Poly, ScalarKindError, alternating_a3, alternating_b3,
                              apply_operator, complete_symmetric, complete_symmetric_exponents,
                              complete_symmetric_sequence, e2, e3, e4, e6, jumped_generator,
                              monomials_of_degree, parse_scalar)

x1, x2, x3 = (Poly.var(i) for i in (1, 2, 3))


def brute_expand(factors):
    """Multiply out a product of polynomials given as {monomial: coeff} by looping over term choices."""
    out = {}
    for choice in product(*[list(f.items()) for f in factors]):
        mono = tuple(sum(m[i] for m, _ in choice) for i in range(3))
        c = Fraction(1)
        for _, v in choice:
            c *= v
        out[mono] = out.get(mono, 0) + c
    return {m: c for m, c in out.items() if c != 0}


def brute_operator(phi: Poly, f: Poly) -> Poly:
    """phi(d) f by repeated single partial derivatives."""
    total = Poly.zero()
    for (a, b, c), coef in phi.items():
        g = f
        for axis, n in ((1, a), (2, b), (3, c)):
            for _ in range(n):
                g = g.partial(axis)
        total = total + g * coef
    return total


small_poly = st.dictionaries(
    st.tuples(*[st.integers(0, 2)] * 3).filter(lambda m: sum(m) <= 4),
    st.integers(-5, 5), max_size=5).map(lambda d: Poly(d, exact=True))


def test_additive_inverse_and_doubling():
    assert (x1 + (-x1)).is_zero()
    assert e2() + e2() == e2() * 2


def test_sum_of_alternating_polynomials_has_twelve_terms():
    sq = [v * v for v in (x1, x2, x3)]
    a3 = brute_expand([sq[0] - sq[1], sq[1] - sq[2], sq[2] - sq[0]])
    b3 = brute_expand([x1 * x2 * x3, sq[0] - sq[1], sq[1] - sq[2], sq[2] - sq[0]])
    merged = dict(a3)
    for m, c in b3.items():
        merged[m] = merged.get(m, 0) + c
    total = alternating_a3() + alternating_b3()
    assert len(total) == len({m for m, c in merged.items() if c}) == 12
    assert total == Poly(merged)


def test_products():
    assert e3() * e3() == e6()
    assert e4() * Poly.const(1) == e4()
    d = alternating_a3()
    assert d.homogeneous_degree == 6
    assert len(d) == 6
    assert d.coeff((4, 2, 0)) == -1


def test_mixed_kinds_rejected():
    with pytest.raises(ScalarKindError):
        e2() + e2().to_float()


def test_partials():
    assert (x1 ** 2).partial(1) == x1 * 2
    assert e2().partial(2) == x2 * 2


def test_partial_matches_finite_difference():
    f = alternating_b3()
    df = f.partial(1)
    assert df.homogeneous_degree == 8
    rng = random.Random(3)
    with mpmath.workprec(100):
        for _ in range(5):
            p = [mpf(rng.uniform(-1.5, 1.5)) for _ in range(3)]
            g = lambda t: f.evaluate((t, p[1], p[2]))  # noqa: E731
            fd = mpmath.diff(g, p[0])
            exact = df.evaluate(p)
            assert abs(fd - exact) <= mpf("1e-8") * max(1, abs(exact))


def test_operator_examples():
    # e2(d) e2 = 2 + 2 + 2, computed term by term
    assert brute_operator(e2(), e2()) == Poly.const(6)
    assert apply_operator(e2(), e2()) == Poly.const(6)
    assert apply_operator(e2(), alternating_a3()).is_zero()
    assert apply_operator(e4(), jumped_generator()) == alternating_b3() * -15120


@settings(max_examples=40, deadline=None)
@given(small_poly, small_poly)
def test_operator_agrees_with_repeated_partials(phi, f):
    assert apply_operator(phi, f) == brute_operator(phi, f)


@settings(max_examples=40, deadline=None)
@given(small_poly, small_poly, small_poly)
def test_operator_composition_is_product(f, g, h):
    assert apply_operator(f * g, h) == apply_operator(f, apply_operator(g, h))


@settings(max_examples=40, deadline=None)
@given(small_poly)
def test_partials_commute(f):
    assert f.partial(1).partial(2) == f.partial(2).partial(1)


def test_complete_symmetric_examples():
    p, q = (1, 2, 3), (-1, 0, 5)
    h1 = complete_symmetric(1, [LinearForm(p), LinearForm(q)])
    assert h1 == LinearForm(tuple(a + b for a, b in zip(p, q))).poly()
    h2 = complete_symmetric(2, [LinearForm((1, 0, 0)), LinearForm((0, 1, 0))])
    assert h2 == x1 ** 2 + x1 * x2 + x2 ** 2
    assert len(complete_symmetric_exponents(3, 3)) == comb(5, 3) == 10
    assert complete_symmetric(0, [LinearForm(p), LinearForm(q)]) == Poly.const(1)
    with pytest.raises(ValueError):
        complete_symmetric(2, [LinearForm(p)])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=6, max_size=6), st.integers(1, 8))
def test_complete_symmetric_recurrence(v, m):
    a, b = LinearForm(tuple(v[:3])), LinearForm(tuple(v[3:]))
    lhs = complete_symmetric(m, [a, b])
    rhs = a.poly() * complete_symmetric(m - 1, [a, b]) + b.power(m)
    assert lhs == rhs


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=9, max_size=9), st.integers(0, 6))
def test_sequence_matches_enumeration(v, m):
    forms = [LinearForm(tuple(v[i:i + 3])) for i in (0, 3, 6)]
    seq = complete_symmetric_sequence(m, forms)
    assert all(seq[j] == complete_symmetric(j, forms) for j in range(m + 1))


def test_float_pipeline_matches_exact():
    forms = [LinearForm((Fraction(1, 3), Fraction(-2, 7), 1)), LinearForm((2, Fraction(5, 11), Fraction(-1, 2))),
             LinearForm((Fraction(3, 5), 0, Fraction(4, 9)))]
    with mpmath.workprec(100):
        exact = complete_symmetric(7, forms)
        approx = complete_symmetric(7, [LinearForm(tuple(mpf(c.numerator) / c.denominator if isinstance(c, Fraction)
                                                             else mpf(c) for c in f.vector)) for f in forms])
        assert not approx.exact
        for m, c in exact.items():
            want = mpf(c.numerator) / c.denominator
            assert abs(approx.coeff(m) - want) <= mpf("1e-20") * abs(want)


def test_evaluate_examples():
    assert e2().evaluate((1, 1, 1)) == 3
    assert alternating_b3().evaluate((1, 2, 3)) == 1 * 2 * 3 * (1 - 4) * (4 - 9) * (9 - 1) == 720
    assert jumped_generator().evaluate((1, 1, 1)) == 0


def test_monomial_order_and_parsing():
    assert monomials_of_degree(2)[0] == (2, 0, 0)
    assert len(monomials_of_degree(13)) == comb(15, 2)
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert not isinstance(parse_scalar("1.5"), Fraction)
    with pytest.raises(ValueError):
        parse_scalar("abc")


def test_json_round_trip():
    f = jumped_generator()
    assert Poly.from_json(f.to_json()) == f
    g = (e4() * Fraction(1, 3)).to_float()
    assert Poly.from_json(g.to_json()) == g
