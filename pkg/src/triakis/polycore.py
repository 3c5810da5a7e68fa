"""Sparse polynomials in three variables with exact or high-precision coefficients.

Coefficients are either :class:`fractions.Fraction` (exact) or
:class:`mpmath.mpf` (big floats, working precision taken from the active
mpmath context).  A polynomial never mixes the two kinds.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Iterable, Iterator, Mapping, Sequence, Union

import mpmath
from mpmath import mpf

Monomial = tuple  # (e1, e2, e3)
Scalar = Union[Fraction, mpf]

DEFAULT_PREC = 100


class ScalarKindError(TypeError):
    """Raised when exact and floating coefficients are combined."""


@contextmanager
def precision(bits: int = DEFAULT_PREC):
    """Run a block with the given mpmath working precision (in bits)."""
    with mpmath.workprec(bits):
        yield


def is_exact(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def to_exact(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise ScalarKindError(f"not an exact scalar: {c!r}")


def to_float(c) -> mpf:
    if isinstance(c, Fraction):
        return mpf(c.numerator) / c.denominator
    return mpf(c)


def parse_scalar(text: str):
    """Parse ``"p/q"`` or an integer as a Fraction, anything else as mpf."""
    text = text.strip()
    try:
        return Fraction(text) if ("/" in text or text.lstrip("+-").isdigit()) else mpf(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse scalar {text!r}") from exc


def monomial_key(mono: Monomial):
    """Total degree first, then lexicographic with x1 > x2 > x3."""
    return (sum(mono), -mono[0], -mono[1], -mono[2])


def monomials_of_degree(d: int) -> list:
    """All exponent triples of total degree ``d`` in canonical order."""
    out = [(a, b, d - a - b) for a in range(d, -1, -1) for b in range(d - a, -1, -1)]
    return out


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


class Poly:
    """Immutable sparse polynomial in x1, x2, x3.

    ``exact`` selects the coefficient kind.  Zero coefficients are never
    stored; for float polynomials only exact zeros are dropped
    automatically, use :meth:`cleanup` to drop small ones.
    """

    __slots__ = ("_terms", "exact")

    def __init__(self, terms: Mapping | Iterable = (), exact: bool | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        raw = {}
        for mono, c in items:
            mono = tuple(int(e) for e in mono)
            if len(mono) != 3 or min(mono) < 0:
                raise ValueError(f"bad monomial {mono}")
            raw[mono] = raw.get(mono, 0) + c
        if exact is None:
            exact = all(is_exact(c) for c in raw.values())
        conv = to_exact if exact else to_float
        self._terms = {m: conv(c) for m, c in raw.items() if c != 0}
        self.exact = exact

    @classmethod
    def _make(cls, terms: dict, exact: bool) -> "Poly":
        # trusted fast path: terms already converted, zeros removed
        p = object.__new__(cls)
        p._terms = terms
        p.exact = exact
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, exact: bool = True) -> "Poly":
        return cls._make({}, exact)

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0, 0): c})

    @classmethod
    def var(cls, axis: int, exact: bool = True) -> "Poly":
        mono = [0, 0, 0]
        mono[axis - 1] = 1
        return cls({tuple(mono): 1}, exact=exact)

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> Iterator:
        for m in sorted(self._terms, key=monomial_key):
            yield m, self._terms[m]

    def coeff(self, mono: Monomial):
        return self._terms.get(tuple(mono), Fraction(0) if self.exact else mpf(0))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    @property
    def homogeneous_degree(self) -> int | None:
        degs = {sum(m) for m in self._terms}
        return degs.pop() if len(degs) == 1 else None

    def norm(self) -> mpf:
        """Max-abs coefficient norm (as mpf)."""
        return max((abs(to_float(c)) for c in self._terms.values()), default=mpf(0))

    # -- kind conversion ----------------------------------------------------
    def to_float(self) -> "Poly":
        if not self.exact:
            return self
        return Poly._make({m: to_float(c) for m, c in self._terms.items()}, False)

    def cleanup(self, tol) -> "Poly":
        """Drop float coefficients with ``|c| < tol``; exact polys are returned as is."""
        if self.exact:
            return self
        return Poly._make({m: c for m, c in self._terms.items() if abs(c) >= tol}, False)

    def _check_kind(self, other: "Poly"):
        if self.exact != other.exact:
            raise ScalarKindError("cannot combine exact and floating polynomials")

    def _coerce_scalar(self, c):
        if self.exact:
            if not is_exact(c):
                raise ScalarKindError(f"floating scalar {c!r} with exact polynomial")
            return to_exact(c)
        return to_float(c)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly._make({(0, 0, 0): self._coerce_scalar(other)}, self.exact) if other != 0 else Poly.zero(self.exact)
        self._check_kind(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        return Poly._make(out, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return Poly._make({m: -c for m, c in self._terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self._coerce_scalar(other)
            if c == 0:
                return Poly.zero(self.exact)
            return Poly._make({m: v * c for m, v in self._terms.items()}, self.exact)
        self._check_kind(other)
        out = {}
        for (a1, a2, a3), c in self._terms.items():
            for (b1, b2, b3), d in other._terms.items():
                key = (a1 + b1, a2 + b2, a3 + b3)
                out[key] = out.get(key, 0) + c * d
        return Poly._make({m: c for m, c in out.items() if c != 0}, self.exact)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Poly._make({(0, 0, 0): Fraction(1) if self.exact else mpf(1)}, self.exact)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.exact == other.exact and self._terms == other._terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.exact, frozenset(self._terms.items())))

    # -- calculus -----------------------------------------------------------
    def partial(self, axis: int) -> "Poly":
        i = axis - 1
        if i not in (0, 1, 2):
            raise ValueError("axis must be 1, 2 or 3")
        out = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return Poly._make(out, self.exact)

    def evaluate(self, point: Sequence):
        x = list(point)
        if not self.exact or not all(is_exact(v) for v in x):
            x = [to_float(v) for v in x]
            zero = mpf(0)
        else:
            x = [to_exact(v) for v in x]
            zero = Fraction(0)
        d = max(self.degree, 0)
        pw = [[1] * (d + 1) for _ in range(3)]
        for i in range(3):
            for j in range(1, d + 1):
                pw[i][j] = pw[i][j - 1] * x[i]
        total = zero
        for (a, b, c), coef in self._terms.items():
            total += coef * pw[0][a] * pw[1][b] * pw[2][c]
        return total

    def act(self, perm: Sequence[int], signs: Sequence[int]) -> "Poly":
        """Return f(g x) for the signed permutation g: (g x)_i = signs[i] * x_{perm[i]}."""
        out = {}
        for m, c in self._terms.items():
            new = [0, 0, 0]
            sgn = 1
            for i in range(3):
                new[perm[i]] += m[i]
                if signs[i] < 0 and m[i] % 2:
                    sgn = -sgn
            out[tuple(new)] = c if sgn > 0 else -c
        return Poly._make(out, self.exact)

    # -- formatting ---------------------------------------------------------
    def format(self, digits: int | None = None) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            if self.exact:
                cs = str(c)
            else:
                n = digits or max(15, int(mpmath.mp.prec * 0.30103))
                cs = mpmath.nstr(c, n, min_fixed=1, max_fixed=0)
            factors = [f"x{i + 1}^{e}" for i, e in enumerate(m) if e]
            parts.append("*".join([cs] + factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.format()})"

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "terms": [[list(m), str(c) if self.exact else mpmath.nstr(c, 40)] for m, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Poly":
        conv = Fraction if data["exact"] else mpf
        return cls({tuple(m): conv(c) for m, c in data["terms"]}, exact=data["exact"])


def partial(f: Poly, axis: int) -> Poly:
    return f.partial(axis)


def evaluate(f: Poly, point: Sequence):
    return f.evaluate(point)


def apply_operator(phi: Poly, f: Poly) -> Poly:
    """Return phi(d) f, the constant-coefficient operator phi applied to f.

    An exact operand is promoted to float when the other one is a float
    polynomial.
    """
    if phi.exact != f.exact:
        phi, f = phi.to_float(), f.to_float()
    out = {}
    fterms = list(f._terms.items())
    for (a1, a2, a3), c in phi._terms.items():
        for (b1, b2, b3), d in fterms:
            if b1 < a1 or b2 < a2 or b3 < a3:
                continue
            w = _falling(b1, a1) * _falling(b2, a2) * _falling(b3, a3)
            key = (b1 - a1, b2 - a2, b3 - a3)
            out[key] = out.get(key, 0) + c * d * w
    return Poly._make({m: c for m, c in out.items() if c != 0}, f.exact)


@dataclass(frozen=True)
class LinearForm:
    """The linear form x -> <vector, x>."""

    vector: tuple

    def __post_init__(self):
        if len(self.vector) != 3:
            raise ValueError("a linear form needs three components")

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.vector)

    def poly(self) -> Poly:
        return Poly({m: v for m, v in zip(((1, 0, 0), (0, 1, 0), (0, 0, 1)), self.vector)},
                    exact=self.exact)

    def power(self, j: int, exact: bool | None = None) -> Poly:
        """<vector, x>**j expanded by the multinomial theorem."""
        exact = self.exact if exact is None else exact
        conv = to_exact if exact else to_float
        v = [conv(c) for c in self.vector]
        out = {}
        for a in range(j + 1):
            pa = v[0] ** a
            for b in range(j - a + 1):
                c = j - a - b
                coef = factorial(j) // (factorial(a) * factorial(b) * factorial(c))
                val = coef * pa * v[1] ** b * v[2] ** c
                if val != 0:
                    out[(a, b, c)] = val
        return Poly._make(out, exact)


def complete_symmetric_exponents(m: int, n: int) -> list:
    """Exponent tuples of all degree-``m`` monomials in ``n`` abstract variables."""
    return [e for e in product(range(m + 1), repeat=n) if sum(e) == m]


def complete_symmetric(m: int, forms: Sequence[LinearForm], exact: bool | None = None) -> Poly:
    """h_m evaluated at two or three linear forms."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if len(forms) not in (2, 3):
        raise ValueError("complete_symmetric takes two or three linear forms")
    if exact is None:
        exact = all(f.exact for f in forms)
    one = Poly._make({(0, 0, 0): Fraction(1) if exact else mpf(1)}, exact)
    pows = [[one] + [f.power(j, exact) for j in range(1, m + 1)] for f in forms]
    return complete_symmetric_from_powers(m, pows)


def complete_symmetric_from_powers(m: int, pows: Sequence[Sequence[Poly]]) -> Poly:
    """h_m from precomputed powers ``pows[i][j]`` = (i-th form)**j, j = 0..m.

    Sums the products over all exponent multisets of size ``m``; the sum is
    grouped by the exponent of the first form to save products.
    """
    exact = pows[0][0].exact
    *head, pa, pb = pows
    tail = []
    for s in range(m + 1):
        acc = Poly.zero(exact)
        for j in range(s + 1):
            acc = acc + pa[j] * pb[s - j]
        tail.append(acc)
    if not head:
        return tail[m]
    (first,) = head
    out = Poly.zero(exact)
    for i in range(m + 1):
        out = out + first[i] * tail[m - i]
    return out


def complete_symmetric_sequence(m: int, forms: Sequence[LinearForm], exact: bool | None = None) -> list:
    """[h_0, ..., h_m] at the given forms, via h_j(.., a) = h_j(..) + a*h_{j-1}(.., a).

    Only multiplications by linear forms occur, which makes this much cheaper
    than expanding products of powers.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if exact is None:
        exact = all(f.exact for f in forms)
    one = Poly._make({(0, 0, 0): Fraction(1) if exact else mpf(1)}, exact)
    seq = [one] + [Poly.zero(exact)] * m
    for form in forms:
        lin = form.poly() if form.exact == exact else form.poly().to_float()
        for j in range(1, m + 1):
            seq[j] = seq[j] + lin * seq[j - 1]
    return seq


# -- named polynomials ----------------------------------------------------

def _x(i: int) -> Poly:
    return Poly.var(i)


def e2() -> Poly:
    return _x(1) ** 2 + _x(2) ** 2 + _x(3) ** 2


def e3() -> Poly:
    return _x(1) * _x(2) * _x(3)


def e4() -> Poly:
    x1, x2, x3 = _x(1) ** 2, _x(2) ** 2, _x(3) ** 2
    return x2 * x3 + x3 * x1 + x1 * x2


def e6() -> Poly:
    return e3() ** 2


def alternating_a3() -> Poly:
    """(x1^2 - x2^2)(x2^2 - x3^2)(x3^2 - x1^2), degree 6."""
    x1, x2, x3 = _x(1) ** 2, _x(2) ** 2, _x(3) ** 2
    return (x1 - x2) * (x2 - x3) * (x3 - x1)


def alternating_b3() -> Poly:
    """x1 x2 x3 times the A3 alternating polynomial, degree 9."""
    return e3() * alternating_a3()


def jumped_generator() -> Poly:
    """Degree-13 generator of the solution space of e2(d) = e6(d) = e4(d)^2 = 0."""
    x1, x2, x3 = _x(1) ** 2, _x(2) ** 2, _x(3) ** 2
    quartic = 5 * (x1 ** 2 + x2 ** 2 + x3 ** 2) - 13 * (x1 * x2 + x2 * x3 + x3 * x1)
    return alternating_b3() * quartic


def signed_permutations(even_only: bool = False) -> list:
    """All (perm, signs) pairs; with ``even_only`` only an even number of sign flips."""
    from itertools import permutations

    out = []
    for perm in permutations(range(3)):
        for signs in product((1, -1), repeat=3):
            if even_only and signs.count(-1) % 2:
                continue
            out.append((perm, signs))
    return out


def apply_signed_permutation(perm, signs, point):
    """(g x)_i = signs[i] * x[perm[i]], matching :meth:`Poly.act`."""
    return tuple(signs[i] * point[perm[i]] for i in range(3))
