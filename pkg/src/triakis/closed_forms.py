"""Closed-form leading invariant coefficients of the skeleton polynomials.

Each entry gives the coefficient of the distinguished basis product in the
degree-m skeleton polynomial of the given family and skeleton dimension:
e2, e3, e4, e3^2 for tetrahedra (m = 2, 3, 4, 6) and e2, e4, e6, e4^2 for
octahedra (m = 2, 4, 6, 8).  Face entries use the normalized flag weights
of :func:`triakis.geometry.flag_weights`.  These are test oracles only.
"""
from __future__ import annotations

from fractions import Fraction as Fr

import mpmath

from .geometry import Family
from .polycore import is_exact, to_exact, to_float


def _tetra_root(r):
    return mpmath.sqrt(3 * (r * r - 2 * r + 9))


def _octa_root(r):
    return mpmath.sqrt(3 * (r * r - 2 * r + 3))


S2 = mpmath.sqrt

# (family, k, m) -> (needs_radicals, formula)
_TABLE = {
    (Family.TETRA, 0, 2): (False, lambda r: Fr(4, 9) * r**2 + 4),
    (Family.TETRA, 0, 3): (False, lambda r: Fr(8, 9) * (3 - r) * (r**2 + 3 * r + 9)),
    (Family.TETRA, 0, 4): (False, lambda r: Fr(16, 81) * r**4 + 16),
    (Family.TETRA, 0, 6): (False, lambda r: Fr(64, 243) * (r**2 + 9) * (r**4 - 9 * r**2 + 81)),

    (Family.TETRA, 1, 2): (True, lambda r: 20 * S2(2) + Fr(4, 9) * (r**2 + r + 9) * _tetra_root(r)),
    (Family.TETRA, 1, 3): (True, lambda r: 96 * S2(2) + Fr(8, 9) * (3 - r) * (r**2 + 4 * r + 9) * _tetra_root(r)),
    (Family.TETRA, 1, 4): (True, lambda r: 48 * S2(2)
                           + Fr(16, 81) * (r**4 + r**3 - 3 * r**2 + 9 * r + 81) * _tetra_root(r)),
    (Family.TETRA, 1, 6): (True, lambda r: 768 * S2(2)
                           + Fr(64, 243) * (r**6 + r**5 - 3 * r**4 - 18 * r**3 - 27 * r**2 + 81 * r + 729)
                           * _tetra_root(r)),

    (Family.TETRA, 2, 2): (False, lambda r: Fr(8, 3) * (r**2 + 2 * r + 15)),
    (Family.TETRA, 2, 3): (False, lambda r: Fr(16, 3) * (3 - r) * (r**2 + 5 * r + 12)),
    (Family.TETRA, 2, 4): (False, lambda r: Fr(32, 27) * (r**4 + 2 * r**3 - 3 * r**2 + 81)),
    (Family.TETRA, 2, 6): (False, lambda r: Fr(128, 81)
                           * (r**6 + 2 * r**5 - 3 * r**4 - 27 * r**3 - 54 * r**2 + 81 * r + 972)),

    (Family.OCTA, 0, 2): (False, lambda r: Fr(8, 9) * r**2 + 2),
    (Family.OCTA, 0, 4): (False, lambda r: Fr(32, 81) * (r**4 - Fr(81, 8))),
    (Family.OCTA, 0, 6): (False, lambda r: Fr(2, 243) * (4 * r**2 + 9) * (16 * r**4 - 36 * r**2 + 81)),
    (Family.OCTA, 0, 8): (False, lambda r: Fr(128, 6561) * r**8 + 4),

    (Family.OCTA, 1, 2): (True, lambda r: 8 * S2(2) + Fr(8, 9) * (r**2 + r + 3) * _octa_root(r)),
    (Family.OCTA, 1, 4): (True, lambda r: -12 * S2(2)
                          + Fr(16, 81) * (2 * r**4 + 2 * r**3 - 9 * r - 27) * _octa_root(r)),
    (Family.OCTA, 1, 6): (True, lambda r: 12 * S2(2)
                          + Fr(8, 243) * (16 * r**6 + 16 * r**5 - 18 * r**3 + 81 * r + 243) * _octa_root(r)),
    (Family.OCTA, 1, 8): (True, lambda r: 12 * S2(2)
                          + Fr(16, 6561) * (8 * r**8 + 8 * r**7 - 36 * r**5 - 108 * r**4 - 162 * r**3
                                            + 729 * r + 2187) * _octa_root(r)),

    (Family.OCTA, 2, 2): (False, lambda r: Fr(8, 3) * (r**2 + 2 * r + 6)),
    (Family.OCTA, 2, 4): (False, lambda r: Fr(8, 27) * (4 * r**4 + 8 * r**3 + 6 * r**2 - 18 * r - 81)),
    (Family.OCTA, 2, 6): (False, lambda r: Fr(8, 81)
                          * (16 * r**6 + 32 * r**5 + 24 * r**4 - 18 * r**3 - 54 * r**2 + 243)),
    (Family.OCTA, 2, 8): (False, lambda r: Fr(8, 2187)
                          * (16 * r**8 + 32 * r**7 + 24 * r**6 - 72 * r**5 - 324 * r**4 - 648 * r**3
                             - 486 * r**2 + 1458 * r + 6561)),
}

# basis-product key (generator exponents) of each tabulated coefficient
LEADING_KEY = {
    Family.TETRA: {2: (1, 0, 0), 3: (0, 1, 0), 4: (0, 0, 1), 6: (0, 2, 0)},
    Family.OCTA: {2: (1, 0, 0), 4: (0, 1, 0), 6: (0, 0, 1), 8: (0, 2, 0)},
}


def listed() -> list:
    """All (family, k, m) triples with a closed form."""
    return sorted(_TABLE, key=lambda t: (t[0].value, t[1], t[2]))


def coefficient_closed_forms(family, k: int, m: int, r, prec: int = 100):
    """Closed-form coefficient value; a Fraction when r is rational and no radicals occur."""
    family = Family.parse(family)
    try:
        radical, fn = _TABLE[(family, k, m)]
    except KeyError:
        raise KeyError(f"no closed form for family={family.value}, k={k}, m={m}") from None
    with mpmath.workprec(prec):
        if is_exact(r) and not radical:
            return fn(to_exact(r))
        return +to_float(fn(to_float(r)))
