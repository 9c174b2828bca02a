"""Exact-coefficient univariate polynomials and Sturm real-root isolation.

Coefficient lists are constant term first. Arithmetic is done in
:class:`fractions.Fraction`, so sign counts are exact; only the final
enclosures are rounded (outward) to floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateLeadingCoefficient, InvalidParameter

MAX_DEGREE = 30
ENCLOSURE_WIDTH = 1e-14


@dataclass(frozen=True)
class PolynomialCert:
    """Integer (or rational) coefficients, constant term first, with a short tag."""

    coefficients: tuple
    description: str = ""

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return horner(self.coefficients, x)


def _frac(c):
    return [Fraction(v) for v in c]


def trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def horner(c, x):
    acc = 0 * x
    for a in reversed(c):
        acc = acc * x + a
    return acc


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return trim(out)


def poly_prod(*polys):
    out = [1]
    for p in polys:
        out = poly_mul(out, p)
    return out


def derivative(c):
    return trim([k * c[k] for k in range(1, len(c))]) or [0]


def divmod_poly(a, b):
    a, b = _frac(trim(a)), _frac(trim(b))
    if b == [0]:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = a[:]
    while len(r) >= len(b) and r != [0]:
        k = len(r) - len(b)
        f = r[-1] / b[-1]
        q[k] = f
        for j, bj in enumerate(b):
            r[j + k] -= f * bj
        r.pop()
        r = trim(r) if r else [Fraction(0)]
    return trim(q), trim(r) or [Fraction(0)]


def gcd_poly(a, b):
    a, b = _frac(trim(a)), _frac(trim(b))
    while b != [0]:
        a, b = b, divmod_poly(a, b)[1]
    return [x / a[-1] for x in a]


def squarefree(c):
    """``c / gcd(c, c')``: same distinct roots, all simple."""
    g = gcd_poly(c, derivative(c))
    if len(g) == 1:
        return _frac(trim(c))
    return divmod_poly(c, g)[0]


def sturm_sequence(c):
    seq = [_frac(trim(c)), _frac(derivative(c))]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        rem = divmod_poly(seq[-2], seq[-1])[1]
        if rem == [0]:
            break
        seq.append([-x for x in rem])
    return seq


def sign_changes(seq, x) -> int:
    vals = [horner(p, x) for p in seq]
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq, lo, hi) -> int:
    """Distinct real roots in ``(lo, hi]`` (Sturm's theorem)."""
    return sign_changes(seq, lo) - sign_changes(seq, hi)


def cauchy_bound(c) -> Fraction:
    c = _frac(c)
    lead = abs(c[-1])
    return 1 + max((abs(a) / lead for a in c[:-1]), default=Fraction(0))


def _down(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) <= x else math.nextafter(f, -math.inf)


def _up(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) >= x else math.nextafter(f, math.inf)


def real_roots(p, width: float = ENCLOSURE_WIDTH):
    """All distinct real roots of ``p`` with float enclosures.

    Parameters
    ----------
    p : PolynomialCert or sequence
        Integer or rational coefficients, constant term first.
    width : float
        Target enclosure width.

    Returns
    -------
    list of (float, (float, float))
        Root estimates in increasing order with outward-rounded intervals
        ``lo <= root <= hi`` and ``hi - lo <= width`` (up to one ulp of rounding).
    """
    coeffs = list(p.coefficients if isinstance(p, PolynomialCert) else p)
    if len(coeffs) - 1 > MAX_DEGREE:
        raise InvalidParameter(f"degree {len(coeffs) - 1} exceeds {MAX_DEGREE}")
    if not coeffs or coeffs[-1] == 0:
        raise DegenerateLeadingCoefficient("leading coefficient is zero")
    if len(coeffs) == 1:
        return []
    sf = squarefree(coeffs)
    seq = sturm_sequence(sf)
    B = cauchy_bound(sf)
    wid = Fraction(width)

    out = []
    stack = [(-B, B)]
    while stack:
        lo, hi = stack.pop()
        k = count_roots(seq, lo, hi)
        if k == 0:
            continue
        if k == 1:
            out.append(_refine(sf, lo, hi, wid))
            continue
        mid = (lo + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort(key=lambda e: e[0])
    return out


def _refine(sf, lo, hi, wid):
    """Bisect a single-root interval ``(lo, hi]`` down to width ``wid``."""
    f_hi = horner(sf, hi)
    if f_hi == 0:
        v = float(hi)
        return v, (_down(hi), _up(hi))
    # the single root is simple and lies in (lo, hi); lo itself may be another
    # root, so signs are compared against hi only
    while hi - lo > wid:
        mid = (lo + hi) / 2
        f_mid = horner(sf, mid)
        if f_mid == 0:
            return float(mid), (_down(mid), _up(mid))
        if (f_mid > 0) == (f_hi > 0):
            hi = mid
        else:
            lo = mid
    return float((lo + hi) / 2), (_down(lo), _up(hi))


def discriminant_quadratic(c) -> Fraction:
    c0, c1, c2 = _frac(c)
    return c1 * c1 - 4 * c2 * c0


# ---------------------------------------------------------------------------
# Transcribed certificates

#: Resultant of the asymmetric branch in r: even powers r^4 .. r^26.
DEG26_COEFFS = {
    4: 7744275,
    6: 80139015,
    8: 351783930,
    10: 861239064,
    12: 1282072196,
    14: 1176047932,
    16: 632113944,
    18: 172153584,
    20: 18541440,
    22: 3882816,
    24: 777600,
    26: 186624,
}


def deg26_certificate(coeffs=None) -> PolynomialCert:
    terms = DEG26_COEFFS if coeffs is None else coeffs
    c = [0] * (max(terms) + 1)
    for k, v in terms.items():
        c[k] = v
    return PolynomialCert(tuple(c), "asymmetric-branch resultant in r (degree 26)")


def deflate_power(cert: PolynomialCert, k: int) -> PolynomialCert:
    """Divide by ``r^k``; the low coefficients must vanish."""
    c = cert.coefficients
    if any(v != 0 for v in c[:k]):
        raise InvalidParameter(f"polynomial is not divisible by r^{k}")
    return PolynomialCert(tuple(c[k:]), cert.description + f" / r^{k}")


#: Factors of the symmetric-branch elimination polynomial in r (constant first).
ELIMINATION_FACTORS = (
    (0, 1),  # r
    (1, 2),  # 1 + 2r
    (1, 2, 2),  # 1 + 2r + 2r^2
    (8, -9, 6),  # 8 - 9r + 6r^2
    (1, 3, 0, 6),  # 1 + 3r + 6r^3
)

FP_CUBIC_R = PolynomialCert((1, 3, 0, 6), "6r^3 + 3r + 1")
FP_CUBIC_X = PolynomialCert((-5, 15, -9, 3), "3x^3 - 9x^2 + 15x - 5")


class MultiPoly:
    """Sparse multivariate polynomial with exact coefficients.

    Only ``+ - * **`` with integers are supported, which is enough to expand
    the product-form equations into monomial tables.
    """

    __slots__ = ("terms", "nvars")

    def __init__(self, terms, nvars):
        self.terms = {k: v for k, v in terms.items() if v != 0}
        self.nvars = nvars

    @classmethod
    def variables(cls, nvars):
        return [cls({tuple(int(i == k) for i in range(nvars)): 1}, nvars) for k in range(nvars)]

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly({(0,) * self.nvars: other}, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return MultiPoly(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({k: -v for k, v in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + v1 * v2
        return MultiPoly(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = self._lift(1)
        for _ in range(e):
            out = out * self
        return out

    def arrays(self):
        """``(exponents (T, nvars) int array, coefficients (T,) float array)``."""
        keys = sorted(self.terms)
        return np.array(keys, dtype=int).reshape(-1, self.nvars), np.array(
            [float(self.terms[k]) for k in keys]
        )
