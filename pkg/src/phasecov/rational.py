"""Real rational functions of ``s`` with gcd reduction, exact derivatives and
partial-fraction inverse Laplace transforms.

Coefficients are stored in ascending degree. Polynomial arithmetic uses
``numpy.polynomial.polynomial``; the gcd is a Euclidean algorithm with a
relative coefficient tolerance.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateKernel, DomainError, UnsupportedInversion

COEF_TOL = 1e-12


def trim(c, tol: float = COEF_TOL) -> np.ndarray:
    """Drop high-degree coefficients that are negligible relative to the largest one."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    keep = np.nonzero(np.abs(c) > tol * scale)[0]
    return c[: keep[-1] + 1].copy()


def is_zero_poly(c) -> bool:
    return bool(np.all(np.asarray(c) == 0.0))


def poly_gcd(a, b, tol: float = COEF_TOL) -> np.ndarray:
    """Monic gcd of two polynomials by the Euclidean algorithm.

    Both inputs are scaled to unit max-norm; a remainder whose coefficients are
    all below ``tol`` counts as zero.
    """
    a, b = trim(a), trim(b)
    if is_zero_poly(a):
        return b / b[-1] if not is_zero_poly(b) else np.ones(1)
    if is_zero_poly(b):
        return a / a[-1]
    a = a / np.max(np.abs(a))
    b = b / np.max(np.abs(b))
    if len(b) > len(a):
        a, b = b, a
    while True:
        _, rem = P.polydiv(a, b)
        rem = np.atleast_1d(rem)
        if np.max(np.abs(rem)) <= tol:
            return b / b[-1]
        rem = trim(rem, tol)
        a, b = b, rem / np.max(np.abs(rem))


class RationalLaplace:
    """``num(s) / den(s)`` with real coefficients, denominator monic after reduction."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,), reduce: bool = True):
        num, den = np.asarray(num, dtype=float), np.asarray(den, dtype=float)
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise DomainError("coefficients must be finite")
        num, den = trim(num), trim(den)
        if is_zero_poly(den):
            raise DomainError("denominator is identically zero")
        if is_zero_poly(num):
            num, den = np.zeros(1), np.ones(1)
        elif reduce:
            g = poly_gcd(num, den)
            if len(g) > 1:
                num = trim(P.polydiv(num, g)[0])
                den = trim(P.polydiv(den, g)[0])
        lead = den[-1]
        self.num = num / lead
        self.den = den / lead

    # construction helpers
    @classmethod
    def constant(cls, c: float) -> "RationalLaplace":
        return cls([c], [1.0])

    @classmethod
    def zero(cls) -> "RationalLaplace":
        return cls([0.0], [1.0])

    @classmethod
    def s(cls) -> "RationalLaplace":
        return cls([0.0, 1.0], [1.0])

    @classmethod
    def coerce(cls, other) -> "RationalLaplace":
        if isinstance(other, RationalLaplace):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return cls.constant(float(other))
        return NotImplemented

    # algebra
    def __add__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return RationalLaplace(P.polyadd(P.polymul(self.num, other.den), P.polymul(other.num, self.den)),
                               P.polymul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalLaplace(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return RationalLaplace(P.polymul(self.num, other.num), P.polymul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalLaplace(P.polymul(self.num, other.den), P.polymul(self.den, other.num))

    def __rtruediv__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def is_zero(self) -> bool:
        return is_zero_poly(self.num)

    @property
    def degree(self) -> tuple[int, int]:
        return len(self.num) - 1, len(self.den) - 1

    def __call__(self, s):
        return P.polyval(s, self.num) / P.polyval(s, self.den)

    def approx_equal(self, other, tol: float = 1e-9) -> bool:
        other = self.coerce(other)
        if self.degree != other.degree:
            return False
        return np.allclose(self.num, other.num, atol=tol) and np.allclose(self.den, other.den, atol=tol)

    def __repr__(self):
        return f"RationalLaplace(num={self.num.tolist()}, den={self.den.tolist()})"

    # poles and inversion
    def poles(self) -> np.ndarray:
        if len(self.den) == 1:
            return np.zeros(0, dtype=complex)
        return np.roots(self.den[::-1])

    def real_poles(self, imag_tol: float = 1e-9) -> np.ndarray:
        p = self.poles()
        return np.sort(p[np.abs(p.imag) <= imag_tol].real)

    def cancel_common_roots(self, tol: float = 1e-6) -> "RationalLaplace":
        """Cancel numerator/denominator roots that agree to ``tol`` (relative).

        The Euclidean gcd misses common factors of multiplicity > 1, whose
        roots are only accurate to about sqrt(machine epsilon).
        """
        if len(self.num) < 2 or len(self.den) < 2:
            return self
        zeros = list(np.roots(self.num[::-1]))
        poles = list(np.roots(self.den[::-1]))
        kept = []
        for p in poles:
            dist = [abs(p - z) for z in zeros]
            if dist and min(dist) <= tol * max(1.0, abs(p)):
                zeros.pop(int(np.argmin(dist)))
            else:
                kept.append(p)
        if len(kept) == len(poles):
            return self
        num = self.num[-1] * np.real(np.poly(zeros))[::-1] if zeros else np.array([self.num[-1]])
        den = np.real(np.poly(kept))[::-1] if kept else np.ones(1)
        return RationalLaplace(num, den, reduce=False)

    def partial_fractions(self, imag_tol: float = 1e-9, sep_tol: float = 1e-7) -> list[tuple[float, float]]:
        """``[(pole, residue), ...]`` for a strictly proper function with simple real poles."""
        if self.is_zero():
            return []
        if not np.all(np.abs(self.poles().imag) <= imag_tol):
            self = self.cancel_common_roots()
        n_deg, d_deg = self.degree
        if n_deg >= d_deg:
            raise UnsupportedInversion("improper rational function has no ordinary inverse transform")
        poles = self.poles()
        if np.any(np.abs(poles.imag) > imag_tol):
            raise UnsupportedInversion(f"complex poles {poles[np.abs(poles.imag) > imag_tol]}")
        poles = np.sort(poles.real)
        if len(poles) > 1 and np.min(np.diff(poles)) < sep_tol:
            raise UnsupportedInversion("repeated poles")
        dden = P.polyder(self.den)
        return [(float(p), float(P.polyval(p, self.num) / P.polyval(p, dden))) for p in poles]

    def inverse_laplace(self):
        """Time-domain function ``t -> sum_k r_k exp(p_k t)``."""
        terms = self.partial_fractions()

        def f(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            for pole, res in terms:
                out = out + res * np.exp(pole * t)
            return out

        return f

    # serialisation
    def to_dict(self) -> dict:
        return {"num": self.num.tolist(), "den": self.den.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "RationalLaplace":
        try:
            return cls(data["num"], data.get("den", [1.0]))
        except KeyError:
            raise DomainError("rational function needs a 'num' list") from None


def derivative_parts(f: RationalLaplace, n: int) -> tuple[np.ndarray, np.ndarray, int]:
    """``(N, D, k)`` with ``f^(n) = N / D**k`` where ``D = f.den``.

    Uses ``d/ds [N / D^k] = (N' D - k N D') / D^(k+1)``, which keeps the
    numerator degree linear in ``n``.
    """
    if n < 0:
        raise DomainError("derivative order must be non-negative")
    num, den, k = f.num.copy(), f.den, 1
    dden = P.polyder(den) if len(den) > 1 else np.zeros(1)
    for _ in range(n):
        num = P.polysub(P.polymul(P.polyder(num) if len(num) > 1 else np.zeros(1), den),
                        k * P.polymul(num, dden))
        num = np.atleast_1d(num)
        k += 1
    return num, den, k


def rational_derivative(f: RationalLaplace, n: int) -> RationalLaplace:
    """Exact ``n``-th derivative as a reduced rational function."""
    num, den, k = derivative_parts(f, n)
    return RationalLaplace(num, P.polypow(den, k))


def eval_derivative(f: RationalLaplace, n: int, s):
    """Evaluate ``f^(n)(s)`` without expanding ``den**k``."""
    num, den, k = derivative_parts(f, n)
    return P.polyval(s, num) / P.polyval(s, den) ** k


def factorial(n: int) -> float:
    return float(math.factorial(n))


def require_nonzero(f: RationalLaplace, what: str) -> RationalLaplace:
    if f.is_zero():
        raise DegenerateKernel(f"{what} is identically zero")
    return f
