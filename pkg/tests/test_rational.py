import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st

from phasecov.errors import DomainError, UnsupportedInversion
from phasecov.rational import (RationalLaplace, derivative_parts, eval_derivative, poly_gcd,
                               rational_derivative, trim)

S = sp.symbols("s")
small = st.integers(-4, 4).map(float)


def to_sympy(f: RationalLaplace):
    num = sum(sp.Float(c) * S**k for k, c in enumerate(f.num))
    den = sum(sp.Float(c) * S**k for k, c in enumerate(f.den))
    return num / den


def test_trim_and_zero():
    assert trim([1.0, 2.0, 0.0, 1e-20]).tolist() == [1.0, 2.0]
    assert RationalLaplace.zero().is_zero()
    with pytest.raises(DomainError):
        RationalLaplace([1.0], [0.0])
    with pytest.raises(DomainError):
        RationalLaplace([float("nan")], [1.0])


def test_gcd_cancels_common_factor():
    # (s+1)(s+2) / ((s+1)(s+3))
    f = RationalLaplace([2, 3, 1], [3, 4, 1])
    assert f.num.tolist() == pytest.approx([2, 1])
    assert f.den.tolist() == pytest.approx([3, 1])
    assert poly_gcd([2, 3, 1], [3, 4, 1]) == pytest.approx([1, 1])


def test_monic_denominator():
    f = RationalLaplace([2.0], [4.0, 2.0])
    assert f.den[-1] == 1.0 and f.num.tolist() == [1.0]


@settings(max_examples=100)
@given(st.lists(small, min_size=1, max_size=3), st.lists(small, min_size=1, max_size=3),
       st.floats(-3, 3), st.floats(0.1, 5))
def test_reduction_preserves_values(p, q, root, s):
    # multiply numerator and denominator by a common factor (s - root) and reduce
    assume(any(p) and any(q))
    common = np.array([-root, 1.0])
    f = RationalLaplace(np.polynomial.polynomial.polymul(p, common),
                        np.polynomial.polynomial.polymul(q, common))
    raw = np.polynomial.polynomial.polyval(s, p) / np.polynomial.polynomial.polyval(s, q)
    assume(np.isfinite(raw) and abs(np.polynomial.polynomial.polyval(s, q)) > 1e-3 and abs(s - root) > 1e-3)
    assert f(s) == pytest.approx(raw, rel=1e-10, abs=1e-10)


def test_arithmetic_against_sympy():
    f = RationalLaplace([1], [1, 1])
    g = RationalLaplace([0, 2], [2, 0, 1])
    for expr, ours in [(to_sympy(f) + to_sympy(g), f + g), (to_sympy(f) * to_sympy(g), f * g),
                       (to_sympy(f) - to_sympy(g), f - g), (to_sympy(f) / to_sympy(g), f / g),
                       (3 - to_sympy(f), 3 - f), (1 / to_sympy(g), 1 / g)]:
        for s in (0.3, 1.7, 4.0):
            assert ours(s) == pytest.approx(float(expr.subs(S, s)), rel=1e-12)
    with pytest.raises(ZeroDivisionError):
        f / RationalLaplace.zero()


def test_derivative_examples():
    f = RationalLaplace([1], [1, 1])
    d = rational_derivative(f, 1)
    assert d.approx_equal(RationalLaplace([-1], [1, 2, 1]))
    assert rational_derivative(f, 0).approx_equal(f)
    g = RationalLaplace([1], [1, 0, 1])
    h = 1e-4
    fd = (g(1 + h) - 2 * g(1) + g(1 - h)) / h**2
    assert eval_derivative(g, 2, 1.0) == pytest.approx(fd, abs=1e-6)
    with pytest.raises(DomainError):
        rational_derivative(f, -1)


@settings(max_examples=60)
@given(st.lists(small, min_size=1, max_size=3), st.lists(small, min_size=2, max_size=4),
       st.integers(0, 6), st.floats(0.2, 4))
def test_derivatives_against_sympy(p, q, n, s):
    assume(any(p) and q[-1] != 0)
    f = RationalLaplace(p, q)
    assume(abs(np.polynomial.polynomial.polyval(s, f.den)) > 0.05)
    ref = float(sp.diff(to_sympy(f), S, n).subs(S, s))
    assert eval_derivative(f, n, s) == pytest.approx(ref, rel=1e-8, abs=1e-9)
    # the expanded form multiplies den by itself n + 1 times, so near a pole its
    # evaluation loses about (n + 1) * log10((|s| + |p|) / |s - p|) digits
    poles = f.poles()
    if poles.size == 0 or np.min(np.abs(s - poles) / (abs(s) + np.abs(poles))) > 0.2:
        assert rational_derivative(f, n)(s) == pytest.approx(ref, rel=1e-6, abs=1e-8)


def test_derivative_numerator_degree_is_linear():
    f = RationalLaplace([1, 2], [3, 1, 4, 1])
    num, den, k = derivative_parts(f, 8)
    assert k == 9 and len(num) - 1 <= 1 + 8 * (len(den) - 2)


def test_partial_fractions_and_inversion():
    f = RationalLaplace([1], [2, 3, 1])  # 1 / ((s+1)(s+2))
    terms = dict(f.partial_fractions())
    assert terms[-1.0] == pytest.approx(1.0) and terms[-2.0] == pytest.approx(-1.0)
    t = np.linspace(0, 10, 11)
    assert np.allclose(f.inverse_laplace()(t), np.exp(-t) - np.exp(-2 * t), atol=1e-14)
    assert np.allclose(RationalLaplace([1], [0, 1]).inverse_laplace()(t), 1.0)
    assert np.all(RationalLaplace.zero().inverse_laplace()(t) == 0)


def test_unsupported_inversion():
    with pytest.raises(UnsupportedInversion):
        RationalLaplace([1], [1, 0, 1]).inverse_laplace()
    with pytest.raises(UnsupportedInversion):
        RationalLaplace([1], [1, 2, 1]).inverse_laplace()
    with pytest.raises(UnsupportedInversion):
        RationalLaplace([0, 0, 1], [1, 1]).inverse_laplace()


def test_json_round_trip():
    f = RationalLaplace([0.5, 1], [2, 3, 1])
    g = RationalLaplace.from_dict(f.to_dict())
    assert g.approx_equal(f, tol=0)
    with pytest.raises(DomainError):
        RationalLaplace.from_dict({"den": [1]})


def test_double_common_factor_is_cancelled_before_inversion():
    # (s - r)^2 (s + 2) / ((s - r)^2 s (s + 1)) with the double factor perturbed as the gcd leaves it
    r = 0.578
    eps = 3e-8
    num = np.polynomial.polynomial.polyfromroots([r + eps, r - eps, -2.0])
    den = np.polynomial.polynomial.polyfromroots([r + 1j * eps, r - 1j * eps, 0.0, -1.0]).real
    f = RationalLaplace(num, den, reduce=False)
    assert np.any(np.abs(f.poles().imag) > 1e-9)
    t = np.linspace(0, 5, 11)
    # (s + 2) / (s (s + 1)) = 2/s - 1/(s + 1)
    assert np.allclose(f.inverse_laplace()(t), 2 - np.exp(-t), atol=1e-6)
