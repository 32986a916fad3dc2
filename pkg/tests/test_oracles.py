"""Exact-arithmetic oracles (sympy / fractions) for the closed forms used in the package."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from plsgeom import (
    EigenSpectrum,
    corner_dof,
    corner_shrinkage,
    corner_weight,
    pls_fit,
    prediction_jacobian,
    shrinkage_average,
    shrinkage_direct,
)

RATIONAL_LAMS = [
    (Fraction(5), Fraction(3), Fraction(2), Fraction(1)),
    (Fraction(7, 2), Fraction(9, 4), Fraction(3, 2), Fraction(2, 3), Fraction(1, 5)),
]


def _exact_shrinkage(lam, psi, n):
    """omega = Lambda V (V^T Psi Lambda V)^-1 V^T psi in rationals."""
    L = sp.diag(*lam)
    V = sp.Matrix([[l**k for k in range(n)] for l in lam])
    P = sp.diag(*psi)
    alpha = (V.T * P * L * V).LUsolve(V.T * sp.Matrix(psi))
    return [float(x) for x in L * V * alpha]


def _exact_pls_beta(lam, y, n):
    L = sp.diag(*lam)
    K = sp.Matrix([[yi * li**k for k in range(n)] for yi, li in zip(y, lam)])
    return [float(x) for x in K * (K.T * L * K).LUsolve(K.T * sp.Matrix(y))]


class TestPlsFit:
    def test_two_by_two(self):
        lam = [sp.Integer(2), sp.Integer(1)]
        y = [sp.Integer(1), sp.Integer(1)]
        assert _exact_pls_beta(lam, y, 1) == pytest.approx([2 / 3, 2 / 3])
        np.testing.assert_allclose(pls_fit([2.0, 1.0], [1.0, 1.0], 1).beta_hat, [2 / 3, 2 / 3], rtol=1e-15)

    @pytest.mark.parametrize("lam", RATIONAL_LAMS)
    def test_rational_spectra(self, lam):
        rng = np.random.default_rng(len(lam))
        for n in range(1, len(lam)):
            y = [Fraction(int(v), 7) for v in rng.integers(1, 20, size=len(lam))]
            exact = _exact_pls_beta([sp.Rational(l.numerator, l.denominator) for l in lam],
                                    [sp.Rational(v.numerator, v.denominator) for v in y], n)
            got = pls_fit([float(l) for l in lam], [float(v) for v in y], n).beta_hat
            np.testing.assert_allclose(got, exact, rtol=1e-9)


class TestShrinkage:
    @pytest.mark.parametrize("lam", RATIONAL_LAMS)
    def test_direct_and_average_vs_exact(self, lam):
        m = len(lam)
        psi = [Fraction(k + 1, 3) for k in range(m)]
        for n in range(1, m):
            exact = _exact_shrinkage([sp.Rational(l.numerator, l.denominator) for l in lam],
                                     [sp.Rational(p.numerator, p.denominator) for p in psi], n)
            lf, pf = [float(l) for l in lam], [float(p) for p in psi]
            np.testing.assert_allclose(shrinkage_direct(lf, pf, n).omega, exact, rtol=1e-10)
            np.testing.assert_allclose(shrinkage_average(lf, pf, n).triple.omega, exact, rtol=1e-10)

    @pytest.mark.parametrize("lam", RATIONAL_LAMS)
    def test_corner_vs_exact_solve(self, lam):
        m = len(lam)
        ls = [sp.Rational(l.numerator, l.denominator) for l in lam]
        for n in range(1, m):
            for tau in itertools.combinations(range(m), n):
                A = sp.Matrix([[ls[j] ** (k + 1) for k in range(n)] for j in tau])
                alpha = A.LUsolve(sp.ones(n, 1))
                omega = [float(sum(alpha[k] * ls[i] ** (k + 1) for k in range(n))) for i in range(m)]
                t = corner_shrinkage([float(l) for l in lam], tuple(j + 1 for j in tau))
                np.testing.assert_allclose(t.omega, omega, rtol=1e-12, atol=1e-12)
                np.testing.assert_allclose(t.alpha, [float(a) for a in alpha], rtol=1e-12)

    def test_pi_exact(self):
        assert corner_weight([4.0, 2.0, 1.0], (1, 3)).pi == 36.0
        lam = RATIONAL_LAMS[1]
        for tau in itertools.combinations(range(5), 3):
            exact = 1
            for j in tau:
                exact *= lam[j]
            for a, b in itertools.combinations(tau, 2):
                exact *= (lam[a] - lam[b]) ** 2
            got = corner_weight([float(l) for l in lam], tuple(j + 1 for j in tau)).pi
            assert got == pytest.approx(float(exact), rel=1e-13)


class TestJacobianN1:
    def test_symbolic_closed_form(self):
        m = 3
        ys = sp.symbols("y1:4", real=True)
        ls = sp.symbols("l1:4", positive=True)
        y = sp.Matrix(ys)
        L = sp.diag(*ls)
        s = (y.T * y)[0]
        q = (y.T * L * y)[0]
        y_hat = L * y * s / q
        J_sym = y_hat.jacobian(y)
        closed = (s / q) * L + (2 / q) * L * y * y.T - (2 * s / q**2) * L * y * y.T * L
        assert sp.simplify(J_sym - closed) == sp.zeros(m, m)

        lam_v = [3.0, 1.5, 0.5]
        y_v = [0.8, -1.2, 0.5]
        subs = dict(zip(ls, lam_v)) | dict(zip(ys, y_v))
        J_num = np.array(J_sym.subs(subs).evalf(30), dtype=float)
        rep = prediction_jacobian(lam_v, y_v, 1)
        np.testing.assert_allclose(rep.jacobian, J_num, rtol=1e-12, atol=1e-14)


def test_corner_dof_vs_exact():
    lam = RATIONAL_LAMS[1]
    ls = [sp.Rational(l.numerator, l.denominator) for l in lam]
    m = len(ls)
    for tau in itertools.combinations(range(m), 2):
        z = [sp.prod([1 - ls[i] / ls[j] for j in tau]) for i in range(m)]
        off = [i for i in range(m) if i not in tau]
        g = 2 + sum(1 - z[i] for i in off)
        gdp = m - sum(z[i] ** 2 for i in off)
        got = corner_dof(EigenSpectrum([float(l) for l in lam]), tuple(j + 1 for j in tau))
        assert got[0] == pytest.approx(float(g), rel=1e-12)
        assert got[1] == pytest.approx(float(gdp), rel=1e-12)
