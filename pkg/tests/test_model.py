import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plsgeom import (
    EigenSpectrum,
    IndexSubset,
    ObservationVector,
    PlsConfig,
    SquaredObservation,
    all_subsets,
    exp_correlation,
    krylov_matrix,
    pls_fit,
    spectrum_from_gram,
    vandermonde,
)
from plsgeom.errors import (
    DimensionMismatch,
    InvalidDimension,
    NonSymmetric,
    NotPositiveDefinite,
    RepeatedEigenvalue,
    SingularKrylovSystem,
    SingularSystem,
    ValidationError,
)
from plsgeom.model import pivoted_lstsq

from conftest import positive_psi, spectra, spectrum_psi_n


class TestEigenSpectrum:
    def test_rejects_non_decreasing(self):
        with pytest.raises(ValidationError):
            EigenSpectrum([1.0, 2.0, 0.5])

    def test_rejects_repeated(self):
        with pytest.raises(RepeatedEigenvalue):
            EigenSpectrum([2.0, 1.0, 1.0])

    def test_rejects_non_positive(self):
        with pytest.raises(NotPositiveDefinite):
            EigenSpectrum([2.0, 1.0, 0.0])

    def test_rejects_too_short(self):
        with pytest.raises(InvalidDimension):
            EigenSpectrum([1.0])

    def test_read_only(self):
        sp = EigenSpectrum([3.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            sp.lam[0] = 5.0

    def test_check_directions(self):
        sp = EigenSpectrum([3.0, 2.0, 1.0])
        sp.check_directions(2)
        for n in (0, 3):
            with pytest.raises(InvalidDimension):
                sp.check_directions(n)


class TestGram:
    def test_diagonal(self):
        sp = spectrum_from_gram(np.diag([1.0, 3.0, 2.0]))
        np.testing.assert_allclose(sp.lam, [3.0, 2.0, 1.0])

    def test_non_symmetric(self):
        with pytest.raises(NonSymmetric):
            spectrum_from_gram(np.array([[2.0, 1.0], [0.0, 1.0]]))

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            spectrum_from_gram(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_exp_correlation(self):
        G = exp_correlation(4, 0.5)
        assert G[0, 3] == pytest.approx(np.exp(-1.5))
        np.testing.assert_allclose(np.diag(G), 1.0)

    @given(spectra(2, 6), st.integers(0, 2**32 - 1))
    def test_rotation_invariance(self, sp, seed):
        Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((sp.m, sp.m)))
        G = Q @ np.diag(sp.lam) @ Q.T
        np.testing.assert_allclose(spectrum_from_gram((G + G.T) / 2).lam, sp.lam, rtol=1e-9)


class TestIndexSubset:
    def test_parse_and_label(self):
        t = IndexSubset.parse("3,1,5", 5)
        assert t.indices == (1, 3, 5)
        assert t.label() == "1;3;5"
        assert t.complement().indices == (2, 4)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            IndexSubset((0, 2), 3)

    def test_monomial(self):
        assert IndexSubset((1, 3), 3).monomial([2.0, 5.0, 7.0]) == 14.0

    def test_all_subsets_count(self):
        subs = list(all_subsets(6, 3))
        assert len(subs) == 20
        assert subs == sorted(subs)


class TestObservation:
    def test_support_relative_zero_tol(self):
        y = ObservationVector([1.0, 1e-14, -2.0])
        assert y.support.indices == (1, 3)
        assert y.cardinality == 2
        np.testing.assert_allclose(y.squared().psi, [1.0, 1e-28, 4.0])

    def test_psi_negative(self):
        with pytest.raises(ValidationError):
            SquaredObservation([1.0, -1.0])


class TestKrylov:
    @given(spectra(2, 7), st.data())
    def test_krylov_factorises(self, sp, data):
        n = data.draw(st.integers(1, sp.m - 1))
        y = data.draw(positive_psi(sp.m))
        K = krylov_matrix(sp, y, n)
        cols = [y]
        for _ in range(n - 1):
            cols.append(sp.lam * cols[-1])
        np.testing.assert_allclose(K, np.column_stack(cols), rtol=1e-12)
        np.testing.assert_allclose(K, y[:, None] * vandermonde(sp, n), rtol=1e-12)

    def test_pivoted_lstsq_rank_deficient(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(SingularSystem):
            pivoted_lstsq(A, np.ones(3))


class TestPlsFit:
    def test_n1_small(self):
        fit = pls_fit([2.0, 1.0], [1.0, 1.0], 1)
        np.testing.assert_allclose(fit.beta_hat, [2 / 3, 2 / 3])

    def test_support_below_direction_count(self):
        with pytest.raises(SingularKrylovSystem, match="support below direction count"):
            pls_fit([3.0, 2.0, 1.0], [1.0, 0.0, 0.0], 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pls_fit([3.0, 2.0, 1.0], [1.0, 1.0], 1)

    @given(spectrum_psi_n(2, 7))
    def test_projection_idempotent_and_residual_orthogonal(self, case):
        sp, psi, n = case
        y = np.sqrt(psi)
        fit = pls_fit(sp, y, n)
        P = fit.projection
        np.testing.assert_allclose(P @ P, P, atol=1e-8 * max(1.0, np.abs(P).max()))
        K = krylov_matrix(sp, y, n)
        # Lambda-weighted normal equations: K^T (y - Lambda beta_hat) = 0
        r = y - sp.lam * fit.beta_hat
        assert np.abs(K.T @ r).max() <= 1e-8 * np.abs(K.T).sum(axis=1).max() * np.abs(y).max()

    @given(spectrum_psi_n(2, 7))
    def test_fit_pieces_consistent(self, case):
        sp, psi, n = case
        y = np.sqrt(psi)
        fit = pls_fit(sp, y, n)
        np.testing.assert_allclose(fit.y_hat, sp.lam * fit.beta_hat, rtol=1e-12)
        np.testing.assert_allclose(fit.residual, y - fit.y_hat, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(fit.projection @ y, fit.y_hat, rtol=1e-7, atol=1e-9 * np.abs(y).max())

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            PlsConfig(zero_tol=-1.0)
