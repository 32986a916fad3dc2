import numpy as np
import pytest
from hypothesis import given

from plsgeom import (
    EigenSpectrum,
    IndexSubset,
    McConfig,
    all_subsets,
    corner_dof,
    fd_jacobian,
    gdof_estimators,
    mc_gdof,
    mc_noise,
    prediction_jacobian,
)
from plsgeom.errors import ValidationError

from conftest import spectrum_psi_n


class TestJacobian:
    @given(spectrum_psi_n(2, 6))
    def test_matches_finite_differences(self, case):
        sp, psi, n = case
        rep = prediction_jacobian(sp, np.sqrt(psi), n)
        assert rep.fd_error <= 1e-4

    @given(spectrum_psi_n(2, 6))
    def test_traces(self, case):
        sp, psi, n = case
        rep = prediction_jacobian(sp, np.sqrt(psi), n, check_fd=False)
        J = rep.jacobian
        assert rep.gdof_hat == pytest.approx(np.trace(J))
        assert rep.gdof_dp_hat == pytest.approx(np.trace(2 * J - J.T @ J), rel=1e-12, abs=1e-9)

    def test_sign_flip_invariance(self):
        sp = EigenSpectrum([3.0, 2.0, 1.2, 0.5])
        y = np.array([0.7, -1.1, 0.4, 0.9])
        a = gdof_estimators(sp, y, 2)
        b = gdof_estimators(sp, -y, 2)
        assert a == pytest.approx(b, rel=1e-12)

    def test_fd_helper_shape(self):
        J = fd_jacobian([3.0, 2.0, 1.0], [1.0, 1.0, 1.0], 1)
        assert J.shape == (3, 3)


class TestCornerDof:
    def test_closed_form_matches_jacobian_at_corner(self):
        # at an observation supported on tau the traces reduce to the closed forms
        sp = EigenSpectrum([3.0, 2.2, 1.1, 0.6, 0.2])
        for tau in all_subsets(5, 2):
            y = np.zeros(5)
            y[tau.zero_based] = [1.0, 0.7]
            g, gdp = prediction_jacobian(sp, y, 2, check_fd=False).gdof_hat, None
            assert corner_dof(sp, tau)[0] == pytest.approx(g, rel=1e-7, abs=1e-7)

    def test_accepts_tuple(self):
        sp = EigenSpectrum([3.0, 2.0, 1.0])
        assert corner_dof(sp, (1,)) == corner_dof(sp, IndexSubset((1,), 3))


class TestMonteCarlo:
    def _cfg(self, R=50, seed=7):
        return McConfig(beta=np.array([0.1, 0.01, 0.01, 5.0, 5.0]), sigma=0.02, replications=R, seed=seed, n=3)

    def test_deterministic(self, ref_spectrum):
        a = mc_gdof(ref_spectrum, self._cfg())
        b = mc_gdof(ref_spectrum, self._cfg())
        np.testing.assert_array_equal(a.gdof, b.gdof)
        np.testing.assert_array_equal(a.gdof_dp, b.gdof_dp)

    def test_worker_count_does_not_change_samples(self, ref_spectrum):
        a = mc_gdof(ref_spectrum, self._cfg(), n_jobs=1)
        b = mc_gdof(ref_spectrum, self._cfg(), n_jobs=4)
        np.testing.assert_array_equal(a.gdof, b.gdof)

    def test_noise_prefix_stable(self, ref_spectrum):
        a = mc_noise(ref_spectrum, self._cfg(R=10))
        b = mc_noise(ref_spectrum, self._cfg(R=20))
        np.testing.assert_array_equal(a, b[:10])

    def test_single_replicate_has_no_se(self, ref_spectrum):
        r = mc_gdof(ref_spectrum, self._cfg(R=1))
        assert r.mc_se is None
        assert r.gdof.shape == (1,)

    def test_cdf_samples_sorted(self, ref_spectrum):
        g, d = mc_gdof(ref_spectrum, self._cfg()).cdf_samples
        assert np.all(np.diff(g) >= 0) and np.all(np.diff(d) >= 0)

    def test_validation(self):
        with pytest.raises(ValidationError):
            McConfig(beta=np.ones(3), sigma=0.0, replications=10, seed=1, n=1)
        with pytest.raises(ValidationError):
            McConfig(beta=np.ones(3), sigma=1.0, replications=0, seed=1, n=1)
