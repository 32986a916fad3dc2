"""Prediction Jacobian of PLS and the GDoF / GDoF_DP plug-in estimators.

``J = d y_hat / d y^T = (I - 2P) Omega + 2P`` with ``Omega = diag(omega)``;
``gdof_hat = tr(J)`` and ``gdof_dp_hat = tr(2J - J^T J)``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FdMismatch, SingularSystem, ValidationError
from .model import DEFAULT_CONFIG, IndexSubset, PlsConfig, _frozen, as_observation, as_spectrum, pls_fit
from .shrinkage import _as_subset, corner_shrinkage, shrinkage_direct

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DofReport:
    gdof_hat: float
    gdof_dp_hat: float
    jacobian: np.ndarray
    fd_error: float | None = None


def _jacobian(spectrum, y, n, cfg) -> np.ndarray:
    fit = pls_fit(spectrum, y, n, cfg)
    omega = shrinkage_direct(spectrum, y * y, n, cfg).omega
    P = fit.projection
    m = P.shape[0]
    return (np.eye(m) - 2.0 * P) * omega[None, :] + 2.0 * P


def _traces(J: np.ndarray) -> tuple:
    return float(np.trace(J)), float(np.trace(2.0 * J - J.T @ J))


def fd_jacobian(spectrum, y, n: int, cfg: PlsConfig = DEFAULT_CONFIG, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences of ``y -> y_hat`` with step ``rel_step * (1 + |y_i|)``."""
    y = np.asarray(y, dtype=float)
    J = np.empty((y.size, y.size))
    for i in range(y.size):
        h = rel_step * (1.0 + abs(y[i]))
        yp, ym = y.copy(), y.copy()
        yp[i] += h
        ym[i] -= h
        J[:, i] = (pls_fit(spectrum, yp, n, cfg).y_hat - pls_fit(spectrum, ym, n, cfg).y_hat) / (2.0 * h)
    return J


def prediction_jacobian(
    spectrum,
    y,
    n: int,
    cfg: PlsConfig = DEFAULT_CONFIG,
    check_fd: bool = True,
    fd_tol: float | None = 1e-4,
) -> DofReport:
    """Analytic Jacobian of the PLS prediction, optionally checked by finite differences.

    When the max abs deviation from central differences exceeds ``fd_tol``
    FdMismatch is raised; pass ``fd_tol=None`` to only report it.
    """
    spectrum = as_spectrum(spectrum)
    y = as_observation(y, cfg.zero_tol).y
    if y.size != spectrum.m:
        raise DimensionMismatch(f"y has length {y.size}, spectrum has m={spectrum.m}")
    J = _jacobian(spectrum, y, n, cfg)
    fd_error = None
    if check_fd:
        fd_error = float(np.max(np.abs(J - fd_jacobian(spectrum, y, n, cfg))))
        if fd_tol is not None and fd_error > fd_tol:
            raise FdMismatch(f"analytic Jacobian deviates from finite differences by {fd_error:.3g}")
    g, gdp = _traces(J)
    return DofReport(gdof_hat=g, gdof_dp_hat=gdp, jacobian=_frozen(J), fd_error=fd_error)


def gdof_estimators(spectrum, y, n: int, cfg: PlsConfig = DEFAULT_CONFIG) -> tuple:
    """``(gdof_hat, gdof_dp_hat)`` from the traces of the analytic Jacobian."""
    r = prediction_jacobian(spectrum, y, n, cfg, check_fd=False)
    return r.gdof_hat, r.gdof_dp_hat


def corner_dof(spectrum, tau) -> tuple:
    """Closed forms at an observation supported on tau:
    ``n + sum_{i not in tau} omega_i`` and ``m - sum_{i not in tau} (1 - omega_i)^2``."""
    spectrum = as_spectrum(spectrum)
    tau = _as_subset(tau, spectrum.m)
    omega = corner_shrinkage(spectrum, tau, check=False).omega
    off = tau.complement().zero_based
    g = len(tau) + math.fsum(omega[off])
    gdp = spectrum.m - math.fsum((1.0 - omega[off]) ** 2)
    return g, gdp


@dataclass(frozen=True)
class McConfig:
    beta: np.ndarray
    sigma: float
    replications: int
    seed: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "beta", _frozen(self.beta))
        if int(self.replications) < 1:
            raise ValidationError("replications must be >= 1")
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McResult:
    gdof: np.ndarray  # per replicate, NaN where excluded
    gdof_dp: np.ndarray
    excluded: int
    mean_gdof: float
    mc_se: float | None
    prob_negative: float
    seed: int

    @property
    def cdf_samples(self) -> tuple:
        """Sorted valid samples of gdof_hat and gdof_dp_hat."""
        ok = ~np.isnan(self.gdof)
        return np.sort(self.gdof[ok]), np.sort(self.gdof_dp[ok])


def mc_noise(spectrum, mc: McConfig) -> np.ndarray:
    """All noise draws ``u ~ N(0, sigma^2 Lambda)``, one row per replicate.

    Drawn in one fixed-order pass from a Philox stream keyed by the seed,
    so replicate r always sees the same row whatever the worker count.
    """
    lam = as_spectrum(spectrum).lam
    rng = np.random.Generator(np.random.Philox(key=int(mc.seed)))
    xi = rng.standard_normal((int(mc.replications), lam.size))
    return mc.sigma * np.sqrt(lam)[None, :] * xi


def mc_gdof(spectrum, mc: McConfig, cfg: PlsConfig = DEFAULT_CONFIG, n_jobs: int = 1) -> McResult:
    """Monte Carlo distribution of the DoF estimators under ``y = Lambda beta + u``.

    Replicates with a singular Krylov system are excluded and counted.
    """
    spectrum = as_spectrum(spectrum)
    lam = spectrum.lam
    if mc.beta.shape != lam.shape:
        raise DimensionMismatch(f"beta has shape {mc.beta.shape}, spectrum has m={spectrum.m}")
    spectrum.check_directions(mc.n)
    y0 = lam * mc.beta
    noise = mc_noise(spectrum, mc)
    R = noise.shape[0]
    gdof = np.full(R, np.nan)
    gdp = np.full(R, np.nan)

    def run(rows):
        for r in rows:
            try:
                gdof[r], gdp[r] = _traces(_jacobian(spectrum, y0 + noise[r], mc.n, cfg))
            except SingularSystem:
                pass

    if n_jobs > 1:
        chunks = np.array_split(np.arange(R), n_jobs)
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(run, chunks))
    else:
        run(range(R))

    ok = ~np.isnan(gdof)
    excluded = int(R - ok.sum())
    if excluded:
        log.warning("excluded %d singular replicates out of %d", excluded, R)
    vals = gdof[ok]
    if vals.size == 0:
        raise SingularSystem("every replicate was singular")
    mean = math.fsum(vals) / vals.size
    se = None
    if vals.size > 1:
        var = math.fsum((vals - mean) ** 2) / (vals.size - 1)
        se = math.sqrt(var / vals.size)
    prob = float(np.count_nonzero(vals < 0)) / vals.size
    return McResult(
        gdof=_frozen(gdof),
        gdof_dp=_frozen(gdp),
        excluded=excluded,
        mean_gdof=mean,
        mc_se=se,
        prob_negative=prob,
        seed=int(mc.seed),
    )


__all__ = [
    "DofReport",
    "McConfig",
    "McResult",
    "prediction_jacobian",
    "fd_jacobian",
    "gdof_estimators",
    "corner_dof",
    "mc_noise",
    "mc_gdof",
]
