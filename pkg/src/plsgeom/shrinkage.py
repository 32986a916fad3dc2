"""Shrinkage factors ``omega``, relative residuals ``z = 1 - omega`` and coordinates ``alpha``.

Three independent routes are provided:

* :func:`shrinkage_direct` solves ``V^T Psi Lambda V alpha = V^T psi``;
* :func:`shrinkage_average` forms the convex combination of corner
  shrinkages with weights ``psi^tau pi_tau`` normalised in log space;
* :func:`corner_shrinkage` evaluates the closed product form for an
  observation supported on exactly ``n`` indices.

All subsets are 1-based :class:`~plsgeom.model.IndexSubset` objects.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import (
    CrossCheckFailure,
    DimensionMismatch,
    EnumerationCapExceeded,
    InsufficientSupport,
    SingularSystem,
    SubsetSizeMismatch,
    ValidationError,
)
from .model import (
    DEFAULT_CONFIG,
    IndexSubset,
    PlsConfig,
    _check_normal_residual,
    _frozen,
    all_subsets,
    as_psi,
    as_spectrum,
    pivoted_lstsq,
    vandermonde,
)


@dataclass(frozen=True)
class ShrinkageTriple:
    omega: np.ndarray
    z: np.ndarray
    alpha: np.ndarray

    @classmethod
    def from_alpha(cls, lam: np.ndarray, alpha: np.ndarray, omega: np.ndarray | None = None):
        if omega is None:
            V = vandermonde(lam, alpha.size)
            omega = lam * (V @ alpha)
        return cls(omega=_frozen(omega), z=_frozen(1.0 - omega), alpha=_frozen(alpha))


@dataclass(frozen=True)
class CornerWeight:
    tau: IndexSubset
    pi: float
    log_pi: float


@dataclass(frozen=True)
class AverageResult:
    triple: ShrinkageTriple
    weights: dict


def _as_subset(tau, m: int) -> IndexSubset:
    if isinstance(tau, IndexSubset):
        if tau.m != m:
            raise DimensionMismatch(f"subset lives in 1..{tau.m}, spectrum has m={m}")
        return tau
    return IndexSubset(tuple(sorted(int(i) for i in tau)), m)


def _check_psi(spectrum, psi, n, cfg):
    spectrum = as_spectrum(spectrum)
    psi = as_psi(psi, cfg.zero_tol)
    if psi.psi.size != spectrum.m:
        raise DimensionMismatch(f"psi has length {psi.psi.size}, spectrum has m={spectrum.m}")
    spectrum.check_directions(n)
    if psi.cardinality < n:
        raise SingularSystem(f"support below direction count: cardinality {psi.cardinality} < n={n}")
    return spectrum, psi


def _check_cap(m: int, n: int, cfg: PlsConfig):
    count = math.comb(m, n)
    if count > cfg.enum_cap:
        raise EnumerationCapExceeded(f"C({m},{n}) = {count} exceeds enum_cap={cfg.enum_cap}")


def shrinkage_direct(spectrum, psi, n: int, cfg: PlsConfig = DEFAULT_CONFIG) -> ShrinkageTriple:
    """Shrinkages from ``omega = Lambda V (V^T Psi Lambda V)^-1 V^T psi``.

    The normal system is the weighted least-squares problem
    ``min || (Psi Lambda^-1)^(1/2) (1 - Lambda V alpha) ||``, solved by
    pivoted QR; the normal-equation residual is checked afterwards.
    """
    spectrum, psi = _check_psi(spectrum, psi, n, cfg)
    lam, p = spectrum.lam, psi.psi
    V = vandermonde(spectrum, n)
    w = np.sqrt(p / lam)
    alpha, _ = pivoted_lstsq((w * lam)[:, None] * V, w)
    _check_normal_residual(V.T @ ((p * lam)[:, None] * V), alpha, V.T @ p, cfg.solve_tol, "shrinkage solve")
    return ShrinkageTriple.from_alpha(lam, alpha)


def _elementary_symmetric(x: np.ndarray, n: int) -> np.ndarray:
    """e_1..e_n of the last axis of ``x`` (shape ``(..., n)``)."""
    e = np.zeros(x.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for j in range(x.shape[-1]):
        e[..., 1:] = e[..., 1:] + x[..., j : j + 1] * e[..., :-1]
    return e[..., 1:]


def _corner_closed_form(lam: np.ndarray, taus0: np.ndarray):
    """Product-form z and alpha for a batch of zero-based subsets ``taus0`` (T x n)."""
    lt = lam[taus0]  # T x n
    z = np.prod(1.0 - lam[None, :, None] / lt[:, None, :], axis=2)
    n = taus0.shape[1]
    signs = np.where(np.arange(1, n + 1) % 2 == 1, 1.0, -1.0)
    alpha = signs * _elementary_symmetric(1.0 / lt, n)
    return z, alpha


def _close(a, b, tol) -> bool:
    return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b))))


def corner_shrinkage(spectrum, tau, cfg: PlsConfig = DEFAULT_CONFIG, check: bool = True) -> ShrinkageTriple:
    """Corner shrinkage ``omega_(tau)`` for an observation supported exactly on ``tau``.

    Returned from the closed forms ``z_i = prod_{j in tau} (1 - lam_i / lam_j)``
    and ``alpha_k = (-1)^(k+1) e_k(1 / lam_tau)``. With ``check`` the
    solve ``(S_tau^T Lambda V)^-1 1`` is run too and must agree to
    ``max(cfg.solve_tol, 100 cond eps)`` (elementwise, relative to ``max(1, |value|)``).
    """
    spectrum = as_spectrum(spectrum)
    tau = _as_subset(tau, spectrum.m)
    n = len(tau)
    if not 1 <= n < spectrum.m:
        raise SubsetSizeMismatch(f"corner subset needs 1 <= |tau| < m, got |tau|={n}")
    lam = spectrum.lam
    z, alpha = _corner_closed_form(lam, tau.zero_based[None, :])
    z, alpha = z[0], alpha[0]
    omega = 1.0 - z
    if check:
        V = vandermonde(spectrum, n)
        lv = lam[:, None] * V
        A = lv[tau.zero_based]
        alpha_solve = np.linalg.solve(A, np.ones(n))
        omega_solve = lv @ alpha_solve
        # the solve route loses about cond(A) * eps; do not blame the closed form for that
        tol = max(cfg.solve_tol, 100.0 * np.linalg.cond(A) * np.finfo(float).eps)
        if not (_close(omega_solve, omega, tol) and _close(alpha_solve, alpha, tol)):
            dev = np.max(np.abs(omega_solve - omega) / np.maximum(1.0, np.abs(omega)))
            raise CrossCheckFailure(f"corner {tau.label()}: product and solve routes differ by {dev:.3g}")
    return ShrinkageTriple(omega=_frozen(omega), z=_frozen(z), alpha=_frozen(alpha))


def _log_pi(lam: np.ndarray, taus0: np.ndarray) -> np.ndarray:
    lt = lam[taus0]
    out = np.log(lt).sum(axis=1)
    for a, b in itertools.combinations(range(taus0.shape[1]), 2):
        out += 2.0 * np.log(np.abs(lt[:, a] - lt[:, b]))
    return out


def corner_weight(spectrum, tau, check: bool = True) -> CornerWeight:
    """``pi_tau = lam^tau prod_{j<i in tau} (lam_i - lam_j)^2``.

    For ``|tau| <= 6`` the value is compared with the determinant product
    ``det(S_tau^T V) det(S_tau^T Lambda V)`` to relative 1e-8.
    """
    spectrum = as_spectrum(spectrum)
    tau = _as_subset(tau, spectrum.m)
    lam = spectrum.lam
    lt = lam[tau.zero_based]
    pi = math.prod(lt) * math.prod((a - b) ** 2 for a, b in itertools.combinations(lt, 2))
    log_pi = float(_log_pi(lam, tau.zero_based[None, :])[0])
    if check and 1 <= len(tau) <= 6:
        Vt = vandermonde(spectrum, len(tau))[tau.zero_based]
        det_pi = np.linalg.det(Vt) * np.linalg.det(lt[:, None] * Vt)
        if not abs(det_pi - pi) <= 1e-8 * abs(pi):
            raise CrossCheckFailure(f"pi_{tau.label()}: closed form {pi:.17g} vs determinants {det_pi:.17g}")
    return CornerWeight(tau=tau, pi=pi, log_pi=log_pi)


def _fsum_rows(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    prod = weights[:, None] * values
    return np.array([math.fsum(prod[:, j]) for j in range(values.shape[1])])


def shrinkage_average(spectrum, psi, n: int, cfg: PlsConfig = DEFAULT_CONFIG) -> AverageResult:
    """Shrinkages as the weighted average of the corner shrinkages.

    Weights ``p_tau = psi^tau pi_tau / sum_s psi^s pi_s`` are formed from
    logs (max-subtracted) and the averages are summed exactly with fsum.
    Subsets touching a zero entry of ``psi`` get weight 0.
    """
    spectrum, psi = _check_psi(spectrum, psi, n, cfg)
    m, lam, p = spectrum.m, spectrum.lam, psi.psi
    _check_cap(m, n, cfg)
    taus = list(all_subsets(m, n))
    support = psi.support
    if len(support) == n:
        corner = corner_shrinkage(spectrum, support, cfg, check=False)
        weights = {t: (1.0 if t == support else 0.0) for t in taus}
        return AverageResult(triple=corner, weights=weights)

    taus0 = np.array([t.zero_based for t in taus])
    live = np.all(p[taus0] > 0, axis=1)
    with np.errstate(divide="ignore"):
        logw = np.where(live, np.log(np.where(live[:, None], p[taus0], 1.0)).sum(axis=1), -np.inf)
    logw[live] += _log_pi(lam, taus0[live])
    w = np.exp(logw - logw[live].max())
    w = w / math.fsum(w)
    z, alpha = _corner_closed_form(lam, taus0[live])
    omega = _fsum_rows(w[live], 1.0 - z)
    # average z itself rather than forming 1 - omega, keeping small entries of z accurate
    z_avg = _fsum_rows(w[live], z)
    alpha_avg = _fsum_rows(w[live], alpha)
    triple = ShrinkageTriple(omega=_frozen(omega), z=_frozen(z_avg), alpha=_frozen(alpha_avg))
    return AverageResult(triple=triple, weights={t: float(wt) for t, wt in zip(taus, w)})


def alpha_corner_det(spectrum, tau, k: int) -> float:
    """k-th coordinate of ``alpha_(tau)`` by Cramer's rule on Vandermonde minors.

    ``alpha_k = (-1)^(k+1) det(S_tau^T W_(-k)) / det(S_tau^T W_(-0))`` where
    ``W = (1, lam, ..., lam^n)`` and ``W_(-k)`` drops the power-k column.
    """
    spectrum = as_spectrum(spectrum)
    tau = _as_subset(tau, spectrum.m)
    n = len(tau)
    if not 1 <= n < spectrum.m:
        raise SubsetSizeMismatch(f"need 1 <= |tau| < m, got {n}")
    if not 1 <= int(k) <= n:
        raise ValidationError(f"k must be in 1..{n}, got {k}")
    W = vandermonde(spectrum, n + 1)[tau.zero_based]
    num = np.linalg.det(np.delete(W, int(k), axis=1))
    den = np.linalg.det(W[:, 1:])
    return float((-1) ** (int(k) + 1) * num / den)


@dataclass(frozen=True)
class MarginalSegment:
    endpoint_zero: np.ndarray
    endpoint_inf: np.ndarray
    t: float
    g_k: float

    def reconstruct(self) -> np.ndarray:
        return self.t * self.endpoint_zero + (1.0 - self.t) * self.endpoint_inf


def _subset_logsum(lam, logpsi, m, size, exclude0, add0=None):
    """log of sum over size-subsets s of [m]-{exclude} of psi^s pi_{s + add}."""
    pool = [i for i in range(m) if i != exclude0]
    terms = []
    for s in itertools.combinations(pool, size):
        lp = sum(logpsi[i] for i in s)
        if lp == -np.inf:
            continue
        full = tuple(sorted(s + ((add0,) if add0 is not None else ())))
        terms.append(lp + _log_pi(lam, np.array([full]))[0])
    return logsumexp(terms) if terms else -np.inf


def marginal_segment(spectrum, psi, n: int, k: int, cfg: PlsConfig = DEFAULT_CONFIG) -> MarginalSegment:
    """Decompose z along the segment swept by ``psi_k`` (k is 1-based).

    ``z = t z|_{psi_k=0} + (1 - t) (I - Lambda/lam_k) z^(n-1)|_{psi=theta}``
    with ``theta = (I - Lambda/lam_k)^2 psi`` and ``t = 1 / (1 + psi_k g_k)``.
    Zero directions shrink everything to zero, so ``z^(0) = 1``.
    """
    spectrum, psi = _check_psi(spectrum, psi, n, cfg)
    m, lam = spectrum.m, spectrum.lam
    if not 1 <= int(k) <= m:
        raise ValidationError(f"k must be in 1..{m}, got {k}")
    k0 = int(k) - 1
    _check_cap(m, n, cfg)
    p0 = np.array(psi.psi)
    p0[k0] = 0.0
    rest = as_psi(p0, cfg.zero_tol)
    if rest.cardinality < n:
        raise InsufficientSupport(
            f"support without index {k} has {rest.cardinality} < n={n} entries"
        )
    endpoint_zero = shrinkage_direct(spectrum, rest, n, cfg).z
    factor = 1.0 - lam / lam[k0]
    if n == 1:
        z_prev = np.ones(m)
    else:
        theta = factor**2 * psi.psi
        z_prev = shrinkage_direct(spectrum, theta, n - 1, cfg).z
    endpoint_inf = factor * z_prev

    with np.errstate(divide="ignore"):
        logpsi = np.log(psi.psi)
    log_num = _subset_logsum(lam, logpsi, m, n - 1, k0, add0=k0)
    log_den = _subset_logsum(lam, logpsi, m, n, k0)
    g_k = float(np.exp(log_num - log_den))
    t = 1.0 / (1.0 + psi.psi[k0] * g_k)
    return MarginalSegment(_frozen(endpoint_zero), _frozen(endpoint_inf), float(t), g_k)


@dataclass(frozen=True)
class ExtremeBound:
    """Side of ``bound`` on which every off-tail corner shrinkage lies.

    ``sign = -1``: ``omega_i <= bound`` (n even); ``sign = +1``: ``omega_i >= bound`` (n odd).
    """

    tau_tail: IndexSubset
    bound: float
    c: float
    sign: int

    def holds(self, omega, rtol: float = 1e-12) -> bool:
        off = self.tau_tail.complement().zero_based
        slack = rtol * max(1.0, abs(self.bound))
        if self.sign < 0:
            return bool(np.all(np.asarray(omega)[off] <= self.bound + slack))
        return bool(np.all(np.asarray(omega)[off] >= self.bound - slack))


def extreme_bound(spectrum, n: int) -> ExtremeBound:
    """Bound on the corner shrinkage supported on the n smallest eigenvalues.

    With ``c = lam_{m-n} / lam_{m-n+1}``: ``omega_i <= 1 - (c-1)^n`` for n
    even and ``omega_i >= 1 + (c-1)^n`` for n odd, for all i outside the tail.
    """
    spectrum = as_spectrum(spectrum)
    spectrum.check_directions(n)
    m, lam = spectrum.m, spectrum.lam
    tail = IndexSubset(tuple(range(m - n + 1, m + 1)), m)
    c = float(lam[m - n - 1] / lam[m - n])
    if n % 2 == 0:
        return ExtremeBound(tail, 1.0 - (c - 1.0) ** n, c, -1)
    return ExtremeBound(tail, 1.0 + (c - 1.0) ** n, c, +1)


__all__ = [
    "ShrinkageTriple",
    "CornerWeight",
    "AverageResult",
    "MarginalSegment",
    "ExtremeBound",
    "shrinkage_direct",
    "corner_shrinkage",
    "corner_weight",
    "shrinkage_average",
    "alpha_corner_det",
    "marginal_segment",
    "extreme_bound",
]
