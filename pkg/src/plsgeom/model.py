"""Rotated PLS model: spectra, observations, Krylov/Vandermonde matrices and the PLS fit.

Everything here works in principal-axis coordinates, where the model reads
``y = Lambda beta + u`` with ``Lambda = diag(lam)`` and ``lam`` strictly
decreasing and positive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionMismatch,
    InvalidDimension,
    NonSymmetric,
    NotPositiveDefinite,
    RepeatedEigenvalue,
    SingularKrylovSystem,
    SingularSystem,
    ValidationError,
)

DISTINCT_TOL = 1e-10
ZERO_TOL = 1e-12
SOLVE_TOL = 1e-8
ENUM_CAP = 200_000


def _frozen(x, dtype=float) -> np.ndarray:
    a = np.array(x, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EigenSpectrum:
    """Strictly decreasing positive eigenvalues ``lam`` of the rotated Gram matrix."""

    lam: np.ndarray
    distinct_tol: float = DISTINCT_TOL

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise InvalidDimension(f"spectrum needs m >= 2 eigenvalues, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise NotPositiveDefinite("eigenvalues must be finite and strictly positive")
        gaps = (lam[:-1] - lam[1:]) / lam[:-1]
        if np.any(gaps < self.distinct_tol):
            i = int(np.argmin(gaps))
            if lam[i] < lam[i + 1]:
                raise ValidationError(f"eigenvalues not decreasing at positions {i + 1},{i + 2}")
            raise RepeatedEigenvalue(
                f"eigenvalues {i + 1} and {i + 2} closer than relative gap {self.distinct_tol:g}"
            )
        object.__setattr__(self, "lam", _frozen(lam))

    @property
    def m(self) -> int:
        return int(self.lam.size)

    def __len__(self) -> int:
        return self.m

    def check_directions(self, n: int) -> None:
        if not (1 <= int(n) < self.m):
            raise InvalidDimension(f"need 1 <= n < m, got n={n}, m={self.m}")


def as_spectrum(spectrum) -> EigenSpectrum:
    return spectrum if isinstance(spectrum, EigenSpectrum) else EigenSpectrum(spectrum)


@dataclass(frozen=True, order=True)
class IndexSubset:
    """Sorted 1-based index set ``tau`` inside ``{1..m}``."""

    indices: tuple
    m: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 1 or idx[-1] > self.m):
            raise ValidationError(f"indices {idx} out of range 1..{self.m}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_zero_based(cls, idx: Sequence[int], m: int) -> "IndexSubset":
        return cls(tuple(int(i) + 1 for i in idx), m)

    @classmethod
    def parse(cls, text: str, m: int) -> "IndexSubset":
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        return cls(tuple(sorted(int(p) for p in parts)), m)

    @property
    def zero_based(self) -> np.ndarray:
        return np.array(self.indices, dtype=int) - 1

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices

    def complement(self) -> "IndexSubset":
        return IndexSubset(tuple(i for i in range(1, self.m + 1) if i not in self.indices), self.m)

    def label(self, sep: str = ";") -> str:
        return sep.join(str(i) for i in self.indices)

    def monomial(self, x) -> float:
        """``x^tau``: product of the selected entries."""
        return math.prod(float(x[i - 1]) for i in self.indices)

    def selection_matrix(self) -> np.ndarray:
        s = np.zeros((self.m, len(self)))
        s[self.zero_based, np.arange(len(self))] = 1.0
        return s


def all_subsets(m: int, n: int) -> Iterator[IndexSubset]:
    """n-subsets of ``{1..m}`` in lexicographic order."""
    for c in itertools.combinations(range(1, m + 1), n):
        yield IndexSubset(c, m)


@dataclass(frozen=True)
class ObservationVector:
    y: np.ndarray
    zero_tol: float = ZERO_TOL

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1:
            raise InvalidDimension("observation must be a vector")
        if not np.all(np.isfinite(y)):
            raise ValidationError("observation has non-finite entries")
        object.__setattr__(self, "y", _frozen(y))

    @property
    def support(self) -> IndexSubset:
        a = np.abs(self.y)
        top = a.max() if a.size else 0.0
        nz = np.flatnonzero(a > self.zero_tol * top) if top > 0 else np.array([], dtype=int)
        return IndexSubset.from_zero_based(nz, self.y.size)

    @property
    def cardinality(self) -> int:
        return len(self.support)

    def squared(self) -> "SquaredObservation":
        return SquaredObservation(self.y * self.y, zero_tol=self.zero_tol)


@dataclass(frozen=True)
class SquaredObservation:
    """``psi = y**2``; the support uses the same relative threshold as on ``|y|``."""

    psi: np.ndarray
    zero_tol: float = ZERO_TOL

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        if psi.ndim != 1:
            raise InvalidDimension("psi must be a vector")
        if not np.all(np.isfinite(psi)) or np.any(psi < 0):
            raise ValidationError("psi must be finite and non-negative")
        object.__setattr__(self, "psi", _frozen(psi))

    @property
    def support(self) -> IndexSubset:
        r = np.sqrt(self.psi)
        top = r.max() if r.size else 0.0
        nz = np.flatnonzero(r > self.zero_tol * top) if top > 0 else np.array([], dtype=int)
        return IndexSubset.from_zero_based(nz, self.psi.size)

    @property
    def cardinality(self) -> int:
        return len(self.support)


def as_psi(psi, zero_tol: float = ZERO_TOL) -> SquaredObservation:
    if isinstance(psi, SquaredObservation):
        return psi
    return SquaredObservation(psi, zero_tol=zero_tol)


def as_observation(y, zero_tol: float = ZERO_TOL) -> ObservationVector:
    if isinstance(y, ObservationVector):
        return y
    return ObservationVector(y, zero_tol=zero_tol)


@dataclass(frozen=True)
class PlsConfig:
    """Numerical tolerances shared by every operation.

    zero_tol is relative to ``max|y|``; solve_tol bounds the relative
    residual of linear solves and the agreement of cross-checked routes;
    enum_cap bounds ``C(m, n)`` for subset enumeration.
    """

    zero_tol: float = ZERO_TOL
    solve_tol: float = SOLVE_TOL
    enum_cap: int = ENUM_CAP

    def __post_init__(self):
        if not (self.zero_tol > 0 and self.solve_tol > 0):
            raise ValidationError("zero_tol and solve_tol must be positive")
        if int(self.enum_cap) < 1:
            raise ValidationError("enum_cap must be >= 1")


DEFAULT_CONFIG = PlsConfig()


def spectrum_from_gram(G, tol: float = 1e-10, distinct_tol: float = DISTINCT_TOL) -> EigenSpectrum:
    """Eigenvalues of a symmetric positive definite Gram matrix, sorted decreasing."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidDimension(f"Gram matrix must be square, got {G.shape}")
    scale = max(np.abs(G).max(), 1.0)
    if np.abs(G - G.T).max() > tol * scale:
        raise NonSymmetric("Gram matrix is not symmetric")
    lam = np.linalg.eigvalsh(0.5 * (G + G.T))[::-1]
    if lam[-1] <= tol * max(lam[0], 0.0):
        raise NotPositiveDefinite(f"smallest eigenvalue {lam[-1]:.3g} is not positive")
    return EigenSpectrum(lam, distinct_tol=distinct_tol)


def exp_correlation(m: int, rate: float) -> np.ndarray:
    """Correlation matrix with entries ``exp(-rate |i - j|)``."""
    if int(m) < 2:
        raise InvalidDimension("m must be >= 2")
    if not rate > 0:
        raise InvalidDimension("rate must be positive")
    idx = np.arange(int(m))
    return np.exp(-rate * np.abs(idx[:, None] - idx[None, :]))


def vandermonde(spectrum, n: int) -> np.ndarray:
    """m x n matrix with columns ``lam**0, ..., lam**(n-1)``."""
    lam = as_spectrum(spectrum).lam
    if not (1 <= int(n) <= lam.size):
        raise InvalidDimension(f"need 1 <= n <= m, got n={n}")
    V = np.empty((lam.size, int(n)))
    V[:, 0] = 1.0
    for k in range(1, int(n)):
        # repeated products, not pow(), for platform-independent bits
        V[:, k] = V[:, k - 1] * lam
    return V


def krylov_matrix(spectrum, y, n: int) -> np.ndarray:
    """``K = (y, Lambda y, ..., Lambda^(n-1) y) = diag(y) V``."""
    spectrum = as_spectrum(spectrum)
    y = as_observation(y).y
    if y.size != spectrum.m:
        raise DimensionMismatch(f"y has length {y.size}, spectrum has m={spectrum.m}")
    spectrum.check_directions(n)
    return y[:, None] * vandermonde(spectrum, n)


def pivoted_lstsq(A: np.ndarray, b: np.ndarray, rank_tol: float | None = None):
    """Least squares by column-equilibrated QR with column pivoting.

    Rows are sorted by decreasing norm before factoring. Returns
    ``(x, Q)`` where ``Q`` spans the range of ``A``. Raises
    SingularSystem when the trailing pivot signals rank deficiency.
    """
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise SingularSystem("zero column in least-squares system")
    # heavy rows first: Householder QR is stable for strongly weighted rows in that order
    order = np.argsort(-np.linalg.norm(A, axis=1), kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    As = A[order] / norms
    Q, R, piv = sla.qr(As, mode="economic", pivoting=True)
    Q = Q[inv]
    if rank_tol is None:
        rank_tol = max(A.shape) * np.finfo(float).eps
    d = np.abs(np.diag(R))
    if d[-1] <= rank_tol * d[0]:
        raise SingularSystem(f"rank deficient system (pivot ratio {d[-1] / d[0]:.3g})")
    xp = sla.solve_triangular(R, Q.T @ b)
    x = np.empty_like(xp)
    x[piv] = xp
    return x / norms, Q


def _check_normal_residual(A: np.ndarray, x: np.ndarray, b: np.ndarray, tol: float, what: str):
    res = np.linalg.norm(A @ x - b)
    scale = np.linalg.norm(A) * np.linalg.norm(x) + np.linalg.norm(b)
    if not res <= tol * scale:
        raise SingularSystem(f"{what}: relative residual {res / scale:.3g} exceeds {tol:g}")


@dataclass(frozen=True)
class PlsFit:
    beta_hat: np.ndarray
    y_hat: np.ndarray
    residual: np.ndarray
    projection: np.ndarray
    n: int


def pls_fit(spectrum, y, n: int, cfg: PlsConfig = DEFAULT_CONFIG) -> PlsFit:
    """PLS with n directions: ``beta_hat = K (K^T Lambda K)^-1 K^T y``.

    The n x n normal system is solved as the equivalent weighted least
    squares problem ``min || Lambda^(1/2) K c - Lambda^(-1/2) y ||`` so the
    oblique projection comes out as ``P = Lambda^(1/2) Q Q^T Lambda^(-1/2)``.
    """
    spectrum = as_spectrum(spectrum)
    obs = as_observation(y, cfg.zero_tol)
    if obs.y.size != spectrum.m:
        raise DimensionMismatch(f"y has length {obs.y.size}, spectrum has m={spectrum.m}")
    spectrum.check_directions(n)
    if obs.cardinality < n:
        raise SingularKrylovSystem(
            f"support below direction count: cardinality {obs.cardinality} < n={n}"
        )
    lam, yv = spectrum.lam, obs.y
    K = krylov_matrix(spectrum, yv, n)
    s = np.sqrt(lam)
    try:
        c, Q = pivoted_lstsq(s[:, None] * K, yv / s)
    except SingularSystem as exc:
        raise SingularKrylovSystem(str(exc)) from None
    try:
        _check_normal_residual(K.T @ (lam[:, None] * K), c, K.T @ yv, cfg.solve_tol, "Krylov solve")
    except SingularSystem as exc:
        raise SingularKrylovSystem(str(exc)) from None
    beta_hat = K @ c
    y_hat = lam * beta_hat
    P = (s[:, None] * (Q @ Q.T)) / s[None, :]
    return PlsFit(
        beta_hat=_frozen(beta_hat),
        y_hat=_frozen(y_hat),
        residual=_frozen(yv - y_hat),
        projection=_frozen(P),
        n=int(n),
    )


__all__ = [
    "EigenSpectrum",
    "IndexSubset",
    "ObservationVector",
    "SquaredObservation",
    "PlsConfig",
    "PlsFit",
    "DEFAULT_CONFIG",
    "all_subsets",
    "as_spectrum",
    "as_psi",
    "as_observation",
    "spectrum_from_gram",
    "exp_correlation",
    "vandermonde",
    "krylov_matrix",
    "pivoted_lstsq",
    "pls_fit",
]
