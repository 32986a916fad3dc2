"""Sign structure of the relative residual z and the inverse cone of the map psi -> z.

Sign patterns are strings over ``+ - 0 x`` (``x`` marks an undetermined
sign). Positions are 1-based throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import (
    CapExceeded,
    CrossCheckFailure,
    DimensionMismatch,
    InadmissibleSignature,
    InvalidDimension,
    NonPositiveWeight,
    NotInCone,
    PositivityFailure,
    StallDetected,
    SubsetSizeMismatch,
    ValidationError,
    ZeroVector,
)
from .model import (
    DEFAULT_CONFIG,
    IndexSubset,
    PlsConfig,
    SquaredObservation,
    _frozen,
    as_psi,
    as_spectrum,
    vandermonde,
)
from .shrinkage import corner_shrinkage, corner_weight, shrinkage_direct

SYMBOLS = "+-0x"


@dataclass(frozen=True)
class SignPattern:
    symbols: str

    def __post_init__(self):
        if not self.symbols or any(s not in SYMBOLS for s in self.symbols):
            raise ValidationError(f"sign pattern must be a non-empty string over {SYMBOLS!r}")

    @classmethod
    def from_vector(cls, x, tol: float = 0.0) -> "SignPattern":
        x = np.asarray(x, dtype=float)
        return cls("".join("0" if abs(v) <= tol else ("+" if v > 0 else "-") for v in x))

    @classmethod
    def from_changes(cls, m: int, positions, last: str = "+") -> "SignPattern":
        """Full pattern of length m switching sign after each (1-based) position."""
        flips = set(int(p) for p in positions)
        s = last
        out = [s]
        for i in range(m - 1, 0, -1):
            if i in flips:
                s = "-" if s == "+" else "+"
            out.append(s)
        return cls("".join(reversed(out)))

    def __str__(self) -> str:
        return self.symbols

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def m(self) -> int:
        return len(self.symbols)

    @property
    def is_full(self) -> bool:
        return all(s in "+-" for s in self.symbols)

    @property
    def change_positions(self) -> tuple:
        """Positions i with ``s_i != s_{i+1}`` (sign flips right after i); full patterns only."""
        self._require_full()
        s = self.symbols
        return tuple(i + 1 for i in range(len(s) - 1) if s[i] != s[i + 1])

    @property
    def switch_positions(self) -> tuple:
        """Positions i with ``s_{i-1} != s_i`` (new sign starts at i)."""
        return tuple(p + 1 for p in self.change_positions)

    @property
    def changes(self) -> int:
        return len(self.change_positions)

    @property
    def sections(self) -> tuple:
        """Lengths of the maximal runs of equal sign."""
        self._require_full()
        return tuple(len(list(g)) for _, g in itertools.groupby(self.symbols))

    def flipped(self) -> "SignPattern":
        table = str.maketrans("+-", "-+")
        return SignPattern(self.symbols.translate(table))

    def admits(self, other: "SignPattern") -> bool:
        """True if ``other`` agrees with every determined symbol of this template."""
        if len(other) != len(self):
            return False
        return all(a == "x" or a == b for a, b in zip(self.symbols, other.symbols))

    def _require_full(self):
        if not self.is_full:
            raise ValidationError(f"pattern {self.symbols} has 0/x symbols")


def sign_changes(x, tol: float = 0.0) -> tuple:
    """``(v_m, v_M)``: fewest and most sign changes over sign completions of the zeros.

    ``v_m`` drops the zeros; ``v_M`` is an exact max over completions by a
    two-state dynamic program (last sign +/-).
    """
    x = np.asarray(x, dtype=float)
    nz = np.abs(x) > tol
    if not nz.any():
        raise ZeroVector("sign changes undefined for the zero vector")
    s = np.sign(x[nz])
    v_m = int(np.count_nonzero(s[1:] != s[:-1]))
    neg_inf = -(10**9)
    best = {1: neg_inf, -1: neg_inf}
    for j, v in enumerate(x):
        allowed = (1, -1) if abs(v) <= tol else ((1,) if v > 0 else (-1,))
        if j == 0:
            best = {sg: (0 if sg in allowed else neg_inf) for sg in (1, -1)}
            continue
        best = {
            sg: (max(best[sg], best[-sg] + 1) if sg in allowed else neg_inf) for sg in (1, -1)
        }
    return v_m, int(max(best.values()))


def enumerate_signatures(m: int, n: int) -> list:
    """All sign patterns of ``omega - 1`` with n changes ending in ``-``.

    There are ``C(m-1, n)`` of them, ordered lexicographically by change positions.
    """
    if not (1 <= n < m):
        raise InvalidDimension(f"need 1 <= n < m, got m={m}, n={n}")
    return [SignPattern.from_changes(m, pos, last="-") for pos in itertools.combinations(range(1, m), n)]


def _template_subset(T, m: int | None = None) -> IndexSubset:
    if isinstance(T, IndexSubset):
        return T
    if m is None:
        raise ValidationError("m is required when T is not an IndexSubset")
    return IndexSubset(tuple(sorted(int(i) for i in T)), m)


def simplex_template(spectrum, T=None, m: int | None = None) -> SignPattern:
    """Sign pattern shared by every z in the simplex spanned by the corners ``z_(tau)``, tau in T.

    With ``T = {t_0 < ... < t_n}``: position ``t_k`` carries ``(-1)^(n-k)``,
    positions after ``t_n`` are ``+``, positions before ``t_0`` carry
    ``(-1)^n`` and every other position strictly inside is ``x``.
    Only m is taken from the spectrum; ``simplex_template(T)`` with an
    IndexSubset works as well.
    """
    if T is None:
        T, spectrum = spectrum, None
    if spectrum is not None:
        m = as_spectrum(spectrum).m
    T = _template_subset(T, m)
    n = len(T) - 1
    if n < 1 or len(T) > T.m:
        raise SubsetSizeMismatch(f"simplex subset needs 2 <= |T| <= m, got |T|={len(T)}")
    sym = ["x"] * T.m
    for k, t in enumerate(T.indices):
        sym[t - 1] = "+" if (n - k) % 2 == 0 else "-"
    for i in range(1, T.m + 1):
        if i < T.indices[0]:
            sym[i - 1] = "+" if n % 2 == 0 else "-"
        elif i > T.indices[-1]:
            sym[i - 1] = "+"
    return SignPattern("".join(sym))


def corner_sign_pattern(tau: IndexSubset) -> SignPattern:
    """Exact sign pattern of the corner ``z_(tau)``: 0 on tau, else ``(-1)^#{j in tau: j > i}``."""
    sym = []
    for i in range(1, tau.m + 1):
        if i in tau:
            sym.append("0")
        else:
            above = sum(1 for j in tau if j > i)
            sym.append("+" if above % 2 == 0 else "-")
    return SignPattern("".join(sym))


def simplex_vertex_patterns(T, m: int | None = None) -> list:
    """``(tau, pattern)`` for each vertex, dropping ``t_0, t_1, ...`` in turn."""
    T = _template_subset(T, m)
    out = []
    for t in T.indices:
        tau = IndexSubset(tuple(i for i in T.indices if i != t), T.m)
        out.append((tau, corner_sign_pattern(tau)))
    return out


def expand_template(template: SignPattern, n: int) -> list:
    """Full patterns with exactly n changes and last symbol ``+`` compatible with ``template``.

    Sorted by switch positions.
    """
    sym = template.symbols
    m = len(sym)
    found = []

    def walk(i, prefix, changes):
        if changes > n:
            return
        if i == m:
            if changes == n and prefix[-1] == "+":
                found.append(SignPattern("".join(prefix)))
            return
        options = "+-" if sym[i] == "x" else sym[i]
        for s in options:
            if s == "0":
                return
            extra = 1 if prefix and prefix[-1] != s else 0
            prefix.append(s)
            walk(i + 1, prefix, changes + extra)
            prefix.pop()

    walk(0, [], 0)
    return sorted(found, key=lambda p: p.switch_positions)


@dataclass(frozen=True)
class SimplexDescriptor:
    T: IndexSubset
    vertices: np.ndarray

    @property
    def affinely_independent(self) -> bool:
        diffs = self.vertices[1:] - self.vertices[0]
        return int(np.linalg.matrix_rank(diffs)) == len(self.T) - 1


def simplex_descriptor(spectrum, T) -> SimplexDescriptor:
    """Vertices ``z_(tau)`` for the n-subsets of T, in the order of :func:`simplex_vertex_patterns`."""
    spectrum = as_spectrum(spectrum)
    T = _template_subset(T, spectrum.m)
    verts = [corner_shrinkage(spectrum, tau).z for tau, _ in simplex_vertex_patterns(T)]
    return SimplexDescriptor(T=T, vertices=_frozen(np.array(verts)))


@dataclass(frozen=True)
class SignatureCheck:
    v_m: int
    v_M: int
    passes: bool
    failures: tuple = ()


def _z_tol(z: np.ndarray, rel: float) -> float:
    return rel * max(1.0, float(np.max(np.abs(z))))


def signature_lemma_check(spectrum, psi, n: int, cfg: PlsConfig = DEFAULT_CONFIG, sign_tol: float = 1e-9) -> SignatureCheck:
    """Check the sign-change bounds on ``z(psi)``.

    Always ``v_M(z) <= n``; with more than n observations also
    ``v_m(z) in {n-1, n}``; if further ``z_1 != 0 != z_m`` then ``v_m = n``;
    if z has no zeros then ``z_m > 0`` and ``(-1)^n z_1 > 0``. Entries with
    ``|z_i| <= sign_tol * max(1, max|z|)`` count as zeros.
    """
    spectrum = as_spectrum(spectrum)
    psi = as_psi(psi, cfg.zero_tol)
    z = shrinkage_direct(spectrum, psi, n, cfg).z
    tol = _z_tol(z, sign_tol)
    v_m, v_M = sign_changes(z, tol)
    fails = []
    if v_M > n:
        fails.append(f"v_M={v_M} > n")
    if psi.cardinality > n:
        if v_m not in (n - 1, n):
            fails.append(f"v_m={v_m} not in {{n-1, n}}")
        if abs(z[0]) > tol and abs(z[-1]) > tol and v_m != n:
            fails.append(f"v_m={v_m} != n with nonzero ends")
        if np.all(np.abs(z) > tol):
            if z[-1] <= 0:
                fails.append("z_m <= 0")
            if (-1) ** n * z[0] <= 0:
                fails.append("(-1)^n z_1 <= 0")
    return SignatureCheck(v_m=v_m, v_M=v_M, passes=not fails, failures=tuple(fails))


def total_positivity_check(M, max_order: int | None = None, cap: int = 1_000_000) -> bool:
    """True iff every square minor of order <= max_order has positive determinant.

    Decreasing-node Vandermonde matrices are only totally positive after
    reversing the row order; see :func:`increasing_vandermonde`.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidDimension("matrix expected")
    r, c = M.shape
    top = min(r, c) if max_order is None else min(r, c, int(max_order))
    count = sum(math.comb(r, k) * math.comb(c, k) for k in range(1, top + 1))
    if count > cap:
        raise CapExceeded(f"{count} minors exceed cap={cap}")
    for k in range(1, top + 1):
        for rows in itertools.combinations(range(r), k):
            sub = M[list(rows)]
            for cols in itertools.combinations(range(c), k):
                if not np.linalg.det(sub[:, list(cols)]) > 0:
                    return False
    return True


def increasing_vandermonde(spectrum, n: int) -> np.ndarray:
    """Vandermonde matrix with rows ordered by increasing eigenvalue."""
    return vandermonde(spectrum, n)[::-1].copy()


@dataclass(frozen=True)
class RayFan:
    """Extremal rays of ``{psi >= 0 : V^T Z psi = 0}`` with one support index per sign section."""

    rays: np.ndarray  # k_z x m, rows are unit-sum rays
    supports: tuple
    sections: tuple
    signature: SignPattern
    z: np.ndarray = field(repr=False)

    @property
    def k_z(self) -> int:
        return len(self.supports)

    @property
    def D(self) -> np.ndarray:
        """Rays as columns (m x k_z)."""
        return self.rays.T

    def sign_directions(self) -> np.ndarray:
        """Columns ``Z d / ||Z d||_1``; depend on the signature of z only."""
        zd = self.z[:, None] * self.D
        return zd / np.abs(zd).sum(axis=0)


def _admissible_pattern(z: np.ndarray, n: int, tol: float) -> SignPattern:
    pat = SignPattern.from_vector(z, tol)
    if not pat.is_full:
        raise InadmissibleSignature(f"z has zero entries: {pat}")
    if pat.changes != n:
        raise InadmissibleSignature(f"z has {pat.changes} sign changes, expected n={n}")
    if z[-1] <= 0:
        raise InadmissibleSignature("last entry of z must be positive")
    return pat


def _null_weights(lam_sub: np.ndarray) -> np.ndarray:
    """Divided-difference weights ``w_i = 1 / prod_{j != i} (lam_i - lam_j)``, max-abs scaled.

    ``sum_i w_i lam_i^k = 0`` for ``k < len(lam_sub) - 1``, so ``w / z`` spans the
    null space of an n x (n+1) block of ``V^T Z``. Formed from logs to avoid
    over/underflow of the products.
    """
    diff = lam_sub[:, None] - lam_sub[None, :]
    np.fill_diagonal(diff, 1.0)
    logs = -np.log(np.abs(diff)).sum(axis=1)
    signs = np.prod(np.sign(diff), axis=1)
    return signs * np.exp(logs - logs.max())


def inverse_rays(spectrum, z, n: int, cfg: PlsConfig = DEFAULT_CONFIG, tol: float = 1e-8) -> RayFan:
    """Extremal rays of the cone of ``psi`` mapped to ``z``.

    For each support picking one index from every sign section of z, the
    n x (n+1) block of ``V^T Z`` has a one dimensional null space, given in
    closed form by divided-difference weights divided by z and normalised
    to unit sum. A null vector that is not sign definite raises
    PositivityFailure; ``||V^T Z d|| <= tol ||V^T Z|| ||d||`` is checked.
    """
    spectrum = as_spectrum(spectrum)
    z = np.asarray(z, dtype=float)
    if z.shape != (spectrum.m,):
        raise DimensionMismatch(f"z has shape {z.shape}, expected ({spectrum.m},)")
    spectrum.check_directions(n)
    pat = _admissible_pattern(z, n, _z_tol(z, cfg.zero_tol))
    sections = pat.sections
    starts = np.cumsum((0,) + sections[:-1])
    lam = spectrum.lam
    VtZ = vandermonde(spectrum, n).T * z
    scale = np.linalg.norm(VtZ, 2)
    rays, supports = [], []
    for pick in itertools.product(*(range(s, s + l) for s, l in zip(starts, sections))):
        idx = np.array(pick)
        d_sub = _null_weights(lam[idx]) / z[idx]
        if d_sub[0] < 0:
            d_sub = -d_sub
        sub = IndexSubset.from_zero_based(idx, spectrum.m)
        if not np.all(d_sub > 0):
            raise PositivityFailure(f"null vector on support {sub.label()} is not positive: {d_sub}")
        d = np.zeros(spectrum.m)
        d[idx] = d_sub / math.fsum(d_sub)
        res = np.linalg.norm(VtZ @ d) / (scale * np.linalg.norm(d))
        if res > tol:
            raise CrossCheckFailure(f"ray on support {sub.label()} violates V^T Z d = 0 (residual {res:.3g})")
        rays.append(d)
        supports.append(sub)
    return RayFan(
        rays=_frozen(np.array(rays)),
        supports=tuple(supports),
        sections=sections,
        signature=pat,
        z=_frozen(z),
    )


@dataclass(frozen=True)
class Membership:
    t: np.ndarray
    residual: float


def ray_membership(spectrum, psi, z, rays: RayFan, tol: float = 1e-6) -> Membership:
    """Non-negative coefficients ``t`` with ``psi ~ D_z t`` (non-negative least squares).

    psi must satisfy ``||V^T Z psi|| <= tol ||V^T Z|| ||psi||``, else NotInCone.
    """
    spectrum = as_spectrum(spectrum)
    p = as_psi(psi).psi
    z = np.asarray(z, dtype=float)
    VtZ = vandermonde(spectrum, rays.signature.changes).T * z
    if np.linalg.norm(VtZ @ p) > tol * np.linalg.norm(VtZ, 2) * np.linalg.norm(p):
        raise NotInCone("psi does not satisfy V^T Z psi = 0")
    t, res = nnls(rays.D, p)
    return Membership(t=_frozen(t), residual=float(res))


def caratheodory_reduce(spectrum, psi, n: int, cfg: PlsConfig = DEFAULT_CONFIG) -> SquaredObservation:
    """Sparsify psi to at most n+1 nonzeros without changing z(psi).

    With ``Z = diag(z(psi))`` fixed, repeatedly take a null direction of
    ``V^T Z`` on the first n+1 support indices (divided-difference weights
    over z) and step along it until a component of psi reaches zero.
    """
    spectrum = as_spectrum(spectrum)
    psi = as_psi(psi, cfg.zero_tol)
    if len(psi.support) <= n + 1:
        shrinkage_direct(spectrum, psi, n, cfg)
        return psi
    z = shrinkage_direct(spectrum, psi, n, cfg).z
    ztol = _z_tol(z, cfg.zero_tol)
    p = np.array(psi.psi)
    p[np.setdiff1d(np.arange(p.size), psi.support.zero_based)] = 0.0
    support = list(psi.support.zero_based)
    while len(support) > n + 1:
        idx = np.array(support[: n + 1])
        zero = np.abs(z[idx]) <= ztol
        if zero.any():
            # a zero of z makes its column of V^T Z vanish: drop that entry directly
            eta = zero.astype(float)
        else:
            eta = _null_weights(spectrum.lam[idx]) / z[idx]
        if not np.any(eta > 0):
            eta = -eta
        pos = eta > 0
        ratios = np.where(pos, p[idx] / np.where(pos, eta, 1.0), np.inf)
        j = int(np.argmin(ratios))
        p[idx] = p[idx] - ratios[j] * eta
        p[idx[j]] = 0.0
        floor = 1e-13 * p.max()
        if np.any(p[idx] < -floor):
            raise StallDetected("reduction step left negative entries")
        p[idx] = np.where(p[idx] <= floor, 0.0, p[idx])
        new_support = list(np.flatnonzero(p > 0))
        if len(new_support) >= len(support):
            raise StallDetected("reduction step did not shrink the support")
        support = new_support
    return SquaredObservation(p, zero_tol=psi.zero_tol)


def hull_inverse(spectrum, c) -> SquaredObservation:
    """psi realising convex weights c on the corners ``[m] - {i}`` (case n = m - 1).

    ``psi_i = pi_{[m]-{i}} / c_i`` gives ``p_{[m]-{i}} = c_i``.
    """
    spectrum = as_spectrum(spectrum)
    c = np.asarray(c, dtype=float)
    m = spectrum.m
    if c.shape != (m,):
        raise DimensionMismatch(f"weights have shape {c.shape}, expected ({m},)")
    if np.any(c <= 0):
        raise NonPositiveWeight("convex weights must be strictly positive")
    if abs(math.fsum(c) - 1.0) > 1e-9:
        raise ValidationError(f"convex weights sum to {math.fsum(c)!r}, not 1")
    psi = np.empty(m)
    for i in range(m):
        tau = IndexSubset(tuple(j for j in range(1, m + 1) if j != i + 1), m)
        psi[i] = corner_weight(spectrum, tau).pi / c[i]
    return SquaredObservation(psi)


__all__ = [
    "SignPattern",
    "SignatureCheck",
    "SimplexDescriptor",
    "RayFan",
    "Membership",
    "sign_changes",
    "enumerate_signatures",
    "simplex_template",
    "corner_sign_pattern",
    "simplex_vertex_patterns",
    "expand_template",
    "simplex_descriptor",
    "signature_lemma_check",
    "total_positivity_check",
    "increasing_vandermonde",
    "inverse_rays",
    "ray_membership",
    "caratheodory_reduce",
    "hull_inverse",
]
