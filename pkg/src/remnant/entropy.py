"""Entanglement measures: von Neumann entropy, linear entropy, Schmidt number.

Entropies are computed in nats. ``EntanglementReport.to_bits`` converts the
entropy fields; H and K are dimensionless and never converted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .density import (
    Branch,
    CouplingState,
    PhotonDistribution,
    ReducedDensityMatrix,
    cycle_averaged_distribution,
    reduced_density_matrix,
)
from .errors import DomainError, PositivityError
from .specfun import bessel_i_row_scaled, bessel_j_row, truncation_order

__all__ = [
    "EntanglementReport",
    "von_neumann_entropy",
    "linear_entropy",
    "linear_entropy_closed_form",
    "schmidt_number",
    "jacobi_eigenvalues",
    "hermitian_eigenvalues",
    "spectral_entropy",
    "entanglement_report",
    "NATS",
    "BITS",
]

NATS = "nats"
BITS = "bits"

NORMALIZATION_TOL = 1e-8
EIGEN_CLAMP_TOL = 1e-8
ZERO_PROB = 1e-300


@dataclass(frozen=True)
class EntanglementReport:
    t: float
    S_diag: float
    S_eigen: float
    H: float
    K: float
    units: str = NATS

    def to_bits(self) -> "EntanglementReport":
        if self.units == BITS:
            return self
        f = 1.0 / math.log(2.0)
        return replace(self, S_diag=self.S_diag * f, S_eigen=self.S_eigen * f, units=BITS)


def _probabilities(dist) -> np.ndarray:
    p = dist.probabilities if isinstance(dist, PhotonDistribution) else dist
    p = np.asarray(p, dtype=float)
    deficit = 1.0 - float(np.sum(p))
    if abs(deficit) > NORMALIZATION_TOL:
        raise DomainError(f"distribution not normalised: 1 - sum(p) = {deficit:.3g}")
    return p


def von_neumann_entropy(dist) -> float:
    """S = -sum p ln p (nats), with 0 ln 0 = 0."""
    p = _probabilities(dist)
    p = p[p > ZERO_PROB]
    return float(max(0.0, -np.sum(p * np.log(p))))


def linear_entropy(dist) -> float:
    """H = 1 - sum p^2."""
    p = _probabilities(dist)
    return float(1.0 - np.sum(p * p))


def linear_entropy_closed_form(state: CouplingState, branch: Branch = Branch.GENERAL) -> float:
    """Bessel-sum expressions for H.

    SMALL_KAPPA: 1 - exp(-2q) I_0(2q)
    SMALL_Q:     1 - sum_k J_k(kappa)^4
    GENERAL:     1 - exp(-2q) sum_{n,m} I_{n-m}(2q) J_n(kappa)^2 J_m(kappa)^2
    """
    q, kappa = state.q, state.kappa
    if branch is Branch.SMALL_KAPPA:
        return 1.0 - float(bessel_i_row_scaled(2.0 * q, 0).scaled_values[0])
    nj = 0 if kappa == 0 else truncation_order(kappa)
    j2 = bessel_j_row(kappa, nj).two_sided() ** 2
    if branch is Branch.SMALL_Q:
        return 1.0 - float(np.sum(j2 * j2))
    ie2 = bessel_i_row_scaled(2.0 * q, 2 * nj).two_sided()
    ns = np.arange(-nj, nj + 1)
    T = ie2[ns[:, None] - ns[None, :] + 2 * nj]
    return 1.0 - float(j2 @ T @ j2)


def schmidt_number(H: float) -> float:
    """K = 1 / (1 - H)."""
    if not (0.0 <= H < 1.0):
        if -1e-15 < H < 0.0:
            H = 0.0
        else:
            raise DomainError(f"linear entropy must lie in [0, 1), got {H}")
    return 1.0 / (1.0 - H)


def _round_robin(m: int):
    """Pairings for m (even) players: m - 1 rounds of m/2 disjoint pairs."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations.

    Each round of a sweep applies n/2 disjoint rotations at once
    (round-robin ordering), which is equivalent to applying them one after
    another. Iterates until the off-diagonal Frobenius norm drops below
    ``tol * ||a||_F``. Returns eigenvalues in descending order.
    """
    A = np.array(a, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    if n <= 1:
        return np.real(np.diag(A)).copy()
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n)
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        kept = [(p, q) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in kept]), np.array([q for _, q in kept])))

    off_diagonal = ~np.eye(n, dtype=bool)

    def off_norm(M):
        return float(np.linalg.norm(M[off_diagonal]))

    for _ in range(max_sweeps):
        if off_norm(A) <= tol * scale:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            app = A[P, P].real
            aqq = A[Q, Q].real
            safe = np.where(active, mag, 1.0)
            zeta = (aqq - app) / (2.0 * safe)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ph = np.where(active, np.conj(apq) / safe, 1.0)  # exp(-i phi)
            u00, u01, u10, u11 = c, s, -s * ph, c * ph
            colP, colQ = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = colP * u00 + colQ * u10
            A[:, Q] = colP * u01 + colQ * u11
            rowP, rowQ = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = np.conj(u00)[:, None] * rowP + np.conj(u10)[:, None] * rowQ
            A[Q, :] = np.conj(u01)[:, None] * rowP + np.conj(u11)[:, None] * rowQ
            A[P, Q] = 0.0
            A[Q, P] = 0.0
    else:
        if off_norm(A) > tol * scale:
            raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.real(np.diag(A)))[::-1]


def hermitian_eigenvalues(matrix, hermiticity_tol: float = 1e-13) -> np.ndarray:
    """Descending eigenvalues of a density matrix, clamped to [0, 1].

    Raises :class:`PositivityError` for eigenvalues further than 1e-8
    outside [0, 1].
    """
    entries = matrix.entries if isinstance(matrix, ReducedDensityMatrix) else np.asarray(matrix)
    dev = float(np.max(np.abs(entries - np.conj(entries.T)))) if entries.size else 0.0
    if dev > hermiticity_tol:
        raise DomainError(f"matrix is not Hermitian (deviation {dev:.3g})")
    lam = jacobi_eigenvalues(entries)
    if lam.size and (lam[-1] < -EIGEN_CLAMP_TOL or lam[0] > 1.0 + EIGEN_CLAMP_TOL):
        raise PositivityError(
            f"eigenvalues outside [0, 1]: min {lam[-1]:.3g}, max {lam[0]:.3g}"
        )
    return np.clip(lam, 0.0, 1.0)


def spectral_entropy(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > ZERO_PROB]
    return float(max(0.0, -np.sum(lam * np.log(lam))))


def entanglement_report(state: CouplingState, t: float = 0.0, k_range=None,
                        units: str = NATS) -> EntanglementReport:
    """S from the cycle-averaged diagonal, S from the spectrum of P, H and K."""
    dist = cycle_averaged_distribution(state, k_range)
    s_diag = von_neumann_entropy(dist)
    H = linear_entropy(dist)
    if state.kappa == 0.0:
        # P is already diagonal
        s_eigen = s_diag
    else:
        rho = reduced_density_matrix(state, (dist.k_min, dist.k_max))
        s_eigen = spectral_entropy(hermitian_eigenvalues(rho))
    report = EntanglementReport(t=t, S_diag=s_diag, S_eigen=s_eigen, H=H, K=schmidt_number(H))
    if units == BITS:
        return report.to_bits()
    if units != NATS:
        raise DomainError(f"units must be '{NATS}' or '{BITS}', got {units!r}")
    return report
