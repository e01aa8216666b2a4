"""Reduced photon density matrix after tracing out the electron.

In the quasi-classical limit (lower photon-number limit pushed to -inf):

    P_kl = exp(-i (k-l) alpha) exp(-q) sum_n I_{k-n}(q) J_n(kappa) J_{n-(k-l)}(kappa)
    p_k  = sum_n exp(-q) I_{k-n}(q) J_n(kappa)^2

with q = (mu lambda / 2 pi w)^2 / 2, kappa = mu c p0 / hbar omega and
alpha = omega t - eta - chi0.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RemnantError, TruncationError
from .specfun import bessel_i_row_scaled, bessel_j_row, truncation_order

__all__ = [
    "CouplingState",
    "PhotonDistribution",
    "ReducedDensityMatrix",
    "Branch",
    "HermiticityError",
    "coupling_state",
    "auto_window",
    "reduced_density_matrix",
    "cycle_averaged_distribution",
    "limiting_distribution",
]

log = logging.getLogger(__name__)

TRACE_TARGET = 1e-10
TRACE_FAIL = 1e-6
HERMITICITY_TOL = 1e-13


class HermiticityError(RemnantError, ArithmeticError):
    """Analytic P_kl came out non-Hermitian beyond rounding."""


class Branch(enum.Enum):
    SMALL_KAPPA = "small_kappa"
    SMALL_Q = "small_q"
    GENERAL = "general"


@dataclass(frozen=True)
class CouplingState:
    """Dimensionless couplings at one instant."""

    q: float
    kappa: float
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("q", "kappa"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
        if not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite, got {self.alpha}")


@dataclass(frozen=True)
class PhotonDistribution:
    """Probabilities p_k over excess photon numbers k_min..k_max."""

    k_min: int
    k_max: int
    probabilities: np.ndarray
    truncation_mass: float

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def __getitem__(self, k: int) -> float:
        if not self.k_min <= k <= self.k_max:
            return 0.0
        return float(self.probabilities[k - self.k_min])


@dataclass(frozen=True)
class ReducedDensityMatrix:
    k_min: int
    k_max: int
    entries: np.ndarray
    hermiticity_deviation: float = 0.0

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __getitem__(self, kl) -> complex:
        k, l = kl
        return complex(self.entries[k - self.k_min, l - self.k_min])


def coupling_state(mu_t: float, lambda_over_2pi_w: float, kappa_scale: float,
                   omega_t: float = 0.0, eta: float = 0.0, chi0: float = 0.0) -> CouplingState:
    if mu_t < 0:
        raise DomainError(f"mu(t) must be >= 0, got {mu_t}")
    if lambda_over_2pi_w <= 0:
        raise DomainError(f"lambda/(2 pi w) must be > 0, got {lambda_over_2pi_w}")
    if kappa_scale < 0:
        raise DomainError(f"kappa_scale must be >= 0, got {kappa_scale}")
    amp = mu_t * lambda_over_2pi_w
    return CouplingState(q=0.5 * amp * amp, kappa=mu_t * kappa_scale,
                         alpha=omega_t - eta - chi0)


def _as_range(k_range) -> tuple[int, int]:
    lo, hi = int(k_range[0]), int(k_range[1])
    if hi < lo:
        raise DomainError(f"empty k range {k_range}")
    return lo, hi


def _ingredients(state: CouplingState, lo: int, hi: int):
    """J_n(kappa) for |n| <= Nj and two-sided exp(-q) I_m(q) for |m| <= M."""
    nj = 0 if state.kappa == 0 else truncation_order(state.kappa)
    j = bessel_j_row(state.kappa, nj).two_sided()
    m = max(abs(lo), abs(hi)) + nj
    ie = bessel_i_row_scaled(state.q, m).two_sided()
    return nj, j, m, ie


def _diagonal(state: CouplingState, lo: int, hi: int) -> np.ndarray:
    nj, j, m, ie = _ingredients(state, lo, hi)
    full = np.convolve(ie, j * j)  # orders -(m+nj)..(m+nj)
    off = m + nj
    return full[lo + off:hi + off + 1]


def auto_window(state: CouplingState) -> tuple[int, int]:
    """Smallest symmetric window (grown from the Bessel bound) with deficit < 1e-10."""
    k = truncation_order(max(state.q, state.kappa))
    while True:
        deficit = 1.0 - float(np.sum(_diagonal(state, -k, k)))
        if abs(deficit) < TRACE_TARGET:
            return -k, k
        k = int(math.ceil(1.25 * k)) + 5


def _resolve(state, k_range):
    return auto_window(state) if k_range is None else _as_range(k_range)


def cycle_averaged_distribution(state: CouplingState, k_range=None) -> PhotonDistribution:
    """Diagonal p_k of the cycle-averaged density matrix."""
    lo, hi = _resolve(state, k_range)
    p = _diagonal(state, lo, hi)
    mass = 1.0 - float(np.sum(p))
    if abs(mass) > TRACE_FAIL:
        raise TruncationError(
            f"window [{lo}, {hi}] loses probability {mass:.3g}",
            required_range=auto_window(state),
        )
    p.setflags(write=False)
    return PhotonDistribution(lo, hi, p, mass)


def limiting_distribution(state: CouplingState, branch: Branch, k_range=None) -> PhotonDistribution:
    """p_k = exp(-q) I_k(q) (SMALL_KAPPA) or J_k(kappa)^2 (SMALL_Q)."""
    if branch is Branch.SMALL_KAPPA:
        reduced = CouplingState(q=state.q, kappa=0.0, alpha=state.alpha)
    elif branch is Branch.SMALL_Q:
        reduced = CouplingState(q=0.0, kappa=state.kappa, alpha=state.alpha)
    else:
        raise DomainError(f"limiting_distribution needs SMALL_KAPPA or SMALL_Q, got {branch}")
    lo, hi = _resolve(reduced, k_range)
    ks = np.arange(lo, hi + 1)
    nmax = int(np.max(np.abs(ks)))
    if branch is Branch.SMALL_KAPPA:
        p = bessel_i_row_scaled(reduced.q, nmax).scaled_values[np.abs(ks)].copy()
    else:
        row = bessel_j_row(reduced.kappa, nmax).values
        p = row[np.abs(ks)] ** 2
    p.setflags(write=False)
    return PhotonDistribution(lo, hi, p, 1.0 - float(np.sum(p)))


def reduced_density_matrix(state: CouplingState, k_range=None) -> ReducedDensityMatrix:
    """Full P_kl on a window of excess photon numbers."""
    lo, hi = _resolve(state, k_range)
    nj, j, m, ie = _ingredients(state, lo, hi)
    ks = np.arange(lo, hi + 1)
    ns = np.arange(-nj, nj + 1)
    w = ks.size
    # A[k, n] = exp(-q) I_{k-n}(q)
    A = ie[(ks[:, None] - ns[None, :]) + m]
    # M[n, d] = J_n J_{n-d}, d = k - l in -(w-1)..(w-1)
    ds = np.arange(-(w - 1), w)
    idx = ns[:, None] - ds[None, :]
    inside = np.abs(idx) <= nj
    M = np.where(inside, j[:, None] * j[np.clip(idx + nj, 0, 2 * nj)], 0.0)
    C = A @ M  # C[k, d]
    d_kl = ks[:, None] - ks[None, :]
    R = C[np.arange(w)[:, None], d_kl + (w - 1)]
    P = np.exp(-1j * state.alpha * d_kl) * R

    deviation = float(np.max(np.abs(P - P.conj().T))) if w > 1 else 0.0
    log.debug("P_kl hermiticity deviation %.3g on window [%d, %d]", deviation, lo, hi)
    if deviation > HERMITICITY_TOL:
        raise HermiticityError(f"P_kl deviates from Hermitian by {deviation:.3g}")
    P = 0.5 * (P + P.conj().T)

    deficit = 1.0 - float(np.trace(P).real)
    if abs(deficit) > TRACE_FAIL:
        raise TruncationError(
            f"window [{lo}, {hi}] loses trace {deficit:.3g}",
            required_range=auto_window(state),
        )
    P.setflags(write=False)
    return ReducedDensityMatrix(lo, hi, P, deviation)
