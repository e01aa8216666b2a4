"""Displacement-operator matrix elements between Fock states.

Two routes to <n0 + k| D(sigma) |n0>:

* EXACT: Laguerre-polynomial closed form, usable for any n0 (factorial
  ratios are handled in log space so n0 ~ 1e4 is fine).
* QUASICLASSICAL: the large-n0 limit J_k(2 sqrt(n0) |sigma|) times a phase.

Dimensional quantities are Gaussian-CGS.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import DomainError, SingularMassError
from .specfun import bessel_j_row, laguerre_scaled_many, truncation_order

__all__ = [
    "ModeParams",
    "SigmaValue",
    "RowMode",
    "MatrixElementRow",
    "sigma",
    "exact_matrix_elements",
    "quasiclassical_row",
    "quasiclassical_matrix_elements",
    "jacobi_anger_check",
    "effective_mass",
    "exact_vs_quasiclassical",
    "default_k_range",
]


@dataclass(frozen=True)
class ModeParams:
    """Single quantized mode: frequency, plasma frequency, occupation, volume."""

    omega: float
    omega_p: float
    n0: int
    L3: float

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if not self.omega_p >= 0:
            raise DomainError(f"omega_p must be >= 0, got {self.omega_p}")
        if int(self.n0) != self.n0 or self.n0 < 0:
            raise DomainError(f"n0 must be a nonnegative integer, got {self.n0}")
        if not (self.L3 > 0 and math.isfinite(self.L3)):
            raise DomainError(f"L3 must be finite and > 0, got {self.L3}")

    @classmethod
    def from_volume(cls, omega, n0, L3, mass=constants.ELECTRON_MASS,
                    charge=constants.ELEMENTARY_CHARGE):
        """Mode whose plasma frequency is that of one electron in ``L3``."""
        omega_p = math.sqrt(4.0 * math.pi * charge**2 / (mass * L3))
        return cls(omega=omega, omega_p=omega_p, n0=n0, L3=L3)

    @property
    def plasma_ratio(self) -> float:
        """omega_p^2 / (2 omega^2)."""
        return self.omega_p**2 / (2.0 * self.omega**2)

    @property
    def Omega(self) -> float:
        return self.omega * (1.0 + self.plasma_ratio)

    @property
    def photon_density(self) -> float:
        return self.n0 / self.L3

    @property
    def potential_amplitude(self) -> float:
        """a = (2 pi hbar c^2 / omega L^3)^(1/2)."""
        return math.sqrt(2.0 * math.pi * constants.HBAR * constants.C_LIGHT**2
                         / (self.omega * self.L3))


@dataclass(frozen=True)
class SigmaValue:
    sigma: complex
    t: float


class RowMode(enum.Enum):
    EXACT = "exact"
    QUASICLASSICAL = "quasiclassical"


@dataclass(frozen=True)
class MatrixElementRow:
    """Column n0 of the displacement operator for excess numbers k_min..k_max."""

    n0: int | None
    k_min: int
    k_max: int
    values: np.ndarray
    mode: RowMode

    def __getitem__(self, k: int) -> complex:
        if not self.k_min <= k <= self.k_max:
            raise IndexError(f"k={k} outside [{self.k_min}, {self.k_max}]")
        return complex(self.values[k - self.k_min])

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


def sigma(p_magnitude: float, chi: float, mode: ModeParams, t: float,
          mass: float = constants.ELECTRON_MASS) -> SigmaValue:
    """Dimensionless displacement sigma(p, t) for electron momentum p (g cm/s).

    sigma = -(p . eps*) e a / (m hbar Omega) (exp(i Omega t) - 1) with the
    circular projection p . eps* = p exp(-i chi) / sqrt(2).
    """
    proj = p_magnitude * cmath.exp(-1j * chi) / math.sqrt(2.0)
    scale = (constants.ELEMENTARY_CHARGE * mode.potential_amplitude
             / (mass * constants.HBAR * mode.Omega))
    return SigmaValue(sigma=-proj * scale * (cmath.exp(1j * mode.Omega * t) - 1.0), t=t)


def default_k_range(argument: float, n0: int | None = None) -> tuple[int, int]:
    """Symmetric window +-truncation_order(argument), clipped at -n0."""
    bound = truncation_order(argument)
    low = -bound if n0 is None else max(-bound, -int(n0))
    return low, bound


def _check_range(k_range, n0=None) -> tuple[int, int]:
    lo, hi = int(k_range[0]), int(k_range[1])
    if hi < lo:
        raise DomainError(f"empty k range {k_range}")
    if n0 is not None and lo < -n0:
        raise DomainError(f"k range starts at {lo}, below -n0 = {-n0}")
    return lo, hi


def exact_matrix_elements(sigma: complex, n0: int, k_range=None) -> MatrixElementRow:
    """c_{n0+k, n0} = <n0 + k| D(sigma) |n0> from the Laguerre closed form.

    The default window uses the effective spread 2 sqrt(n0)|sigma| + |sigma|^2,
    which also covers the Poisson regime of small n0.
    """
    sigma = complex(sigma)
    n0 = int(n0)
    if n0 < 0:
        raise DomainError(f"n0 must be >= 0, got {n0}")
    s_abs = abs(sigma)
    if k_range is None:
        k_range = default_k_range(2.0 * math.sqrt(n0) * s_abs + s_abs**2, n0)
    lo, hi = _check_range(k_range, n0)
    ks = np.arange(lo, hi + 1)
    if s_abs == 0.0:
        values = (ks == 0).astype(complex)
        return MatrixElementRow(n0, lo, hi, values, RowMode.EXACT)

    x = s_abs**2
    up = ks >= 0
    # k >= 0: L_{n0}^{k}; k < 0: L_{n0+k}^{-k}
    degrees = np.where(up, n0, n0 + ks)
    supers = np.abs(ks)
    mant, log_scale = laguerre_scaled_many(degrees, supers, x)

    lg = np.vectorize(math.lgamma)
    big = np.where(up, n0 + ks, n0).astype(float)
    small = np.where(up, n0, n0 + ks).astype(float)
    log_mag = (0.5 * (lg(small + 1.0) - lg(big + 1.0))
               + np.abs(ks) * math.log(s_abs) - 0.5 * x + log_scale)
    phase = np.exp(1j * ks * cmath.phase(sigma))
    phase = np.where(up, phase, phase * np.where(ks % 2 == 0, 1.0, -1.0))
    values = mant * np.exp(log_mag) * phase
    return MatrixElementRow(n0, lo, hi, values, RowMode.EXACT)


def quasiclassical_row(argument: float, phase_angle: float, k_range=None,
                       n0: int | None = None) -> MatrixElementRow:
    """J_k(argument) exp(-i k phase_angle) over the requested window."""
    if argument < 0:
        raise DomainError(f"quasi-classical argument must be >= 0, got {argument}")
    if k_range is None:
        k_range = default_k_range(argument)
    lo, hi = _check_range(k_range)
    nmax = max(abs(lo), abs(hi))
    row = bessel_j_row(argument, nmax)
    ks = np.arange(lo, hi + 1)
    j = np.array([row[int(k)] for k in ks])
    values = j * np.exp(-1j * ks * phase_angle)
    return MatrixElementRow(n0, lo, hi, values, RowMode.QUASICLASSICAL)


def quasiclassical_matrix_elements(mu_t: float, p_magnitude: float, chi: float, eta: float,
                                   omega_t: float, k_range=None,
                                   hbar_omega: float = None,
                                   c_light: float = constants.C_LIGHT) -> MatrixElementRow:
    """J_k[mu(t) p c / hbar omega] exp(-i k (omega t - chi - eta))."""
    if mu_t < 0:
        raise DomainError(f"mu(t) must be >= 0, got {mu_t}")
    if hbar_omega is None or hbar_omega <= 0:
        raise DomainError("hbar_omega must be given and > 0")
    argument = mu_t * p_magnitude * c_light / hbar_omega
    return quasiclassical_row(argument, omega_t - chi - eta, k_range)


def jacobi_anger_check(z: float, theta: float, order_max: int) -> float:
    """|exp(-i z sin theta) - sum_{|k|<=N} J_k(z) exp(-i k theta)|."""
    need = truncation_order(z)
    if order_max < need:
        raise DomainError(f"order_max={order_max} below truncation bound {need} for z={z}")
    row = quasiclassical_row(z, theta, (-order_max, order_max))
    return abs(cmath.exp(-1j * z * math.sin(theta)) - complex(np.sum(row.values)))


def effective_mass(mode: ModeParams, t: float, bare_mass: float = constants.ELECTRON_MASS) -> float:
    """Dressed mass m(t); raises :class:`SingularMassError` at a vanishing denominator."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if bare_mass <= 0:
        raise DomainError(f"bare mass must be > 0, got {bare_mass}")
    x = mode.plasma_ratio
    phase = mode.Omega * t
    sinc = 1.0 if phase == 0.0 else math.sin(phase) / phase
    denom = 1.0 + x * (2.0 * sinc - 1.0)
    if abs(denom) <= 1e-14 * (1.0 + x):
        raise SingularMassError(f"dressed-mass denominator vanishes at Omega t = {phase}")
    return bare_mass * (1.0 + x) / denom


def exact_vs_quasiclassical(n0: int, argument: float) -> float:
    """max_k |exact - quasiclassical| with 2 sqrt(n0)|sigma| = argument, sigma real."""
    if argument == 0.0:
        return 0.0
    s = argument / (2.0 * math.sqrt(n0))
    k_range = default_k_range(argument, n0)
    exact = exact_matrix_elements(s, n0, k_range)
    qc = quasiclassical_row(argument, 0.0, k_range)
    return float(np.max(np.abs(exact.values - qc.values)))
