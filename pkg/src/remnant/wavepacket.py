"""Joint position / excess-photon-number amplitudes Psi_k(r, t).

For a Gaussian electron packet of width w in the quasi-classical limit

    Psi_k = 1/(w sqrt(pi)) i^k exp(-i k [omega t - phi - eta]) / (1 + i t/tau)
            * exp(-[(mu lt/w)^2 + (r/w)^2] / (2 (1 + i t/tau)))
            * sum_l I_{k-l}[(mu lt/w)(r/w)/(1 + i t/tau)] J_l(kappa) i^-l exp(i l (chi0 - phi))

where lt = c/omega, (r, phi) are polar coordinates of r - r0 - (p0/m) t and
kappa = mu p0 c / (hbar omega). Integrating Psi_k Psi_l^* over the plane
gives an independent, brute-force route to the reduced density matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import constants
from .density import CouplingState, ReducedDensityMatrix, auto_window
from .errors import ConfigurationError, DomainError
from .specfun import bessel_i_scaled_array, bessel_j_row, truncation_order

__all__ = [
    "PacketParams",
    "ModeCoupling",
    "GridSpec",
    "AmplitudeField",
    "default_grid",
    "amplitude_field",
    "amplitude_fields",
    "normalization_audit",
    "brute_force_density",
    "packet_density",
    "simpson_weights",
    "export_raster_csv",
]

POINTS_PER_FEATURE = 8


@dataclass(frozen=True)
class PacketParams:
    """Initial Gaussian electron packet (CGS: cm, g cm/s, s)."""

    w: float
    p0: float = 0.0
    chi0: float = 0.0
    r0: tuple[float, float] = (0.0, 0.0)
    tau: float | None = None
    mass: float = constants.ELECTRON_MASS

    def __post_init__(self):
        if not (self.w > 0 and math.isfinite(self.w)):
            raise DomainError(f"w must be finite and > 0, got {self.w}")
        if not self.p0 >= 0:
            raise DomainError(f"p0 must be >= 0, got {self.p0}")
        expected = self.mass * self.w**2 / constants.HBAR
        if self.tau is None:
            object.__setattr__(self, "tau", expected)
        elif not math.isclose(self.tau, expected, rel_tol=1e-9):
            raise DomainError(f"tau={self.tau} inconsistent with m w^2/hbar = {expected}")
        object.__setattr__(self, "r0", (float(self.r0[0]), float(self.r0[1])))

    @property
    def velocity(self) -> tuple[float, float]:
        v = self.p0 / self.mass
        return v * math.cos(self.chi0), v * math.sin(self.chi0)

    def center(self, t: float) -> tuple[float, float]:
        vx, vy = self.velocity
        return self.r0[0] + vx * t, self.r0[1] + vy * t


@dataclass(frozen=True)
class ModeCoupling:
    """Instantaneous mu(t), phase eta(t) and mode angular frequency (rad/s)."""

    mu: float
    eta: float = 0.0
    omega: float = 2.0 * math.pi * constants.C_LIGHT / 1e-4

    def __post_init__(self):
        if not self.mu >= 0:
            raise DomainError(f"mu must be >= 0, got {self.mu}")
        if not self.omega > 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")

    @property
    def reduced_wavelength(self) -> float:
        return constants.C_LIGHT / self.omega

    def amplitude_ratio(self, params: PacketParams) -> float:
        """mu lt / w: classical oscillation amplitude over packet width."""
        return self.mu * self.reduced_wavelength / params.w

    def kappa(self, params: PacketParams) -> float:
        return self.mu * params.p0 * constants.C_LIGHT / (constants.HBAR * self.omega)

    def coupling_state(self, params: PacketParams, t: float = 0.0) -> CouplingState:
        a = self.amplitude_ratio(params)
        return CouplingState(q=0.5 * a * a, kappa=self.kappa(params),
                             alpha=self.omega * t - self.eta - params.chi0)

    @classmethod
    def for_couplings(cls, q: float, kappa: float, w: float, omega: float | None = None,
                      eta: float = 0.0, chi0: float = 0.0, r0=(0.0, 0.0)):
        """(PacketParams, ModeCoupling) realising given dimensionless q and kappa."""
        omega = cls.__dataclass_fields__["omega"].default if omega is None else omega
        mu = math.sqrt(2.0 * q) * w * omega / constants.C_LIGHT
        if kappa > 0 and mu == 0:
            raise DomainError("kappa > 0 needs q > 0 (both scale with mu)")
        p0 = kappa * constants.HBAR * omega / (mu * constants.C_LIGHT) if kappa > 0 else 0.0
        return PacketParams(w=w, p0=p0, chi0=chi0, r0=r0), cls(mu=mu, eta=eta, omega=omega)


@dataclass(frozen=True)
class GridSpec:
    """Square grid of n x n points (n odd) centred on ``center``."""

    center: tuple[float, float]
    half_width: float
    n: int

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ConfigurationError(f"grid needs an odd number >= 3 of points, got {self.n}")
        if not self.half_width > 0:
            raise ConfigurationError(f"half_width must be > 0, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def offsets(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        h = self.half_width
        return cx - h, cx + h, cy - h, cy + h

    def refined(self) -> "GridSpec":
        """Same extent with the spacing halved."""
        return GridSpec(self.center, self.half_width, 2 * self.n - 1)


@dataclass(frozen=True)
class AmplitudeField:
    k: int
    grid: np.ndarray
    extent: GridSpec
    t: float
    metadata: dict = field(default_factory=dict)


def default_grid(params: PacketParams, coupling: ModeCoupling, t: float,
                 points_per_width: int = POINTS_PER_FEATURE) -> GridSpec:
    """Half-width max(6 w sqrt(1 + (t/tau)^2), 6 mu lt) around the drifted centre."""
    spread = params.w * math.sqrt(1.0 + (t / params.tau) ** 2)
    half = max(6.0 * spread, 6.0 * coupling.mu * coupling.reduced_wavelength)
    n = int(math.ceil(2.0 * half * points_per_width / params.w)) + 1
    n += 1 - n % 2
    return GridSpec(params.center(t), half, n)


def _check_resolution(params: PacketParams, grid: GridSpec, points_per_width: int) -> None:
    limit = params.w / points_per_width
    if grid.spacing > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"grid spacing {grid.spacing:.4g} cm does not resolve the packet width "
            f"w={params.w:.4g} cm with {points_per_width} points (need <= {limit:.4g})"
        )


def simpson_weights(n: int, h: float) -> np.ndarray:
    wts = np.ones(n)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    return wts * (h / 3.0)


def _relative_polar(params, grid, t, rows=slice(None)):
    """(rho, phi) in units of w for grid rows ``rows``."""
    cx, cy = grid.center
    ex, ey = params.center(t)
    off = grid.offsets
    x = (off + (cx - ex)) / params.w
    y = (off[rows] + (cy - ey)) / params.w
    X, Y = np.meshgrid(x, y)
    return np.hypot(X, Y), np.arctan2(Y, X)


def _bessel_sum_order(kappa: float) -> int:
    return 0 if kappa == 0 else truncation_order(kappa)


def _fields_dimensionless(ks, rho, phi, theta, a, kappa, chi0, omega_t, eta, nl):
    """w * Psi_k on the given polar points for every k in ``ks``.

    Returns shape (len(ks),) + rho.shape.
    """
    ks = np.asarray(ks)
    denom = 1.0 + 1j * theta
    z = a * rho / denom
    order_max = int(np.max(np.abs(ks))) + nl
    ie = bessel_i_scaled_array(z, order_max)  # exp(-Re z) I_m(z)
    # Gaussian envelope merged with the exp(+Re z) removed from ie
    env = np.exp(-(a * a + rho * rho) / (2.0 * denom) + np.real(z)) / (math.sqrt(math.pi) * denom)
    ls = np.arange(-nl, nl + 1)
    jl = bessel_j_row(kappa, nl).two_sided() if nl else np.ones(1)
    out = np.empty((ks.size,) + rho.shape, dtype=complex)
    basis = [jl[i] * (1j) ** (-int(l)) * np.exp(1j * l * (chi0 - phi))
             for i, l in enumerate(ls) if jl[i] != 0.0]
    used = [l for i, l in enumerate(ls) if jl[i] != 0.0]
    for idx, k in enumerate(ks):
        s = np.zeros(rho.shape, dtype=complex)
        for l, b in zip(used, basis):
            s += ie[abs(int(k) - int(l))] * b
        out[idx] = (1j) ** int(k) * np.exp(-1j * k * (omega_t - phi - eta)) * env * s
    return out


def _global_phase(params, grid, t, rows=slice(None)):
    cx, cy = grid.center
    off = grid.offsets
    x = off + (cx - params.r0[0])
    y = off[rows] + (cy - params.r0[1])
    X, Y = np.meshgrid(x, y)
    px = params.p0 * math.cos(params.chi0)
    py = params.p0 * math.sin(params.chi0)
    hb = constants.HBAR
    return np.exp(1j * ((px * X + py * Y) / hb - params.p0**2 * t / (2.0 * params.mass * hb)))


def _adaptive_order(ks, params, coupling, grid, t, theta, a, kappa, omega_t):
    """Bessel-sum half-width, doubled until probe values move by < 1e-12."""
    nl = _bessel_sum_order(kappa)
    if nl == 0:
        return 0
    stride = max(1, grid.n // 8)
    rows = slice(0, grid.n, stride)
    rho, phi = _relative_polar(params, grid, t, rows)
    rho, phi = rho[:, ::stride], phi[:, ::stride]
    args = (theta, a, kappa, params.chi0, omega_t, coupling.eta)
    ref = _fields_dimensionless(ks, rho, phi, *args, nl)
    while True:
        wider = _fields_dimensionless(ks, rho, phi, *args, 2 * nl)
        scale = max(float(np.max(np.abs(wider))), 1e-300)
        if float(np.max(np.abs(wider - ref))) < 1e-12 * scale:
            return nl
        nl, ref = 2 * nl, wider


def amplitude_fields(params: PacketParams, coupling: ModeCoupling, ks, t: float,
                     grid: GridSpec | None = None, *, include_global_phase: bool = False,
                     points_per_width: int = POINTS_PER_FEATURE,
                     check_resolution: bool = True) -> list[AmplitudeField]:
    """Psi_k(r, t) (units 1/cm) on a common grid for every k in ``ks``."""
    if grid is None:
        grid = default_grid(params, coupling, t, points_per_width)
    if check_resolution:
        _check_resolution(params, grid, points_per_width)
    ks = [int(k) for k in ks]
    theta = t / params.tau
    a = coupling.amplitude_ratio(params)
    kappa = coupling.kappa(params)
    omega_t = coupling.omega * t
    nl = _adaptive_order(ks, params, coupling, grid, t, theta, a, kappa, omega_t)
    rho, phi = _relative_polar(params, grid, t)
    vals = _fields_dimensionless(ks, rho, phi, theta, a, kappa, params.chi0,
                                 omega_t, coupling.eta, nl) / params.w
    if include_global_phase:
        vals = vals * _global_phase(params, grid, t)
    meta = {
        "global_phase": "included" if include_global_phase else "omitted",
        "bessel_sum_order": nl,
        "theta": theta,
        "amplitude_ratio": a,
        "kappa": kappa,
    }
    return [AmplitudeField(k=k, grid=v, extent=grid, t=t, metadata=dict(meta))
            for k, v in zip(ks, vals)]


def amplitude_field(params: PacketParams, coupling: ModeCoupling, k: int, t: float,
                    grid: GridSpec | None = None, **kwargs) -> AmplitudeField:
    return amplitude_fields(params, coupling, [k], t, grid, **kwargs)[0]


def _common_grid(fields) -> GridSpec:
    if not fields:
        raise DomainError("need at least one field")
    grid = fields[0].extent
    if any(f.extent != grid for f in fields):
        raise DomainError("fields live on different grids")
    return grid


def normalization_audit(fields) -> float:
    """sum_k of the 2D Simpson integral of |Psi_k|^2."""
    grid = _common_grid(fields)
    wts = simpson_weights(grid.n, grid.spacing)
    W = np.outer(wts, wts)
    return float(sum(np.sum(W * np.abs(f.grid) ** 2) for f in fields))


def brute_force_density(fields) -> ReducedDensityMatrix:
    """P_kl = integral of Psi_k Psi_l^* by 2D Simpson; fields must be consecutive in k."""
    grid = _common_grid(fields)
    ks = [f.k for f in fields]
    if ks != list(range(ks[0], ks[0] + len(ks))):
        raise DomainError("fields must cover consecutive k values in increasing order")
    wts = simpson_weights(grid.n, grid.spacing)
    W = np.outer(wts, wts).reshape(-1)
    F = np.stack([f.grid.reshape(-1) for f in fields])
    P = (F * W) @ F.conj().T
    dev = float(np.max(np.abs(P - P.conj().T)))
    return ReducedDensityMatrix(ks[0], ks[-1], P, dev)


def packet_density(params: PacketParams, coupling: ModeCoupling, t: float,
                   k_range=None, grid: GridSpec | None = None,
                   points_per_width: int = POINTS_PER_FEATURE,
                   block_rows: int = 64,
                   check_resolution: bool = True) -> ReducedDensityMatrix:
    """Brute-force P_kl streamed over blocks of grid rows (bounded memory)."""
    if grid is None:
        grid = default_grid(params, coupling, t, points_per_width)
    if check_resolution:
        _check_resolution(params, grid, points_per_width)
    state = coupling.coupling_state(params, t)
    lo, hi = auto_window(state) if k_range is None else (int(k_range[0]), int(k_range[1]))
    ks = list(range(lo, hi + 1))
    theta = t / params.tau
    a = coupling.amplitude_ratio(params)
    kappa = coupling.kappa(params)
    omega_t = coupling.omega * t
    nl = _adaptive_order(ks, params, coupling, grid, t, theta, a, kappa, omega_t)
    wts = simpson_weights(grid.n, grid.spacing)
    P = np.zeros((len(ks), len(ks)), dtype=complex)
    for start in range(0, grid.n, block_rows):
        rows = slice(start, min(grid.n, start + block_rows))
        rho, phi = _relative_polar(params, grid, t, rows)
        F = _fields_dimensionless(ks, rho, phi, theta, a, kappa, params.chi0,
                                  omega_t, coupling.eta, nl) / params.w
        Wb = np.outer(wts[rows], wts).reshape(-1)
        F = F.reshape(len(ks), -1)
        P += (F * Wb) @ F.conj().T
    dev = float(np.max(np.abs(P - P.conj().T)))
    return ReducedDensityMatrix(lo, hi, P, dev)


def export_raster_csv(field: AmplitudeField, path) -> Path:
    """Write |Psi_k|^2 as a row-major CSV matrix (rows run along y)."""
    path = Path(path)
    x0, x1, y0, y1 = field.extent.bounds
    header = (f"# k={field.k} t={field.t!r} x_min={x0!r} x_max={x1!r} "
              f"y_min={y0!r} y_max={y1!r} nx={field.extent.n} ny={field.extent.n} "
              f"global_phase={field.metadata.get('global_phase', 'omitted')}\n")
    dens = np.abs(field.grid) ** 2
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        for row in dens:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    return path
