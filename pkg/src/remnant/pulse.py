"""Pulse envelopes and the complex interaction function h(t).

Times are measured in units of the mode period T, so the mode frequency
is ``omega = 2*pi`` unless a caller chooses otherwise.

    h(t) = omega^2 * exp(i omega t) * int_0^t dt' int_0^t' dt'' f(t'') exp(-i omega t'')

The double integral is accumulated with nested cumulative composite Simpson
rules on a uniform grid anchored at the switch-on time ``t0``. After the
switch-off at ``t0 + T1`` the modulus is held fixed and only the phase
keeps rotating with ``omega``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Envelope",
    "PulseSpec",
    "InteractionSample",
    "IntensityParams",
    "InteractionFunction",
    "envelope",
    "envelope_values",
    "interaction_function",
    "coupling",
    "mu0_from_intensity",
    "cumulative_simpson",
    "MODE_OMEGA",
    "MIN_SAMPLES_PER_PERIOD",
]

MODE_OMEGA = 2.0 * math.pi
MIN_SAMPLES_PER_PERIOD = 64


class Envelope(enum.Enum):
    SIN = "sin"
    SIN_SQUARED = "sin_squared"
    CUSTOM_TABLE = "custom_table"


@dataclass(frozen=True)
class PulseSpec:
    """Switching envelope of the field amplitude.

    ``table`` holds ``(t - t0, f)`` knots and is only used by CUSTOM_TABLE.
    """

    family: Envelope
    t0: float
    T1: float
    samples_per_period: int = 512
    table: tuple[tuple[float, float], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.T1) and self.T1 > 0):
            problems.append(f"T1 must be finite and > 0, got {self.T1}")
        if not math.isfinite(self.t0):
            problems.append(f"t0 must be finite, got {self.t0}")
        if self.samples_per_period < MIN_SAMPLES_PER_PERIOD:
            problems.append(
                f"samples_per_period must be >= {MIN_SAMPLES_PER_PERIOD}, "
                f"got {self.samples_per_period}"
            )
        if self.family is Envelope.CUSTOM_TABLE:
            if not self.table or len(self.table) < 2:
                problems.append("CUSTOM_TABLE needs at least two knots")
            else:
                s = [k[0] for k in self.table]
                if any(b <= a for a, b in zip(s, s[1:])):
                    problems.append("CUSTOM_TABLE knots must be strictly increasing")
        if problems:
            raise ConfigurationError(problems)

    @property
    def t_end(self) -> float:
        return self.t0 + self.T1


@dataclass(frozen=True)
class InteractionSample:
    t: float
    h: complex
    modulus: float
    eta: float


@dataclass(frozen=True)
class IntensityParams:
    intensity_W_per_cm2: float
    photon_energy_eV: float

    def __post_init__(self):
        if not (self.intensity_W_per_cm2 > 0 and self.photon_energy_eV > 0):
            raise DomainError("intensity and photon energy must both be > 0")


def envelope_values(spec: PulseSpec, t) -> np.ndarray:
    """Vectorised envelope f(t); zero outside [t0, t0 + T1]."""
    t = np.asarray(t, dtype=float)
    s = t - spec.t0
    inside = (s >= 0.0) & (s <= spec.T1)
    if spec.family is Envelope.SIN:
        f = np.sin((math.pi / spec.T1) * s)
    elif spec.family is Envelope.SIN_SQUARED:
        f = np.sin((math.pi / spec.T1) * s) ** 2
    else:
        knots = np.asarray(spec.table, dtype=float)
        f = np.interp(s, knots[:, 0], knots[:, 1], left=0.0, right=0.0)
    return np.where(inside, f, 0.0)


def envelope(spec: PulseSpec, t: float) -> float:
    return float(envelope_values(spec, t))


def cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Running integral of uniformly sampled ``y`` at every node.

    Even nodes get the composite Simpson sum. An odd node adds the first
    half of the next Simpson panel, (5 y0 + 8 y1 - y2) dx / 12; the last
    odd node of an even-length sample uses the mirrored formula.
    """
    y = np.asarray(y)
    n = y.size
    out = np.zeros(n, dtype=np.result_type(y, float))
    if n < 3:
        if n == 2:
            out[1] = 0.5 * dx * (y[0] + y[1])
        return out
    panels = (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2]) * (dx / 3.0)
    out[2::2] = np.cumsum(panels)
    m = (n - 1) // 2
    first_half = (5.0 * y[0:2 * m:2] + 8.0 * y[1:2 * m:2] - y[2:2 * m + 1:2]) * (dx / 12.0)
    out[1:2 * m:2] = out[0:2 * m - 1:2] + first_half
    if n % 2 == 0:
        # trailing odd node: second half of the panel ending there
        tail = (-y[n - 3] + 8.0 * y[n - 2] + 5.0 * y[n - 1]) * (dx / 12.0)
        out[n - 1] = out[n - 2] + tail
    return out


class InteractionFunction:
    """Tabulated h(t) for one pulse, callable at arbitrary times.

    The tables cover the pulse window on a grid of spacing at most
    ``T / samples_per_period`` with an even number of panels. Off-grid
    times are completed with a three-point Simpson step from the nearest
    node below, using exact envelope values.
    """

    def __init__(self, spec: PulseSpec, omega: float = MODE_OMEGA):
        if not omega > 0:
            raise DomainError(f"omega must be > 0, got {omega}")
        self.spec = spec
        self.omega = float(omega)
        period = 2.0 * math.pi / self.omega
        n = math.ceil(spec.T1 * spec.samples_per_period / period - 1e-9)
        n += n % 2
        self.n_panels = n
        self.ds = spec.T1 / n
        self.s = np.arange(n + 1) * self.ds
        self.s[-1] = spec.T1
        g = self._inner_integrand(self.s)
        self._G = cumulative_simpson(g, self.ds)
        self._H = cumulative_simpson(self._G, self.ds)
        self.h_end = self.omega**2 * np.exp(1j * self.omega * spec.T1) * self._H[-1]

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def _inner_integrand(self, s):
        return envelope_values(self.spec, self.spec.t0 + s) * np.exp(-1j * self.omega * s)

    def _simpson_step(self, a, b, fa, fm, fb):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = np.atleast_1d(t - self.spec.t0)
        h = np.zeros(s.shape, dtype=complex)
        after = s >= self.spec.T1
        h[after] = self.h_end * np.exp(1j * self.omega * (s[after] - self.spec.T1))
        during = (s > 0.0) & ~after
        if np.any(during):
            sd = s[during]
            j = np.minimum((sd / self.ds).astype(int), self.n_panels - 1)
            a = self.s[j]
            m = 0.5 * (a + sd)
            ga = self._inner_integrand(a)
            gm = self._inner_integrand(m)
            gb = self._inner_integrand(sd)
            q = 0.5 * (a + m)
            G_m = self._G[j] + self._simpson_step(a, m, ga, self._inner_integrand(q), gm)
            G_b = self._G[j] + self._simpson_step(a, sd, ga, gm, gb)
            H_b = self._H[j] + self._simpson_step(a, sd, self._G[j], G_m, G_b)
            h[during] = self.omega**2 * np.exp(1j * self.omega * sd) * H_b
        return h.reshape(t.shape) if t.ndim else h[0]

    def sample(self, t: float) -> InteractionSample:
        return _to_sample(float(t), complex(self(t)))


def _phase(h: complex) -> float:
    eta = math.atan2(h.imag, h.real) if h != 0 else 0.0
    return math.pi if eta == -math.pi else eta


def _to_sample(t: float, h: complex) -> InteractionSample:
    return InteractionSample(t=t, h=h, modulus=abs(h), eta=_phase(h))


def interaction_function(
    spec: PulseSpec, omega: float, t_grid: Sequence[float]
) -> list[InteractionSample]:
    """h(t) sampled on an increasing grid that starts at or before ``t0``.

    The quadrature itself always runs on the internal grid of
    ``spec.samples_per_period`` points per period; ``t_grid`` only has to be
    fine enough (spacing <= T/64) to resolve the fast phase of h.
    """
    t = np.asarray(t_grid, dtype=float)
    period = 2.0 * math.pi / omega
    problems = []
    if t.ndim != 1 or t.size == 0:
        problems.append("t_grid must be a non-empty 1-D sequence")
    else:
        if not np.all(np.isfinite(t)):
            problems.append("t_grid contains non-finite values")
        if t[0] > spec.t0:
            problems.append(f"t_grid starts at {t[0]} after switch-on t0={spec.t0}")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                problems.append("t_grid must be strictly increasing")
            elif steps.max() > period / MIN_SAMPLES_PER_PERIOD * (1 + 1e-12):
                problems.append(
                    f"t_grid spacing {steps.max():.6g} exceeds "
                    f"T/{MIN_SAMPLES_PER_PERIOD} = {period / MIN_SAMPLES_PER_PERIOD:.6g}"
                )
    if problems:
        raise ConfigurationError(problems)
    values = InteractionFunction(spec, omega)(t)
    return [_to_sample(float(ti), complex(hi)) for ti, hi in zip(t, values)]


def coupling(mu0: float, sample: InteractionSample) -> float:
    """Instantaneous intensity parameter mu(t) = mu0 * |h(t)|."""
    if mu0 < 0:
        raise DomainError(f"mu0 must be >= 0, got {mu0}")
    return mu0 * sample.modulus


def mu0_from_intensity(p: IntensityParams) -> float:
    """mu0 = 1e-9 * sqrt(I [W/cm^2]) / E_ph [eV]."""
    return 1e-9 * math.sqrt(p.intensity_W_per_cm2) / p.photon_energy_eV
