"""Integer-order Bessel functions and generalized Laguerre polynomials.

Both Bessel families are evaluated with Miller's backward recurrence,
normalised by a sum rule:

    J_0(x) + 2 * sum_m J_2m(x) = 1
    I_0(z) + 2 * sum_n I_n(z)  = exp(z)

Modified Bessel values are only ever exposed in the scaled form
``exp(-|Re z|) * I_n(z)`` so that large arguments cannot overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "BesselJRow",
    "BesselIRow",
    "LaguerreValue",
    "truncation_order",
    "bessel_j_row",
    "bessel_i_row_scaled",
    "bessel_i_scaled_array",
    "laguerre",
    "laguerre_scaled",
    "laguerre_scaled_many",
]

_BIG = 1e200
_SMALL = 1e-200
# below this modulus the leading series term is exact in double precision
_TINY_ARG = 1e-30


def truncation_order(z) -> int:
    """Order beyond which J_n(|z|) and I_n(|z|) are negligible (< 1e-14)."""
    a = float(np.max(np.abs(z))) if np.ndim(z) else abs(z)
    return int(math.ceil(a + 12.0 * a ** (1.0 / 3.0) + 20.0))


def _start_order(zmax: float, order_max: int) -> int:
    m = max(truncation_order(zmax), order_max) + 16
    return m + (m % 2)


def _miller(z: np.ndarray, order_max: int, sign: float) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalised backward recurrence y_{n-1} = (2n/z) y_n + sign*y_{n+1}.

    Returns the stored orders 0..order_max (leading axis) and the
    normalisation sum, J-style (even orders only) when ``sign < 0`` and
    I-style (all orders) otherwise. ``z`` must contain no zeros.
    """
    start = _start_order(float(np.max(np.abs(z))), order_max)
    out = np.zeros((order_max + 1,) + z.shape, dtype=z.dtype)
    y_next = np.zeros_like(z)
    y = np.ones_like(z)
    total = np.zeros_like(z)
    two_over_z = 2.0 / z
    for n in range(start, 0, -1):
        if n <= order_max:
            out[n] = y
        if sign > 0 or n % 2 == 0:
            total = total + 2.0 * y
        y_prev = n * two_over_z * y + sign * y_next
        y_next, y = y, y_prev
        big = np.abs(y) > _BIG
        if np.any(big):
            y = np.where(big, y * _SMALL, y)
            y_next = np.where(big, y_next * _SMALL, y_next)
            total = np.where(big, total * _SMALL, total)
            if n <= order_max:
                out[n:] = np.where(big, out[n:] * _SMALL, out[n:])
    out[0] = y
    total = total + y
    return out, total


def _leading_term(z: np.ndarray, order_max: int, sign: float) -> np.ndarray:
    # (z/2)^n / n! with the first correction, exact for |z| < _TINY_ARG
    shape = (-1,) + (1,) * z.ndim
    n = np.arange(order_max + 1).reshape(shape)
    half = z / 2.0
    factorial = np.cumprod(np.maximum(np.arange(order_max + 1), 1).astype(float))
    lead = half ** n / factorial.reshape(shape)
    return lead * (1.0 + sign * half * half / (n + 1.0))


@dataclass(frozen=True)
class BesselJRow:
    """J_n(x) for n = order_min..order_max; negative orders via symmetry."""

    x: float
    order_min: int
    order_max: int
    values: np.ndarray

    def __getitem__(self, n: int) -> float:
        if self.order_min <= n <= self.order_max:
            return float(self.values[n - self.order_min])
        if self.order_min <= -n <= self.order_max:
            return float((-1) ** (n % 2) * self.values[-n - self.order_min])
        raise IndexError(f"order {n} not represented")

    def two_sided(self) -> np.ndarray:
        """Values for orders -order_max..order_max (requires order_min == 0)."""
        if self.order_min != 0:
            raise ValueError("two_sided needs a row starting at order 0")
        pos = self.values
        signs = np.where(np.arange(1, pos.size) % 2 == 1, -1.0, 1.0)
        return np.concatenate([(signs * pos[1:])[::-1], pos])


@dataclass(frozen=True)
class BesselIRow:
    """exp(-s) * I_n(z) for n = order_min..order_max with s = |Re z|."""

    z: complex
    order_min: int
    order_max: int
    scaled_values: np.ndarray
    scaling_exponent: float

    def __getitem__(self, n: int) -> complex:
        n = abs(n)
        if self.order_min <= n <= self.order_max:
            return complex(self.scaled_values[n - self.order_min])
        raise IndexError(f"order {n} not represented")

    def two_sided(self) -> np.ndarray:
        pos = self.scaled_values
        return np.concatenate([pos[1:][::-1], pos])


def bessel_j_row(x: float, order_max: int) -> BesselJRow:
    """Bessel J_0..J_order_max at real ``x``.

    Miller's backward recurrence normalised with J_0 + 2*sum J_2m = 1.
    Negative ``x`` is handled through J_n(-x) = (-1)^n J_n(x).
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_j_row: non-finite argument {x!r}")
    if order_max < 0:
        raise DomainError("bessel_j_row: order_max must be >= 0")
    ax = abs(x)
    if ax < _TINY_ARG:
        vals = _leading_term(np.array(ax), order_max, -1.0).reshape(-1)
    else:
        raw, total = _miller(np.array(ax), order_max, -1.0)
        vals = raw.reshape(-1) / total
    if x < 0:
        vals = vals * np.where(np.arange(order_max + 1) % 2 == 1, -1.0, 1.0)
    vals.setflags(write=False)
    return BesselJRow(x=x, order_min=0, order_max=order_max, values=vals)


def bessel_i_scaled_array(z, order_max: int) -> np.ndarray:
    """Vectorised exp(-|Re z|) * I_n(z), n = 0..order_max.

    Returns an array of shape ``(order_max + 1,) + np.shape(z)``. Real input
    gives real output.
    """
    z = np.asarray(z)
    is_real = not np.iscomplexobj(z)
    zc = z.astype(float if is_real else complex)
    if not np.all(np.isfinite(zc)):
        raise DomainError("bessel_i_scaled_array: non-finite argument")
    if order_max < 0:
        raise DomainError("bessel_i_scaled_array: order_max must be >= 0")
    # I_n(-z) = (-1)^n I_n(z): keep the recurrence on Re z >= 0 where the
    # normalisation sum has no cancellation
    flip = np.real(zc) < 0
    zr = np.where(flip, -zc, zc)
    tiny = np.abs(zr) < _TINY_ARG
    out = np.empty((order_max + 1,) + zr.shape, dtype=zr.dtype)
    if np.any(tiny):
        out[:] = _leading_term(np.where(tiny, zr, 0.0), order_max, 1.0)
    if not np.all(tiny):
        safe = np.where(tiny, 1.0, zr)
        raw, total = _miller(safe, order_max, 1.0)
        phase = np.exp(1j * np.imag(safe)) if not is_real else 1.0
        scaled = raw * (phase / total)
        out = np.where(tiny, out, scaled)
    if np.any(flip):
        parity = np.where(np.arange(order_max + 1) % 2 == 1, -1.0, 1.0)
        parity = parity.reshape((-1,) + (1,) * zr.ndim)
        out = np.where(flip, out * parity, out)
    return out


def bessel_i_row_scaled(z: complex, order_max: int) -> BesselIRow:
    """Scaled modified Bessel row exp(-|Re z|) * I_n(z), n = 0..order_max."""
    if isinstance(z, complex) or np.iscomplexobj(z):
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"bessel_i_row_scaled: non-finite argument {z!r}")
        arg = np.array(z)
    else:
        z = float(z)
        if not math.isfinite(z):
            raise DomainError(f"bessel_i_row_scaled: non-finite argument {z!r}")
        arg = np.array(z)
    vals = bessel_i_scaled_array(arg, order_max).reshape(-1)
    vals.setflags(write=False)
    return BesselIRow(
        z=z,
        order_min=0,
        order_max=order_max,
        scaled_values=vals,
        scaling_exponent=abs(np.real(z)),
    )


@dataclass(frozen=True)
class LaguerreValue:
    degree: int
    superscript: int
    argument: float
    value: float


def _check_laguerre(n: int, s: int, x: float) -> None:
    if n < 0:
        raise DomainError(f"laguerre: degree must be >= 0, got {n}")
    if s < 0 and n + s < 0:
        raise DomainError(f"laguerre: need degree + superscript >= 0, got {n} + {s}")
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"laguerre: argument must be finite and >= 0, got {x}")


def laguerre_scaled(n: int, s: int, x: float) -> tuple[float, float]:
    """L_n^s(x) as ``(mantissa, log_scale)`` with value = mantissa * exp(log_scale).

    Forward three-term recurrence in the degree, rescaled on the fly so that
    large degrees (n ~ 1e4) neither overflow nor lose the value.
    """
    n, s, x = int(n), int(s), float(x)
    _check_laguerre(n, s, x)
    prev, cur = 1.0, 1.0 + s - x
    if n == 0:
        return 1.0, 0.0
    log_scale = 0.0
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + s - x) * cur - (m + s) * prev) / (m + 1)
        if abs(cur) > _BIG:
            prev *= _SMALL
            cur *= _SMALL
            log_scale -= math.log(_SMALL)
    return cur, log_scale


def laguerre_scaled_many(degrees, superscripts, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`laguerre_scaled` over paired degrees and superscripts.

    All recurrences run in lockstep up to the largest degree; each entry is
    captured when its own degree is reached.
    """
    n = np.asarray(degrees, dtype=int).reshape(-1)
    s = np.asarray(superscripts, dtype=float).reshape(-1)
    x = float(x)
    for ni, si in zip(n, s):
        _check_laguerre(int(ni), int(si), x)
    mant = np.ones(n.size)
    log_scale = np.zeros(n.size)
    if n.size == 0:
        return mant, log_scale
    prev = np.ones(n.size)
    cur = 1.0 + s - x
    mant = np.where(n == 1, cur, mant)
    for m in range(1, int(n.max())):
        prev, cur = cur, ((2 * m + 1 + s - x) * cur - (m + s) * prev) / (m + 1)
        big = np.abs(cur) > _BIG
        if np.any(big):
            prev = np.where(big, prev * _SMALL, prev)
            cur = np.where(big, cur * _SMALL, cur)
            log_scale = np.where(big & (n > m), log_scale - math.log(_SMALL), log_scale)
        done = n == m + 1
        mant = np.where(done, cur, mant)
    return mant, log_scale


def laguerre(degree: int, superscript: int, x: float) -> LaguerreValue:
    """Generalized Laguerre polynomial L_degree^superscript(x)."""
    mant, log_scale = laguerre_scaled(degree, superscript, x)
    value = mant * math.exp(log_scale) if log_scale else mant
    return LaguerreValue(int(degree), int(superscript), float(x), value)
