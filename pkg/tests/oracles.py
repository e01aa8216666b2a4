"""Independent reference implementations used only by the tests.

Nothing here imports the package under test.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy import integrate, linalg, special

mp.mp.dps = 40


def bessel_j_series(n: int, x: float) -> float:
    """sum_m (-1)^m (x/2)^(n+2m) / (m! (n+m)!) in 40-digit arithmetic."""
    sign = -1 if n < 0 and n % 2 else 1
    n = abs(n)
    x = mp.mpf(x)
    half = x / 2
    total = mp.mpf(0)
    m = 0
    while True:
        term = (-1) ** m * half ** (n + 2 * m) / (mp.factorial(m) * mp.factorial(n + m))
        total += term
        if m > 5 and abs(term) < mp.mpf(10) ** -35 * max(abs(total), mp.mpf(10) ** -300):
            break
        m += 1
    return sign * float(total)


def bessel_i_series(n: int, z) -> complex:
    """sum_m (z/2)^(n+2m) / (m! (n+m)!)."""
    n = abs(n)
    z = mp.mpc(z)
    half = z / 2
    total = mp.mpc(0)
    m = 0
    while True:
        term = half ** (n + 2 * m) / (mp.factorial(m) * mp.factorial(n + m))
        total += term
        if m > 5 and abs(term) < mp.mpf(10) ** -35 * max(abs(total), mp.mpf(10) ** -300):
            break
        m += 1
    return complex(total)


def scaled_i_series(n: int, z: float) -> float:
    return float(mp.exp(-mp.mpf(z)) * mp.mpf(bessel_i_series(n, z).real))


def laguerre_coefficients(n: int, s: int, x: float) -> float:
    """sum_m binom(n+s, n-m) (-x)^m / m!, exact rational arithmetic in mpmath."""
    x = mp.mpf(x)
    return float(sum(mp.binomial(n + s, n - m) * (-x) ** m / mp.factorial(m)
                     for m in range(n + 1)))


def displacement_column(sigma: complex, n0: int, size: int) -> np.ndarray:
    """Column n0 of exp(sigma a+ - sigma* a) on a truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, size)), 1)
    gen = sigma * a.conj().T - np.conj(sigma) * a
    return linalg.expm(gen)[:, n0]


def h_by_quad(family: str, t0: float, T1: float, t: float, omega: float = 2 * math.pi) -> complex:
    """omega^2 e^{i omega t} int_{t0}^{t} (t - s) f(s) e^{-i omega s} ds by adaptive quad.

    The double integral collapses to a single one by swapping the order.
    """
    if t <= t0:
        return 0.0j
    if family == "sin":
        f = lambda s: math.sin(math.pi * (s - t0) / T1)  # noqa: E731
    else:
        f = lambda s: math.sin(math.pi * (s - t0) / T1) ** 2  # noqa: E731
    upper = min(t, t0 + T1)
    g = lambda s: (t - s) * f(s)  # noqa: E731
    # QAWO handles the oscillatory weight exactly
    re = integrate.quad(g, t0, upper, weight="cos", wvar=omega, epsabs=1e-14, limit=200)[0]
    im = -integrate.quad(g, t0, upper, weight="sin", wvar=omega, epsabs=1e-14, limit=200)[0]
    return omega**2 * complex(math.cos(omega * t), math.sin(omega * t)) * complex(re, im)


def density_triple_loop(q: float, kappa: float, alpha: float, ks, n_max: int = 60) -> np.ndarray:
    """P_kl by explicit loops over scipy's ive / jv."""
    ks = list(ks)
    P = np.zeros((len(ks), len(ks)), dtype=complex)
    for i, k in enumerate(ks):
        for j, l in enumerate(ks):
            acc = 0.0
            for n in range(-n_max, n_max + 1):
                acc += special.ive(k - n, q) * special.jv(n, kappa) * special.jv(n - (k - l), kappa)
            P[i, j] = np.exp(-1j * (k - l) * alpha) * acc
    return P


def p_k_limits(q: float, kappa: float, ks):
    """(exp(-q) I_k(q), J_k(kappa)^2) from scipy."""
    ks = np.asarray(list(ks))
    return special.ive(ks, q), special.jv(ks, kappa) ** 2


def entropy_nats(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))
