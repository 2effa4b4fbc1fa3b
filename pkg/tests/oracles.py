"""Independent oracles the tests check the package against.

Each oracle deliberately uses a different route than the implementation it
checks: the Bessel oracle is an arbitrary-precision power series (mpmath),
kick matrix elements come from direct quadrature, and the one-kick
propagator oracle is a dense Bessel-convolution matrix built from
scipy.special.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy.special import jv


def j0_series_oracle(x: float) -> float:
    """J0 by its power series, summed in arbitrary precision.

    Working precision grows with |x| to absorb the ~0.87*|x| digits lost to
    the alternating cancellation, so the rounded double is exact to 1 ulp.
    """
    x = abs(mp.mpf(float(x)))
    old = mp.mp.dps
    mp.mp.dps = 40 + int(float(x))
    try:
        q = x * x / 4
        total = mp.mpf(1)
        term = mp.mpf(1)
        m = 1
        while True:
            term = -term * q / (m * m)
            total += term
            if abs(term) < mp.mpf(10) ** (-(mp.mp.dps - 5)) * max(1, abs(total)):
                return float(total)
            m += 1
    finally:
        mp.mp.dps = old


def kick_amplitude_quadrature(n: int, k: float, points: int = 200_000) -> complex:
    """``<n| exp(-i k cos theta) |0>`` by periodic trapezoidal quadrature.

    The trapezoid rule is spectrally accurate for periodic integrands, so
    2e5 points leave errors far below 1e-14 for |k| of a few.
    """
    theta = 2.0 * np.pi * np.arange(points) / points
    integrand = np.exp(-1j * k * np.cos(theta)) * np.exp(-1j * n * theta)
    return complex(integrand.mean())


def kick_matrix(n_max: int, k: float) -> np.ndarray:
    """Dense one-kick operator ``<n| exp(-i k cos theta) |m>`` from the
    Jacobi-Anger expansion, using scipy's Bessel functions."""
    n = np.arange(-n_max, n_max + 1)
    diff = n[:, None] - n[None, :]
    return (-1j) ** diff * jv(diff, k)


def floquet_matrix(tau: float, beta: float, k: float, n_max: int) -> np.ndarray:
    """Dense one-period Floquet operator (kick matrix times kinetic phases)."""
    n = np.arange(-n_max, n_max + 1)
    kinetic = np.exp(-0.5j * tau * (n + beta % 1.0) ** 2)
    return kick_matrix(n_max, k) * kinetic[None, :]


def finite_difference_jacobian(step, point: tuple[float, float],
                               h: float = 1e-6) -> np.ndarray:
    """2x2 Jacobian of a map step (theta, action) -> (theta, action).

    Angle differences are wrapped so the finite difference is immune to the
    mod-2*pi seam.
    """
    def wrap(d):
        return (d + np.pi) % (2.0 * np.pi) - np.pi

    theta, action = point
    jac = np.empty((2, 2))
    for j, (dth, dac) in enumerate(((h, 0.0), (0.0, h))):
        plus = step(theta + dth, action + dac)
        minus = step(theta - dth, action - dac)
        jac[0, j] = wrap(plus[0] - minus[0]) / (2 * h)
        jac[1, j] = (plus[1] - minus[1]) / (2 * h)
    return jac
