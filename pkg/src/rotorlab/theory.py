"""Closed-form fidelity laws and the Gaussian smoothing used for figures.

Implemented predictions (paper parameters ``k1 = 0.8*pi``, ``k2 = 0.6*pi``,
``epsilon = 0.01`` give beat period ``T = 2*pi/|omega1 - omega2| ~ 295.8``):

* exact resonance (``tau = 2*pi*ell``): ``F = J0^2(|W_t| * dk)`` with
  ``W_t = sin(pi*t*ell*(beta - 1/2)) / sin(pi*ell*(beta - 1/2))`` and the
  removable limit ``|W_t| -> t`` at resonant beta;
* short-time near resonance: ``F = J0^2(B)`` with
  ``B = 2*(dk/beta_bar) * sin(beta_bar*t/2)``, limit ``B -> dk*t``;
* harmonic ensemble law: ``F ~ eps^2*w1*w2 / (8*pi^2*b^2*D(t))`` with
  divisor ``D = |4*w1*w2 - (w1+w2)^2*cos((w1-w2)t) + (w1-w2)^2*cos((w1+w2)t)|``
  (equivalently ``eps^2 / (16*pi^2*b^2*|C*A - B^2|*|cos(w1 t)cos(w2 t)|)``
  through the tangent/secant coefficients below; note D(0) = 0),
  revivals spaced by the full beat period;
* resonant-rotor law: ``F ~ (eps/2pi) / |w2 cos(w1 t) sin(w2 t) -
  w1 cos(w2 t) sin(w1 t)|``, revivals spaced by half the beat period.

The two revival laws have singular times where the divisor crosses zero.
``1/|divisor|`` is not integrable across a simple zero, so curves destined
for smoothing are sampled with the fidelity capped (default at 1, the
physical bound; the laws are only asymptotic where the divisor is small) and
the smoother cross-checks a refined sampling to confirm convergence.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from .errors import NonIntegrableError, OutsideIslandError, ValidityWarning
from .params import CurveKind, FidelityCurve, RotorParams
from .pcmap import island_geometry

TWO_PI = 2.0 * math.pi

# Series/asymptotic crossover for J0. Below it the power series is summed in
# double-double arithmetic (plain double loses ~5 digits to cancellation by
# x = 18); above it the Hankel expansion truncated at its smallest term is
# already at the e^(-2x) < 3e-16 level.
_J0_SERIES_RADIUS = 18.0
_J0_SERIES_TERMS = 90
_J0_HANKEL_TERMS = 18

# Divisor magnitudes below this are tagged singular (value +inf).
SINGULAR_DIVISOR = 1e-9

# Arguments below this switch removable-singularity formulas to their series
# branch to avoid 0/0 precision loss.
_LIMIT_BRANCH = 1e-6


# ---------------------------------------------------------------------------
# Bessel J0: double-double power series plus Hankel asymptotics
# ---------------------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a  # 2^27 + 1, Dekker splitting
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return _two_sum(p, e)


def _dd_div_scalar(xh, xl, s):
    q1 = xh / s
    p, e = _two_prod(q1, s)
    q2 = (((xh - p) - e) + xl) / s
    return _two_sum(q1, q2)


def _j0_series(x: np.ndarray) -> np.ndarray:
    # sum_m (-1)^m (x^2/4)^m / (m!)^2 with the term recurrence carried in
    # double-double so the alternating cancellation keeps ~30 digits.
    qh, ql = _two_prod(x, x)
    qh, ql = _dd_div_scalar(qh, ql, 4.0)
    sh = np.ones_like(x)
    sl = np.zeros_like(x)
    th = np.ones_like(x)
    tl = np.zeros_like(x)
    for m in range(1, _J0_SERIES_TERMS + 1):
        th, tl = _dd_mul(th, tl, qh, ql)
        th, tl = _dd_div_scalar(th, tl, float(m * m))
        th, tl = -th, -tl
        s, e = _two_sum(sh, th)
        sh, sl = _two_sum(s, e + (sl + tl))
        if np.all(np.abs(th) <= 1e-36 * np.abs(sh) + 1e-300):
            break
    return sh + sl


def _j0_hankel(x: np.ndarray) -> np.ndarray:
    # J0 ~ sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)], with
    # P = 1 - u2 + u4 - ..., Q = -u1 + u3 - ..., u_m = u_{m-1} (2m-1)^2/(8mx).
    # The shifted trig pair is formed as (cos x +- sin x)/sqrt(2) so no
    # precision is lost subtracting pi/4 from a large argument.
    inv8x = 1.0 / (8.0 * x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for m in range(1, _J0_HANKEL_TERMS + 1):
        term = term * ((2 * m - 1) ** 2 / m) * inv8x
        if m % 2 == 1:
            q += term * (-1.0) ** ((m + 1) // 2)
        else:
            p += term * (-1.0) ** (m // 2)
    c, s = np.cos(x), np.sin(x)
    cos_chi = (c + s) / math.sqrt(2.0)
    sin_chi = (s - c) / math.sqrt(2.0)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def bessel_j0(x):
    """Bessel function of the first kind, order zero.

    Accurate to ~1e-15 absolute (power series below |x| = 18, Hankel
    expansion beyond); accepts scalars or arrays.
    """
    arr = np.abs(np.asarray(x, dtype=np.float64))
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = arr <= _J0_SERIES_RADIUS
    if small.any():
        out[small] = _j0_series(arr[small])
    if (~small).any():
        out[~small] = _j0_hankel(arr[~small])
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# closed-form fidelity laws
# ---------------------------------------------------------------------------

def exact_resonance_fidelity(params: RotorParams, t):
    """``J0^2(|W_t| dk)`` at exact resonance; vectorized over ``t``.

    At resonant beta (where ``sin(pi*ell*(beta-1/2))`` vanishes) the
    removable limit ``|W_t| = t`` is used.
    """
    if params.epsilon != 0.0:
        raise ValueError("exact-resonance law requires tau = 2*pi*ell (epsilon = 0)")
    t = np.asarray(t, dtype=np.float64)
    x = math.pi * params.ell * (params.beta - 0.5)
    # distance of x from the nearest multiple of pi, where csc blows up
    r = x - math.pi * round(x / math.pi)
    if abs(r) < _LIMIT_BRANCH:
        w = t * (1.0 - (t * t - 1.0) * r * r / 6.0)
    else:
        w = np.sin(t * x) / math.sin(x)
    val = bessel_j0(np.abs(w) * abs(params.delta_k)) ** 2
    return float(val) if np.ndim(t) == 0 else val


def pseudoclassical_fidelity(params: RotorParams, t):
    """Short-time near-resonant law ``J0^2(B)``; vectorized over ``t``.

    ``B = 2 (dk/beta_bar) sin(beta_bar t / 2)`` with the ``beta_bar -> 0``
    limit ``B = dk * t``, which reproduces the exact-resonance law at
    resonant beta.
    """
    if params.epsilon == 0.0:
        raise ValueError("pseudo-classical law requires a nonzero detuning")
    t = np.asarray(t, dtype=np.float64)
    bb = params.beta_bar
    if abs(bb) < _LIMIT_BRANCH:
        b_arg = params.delta_k * t * (1.0 - (bb * t) ** 2 / 24.0)
    else:
        b_arg = 2.0 * (params.delta_k / bb) * np.sin(0.5 * bb * t)
    val = bessel_j0(b_arg) ** 2
    return float(val) if np.ndim(t) == 0 else val


class HarmonicCoefficients:
    """The tangent/secant coefficients of the harmonic-oscillator overlap.

    ``a = w2 tan(w2 t) - w1 tan(w1 t)``, ``b = sec(w2 t) - sec(w1 t)``,
    ``c = tan(w2 t)/w2 - tan(w1 t)/w1``; all vanish at t = 0. ``singular``
    marks times where either cosine vanishes and the values are unusable.
    """

    __slots__ = ("a", "b", "c", "singular")

    def __init__(self, a: float, b: float, c: float, singular: bool):
        self.a = a
        self.b = b
        self.c = c
        self.singular = singular

    def __repr__(self):
        return (f"HarmonicCoefficients(a={self.a!r}, b={self.b!r}, c={self.c!r}, "
                f"singular={self.singular!r})")


def harmonic_coefficients(params: RotorParams, t: float) -> HarmonicCoefficients:
    w1, w2 = params.omega1, params.omega2
    c1, c2 = math.cos(w1 * t), math.cos(w2 * t)
    if min(abs(c1), abs(c2)) < 1e-12:
        return HarmonicCoefficients(math.inf, math.inf, math.inf, singular=True)
    t1, t2 = math.tan(w1 * t), math.tan(w2 * t)
    return HarmonicCoefficients(
        a=w2 * t2 - w1 * t1,
        b=1.0 / c2 - 1.0 / c1,
        c=(t2 / w2 if w2 > 0 else math.inf) - (t1 / w1 if w1 > 0 else math.inf),
        singular=False,
    )


def _ensemble_divisor(params: RotorParams, t: np.ndarray) -> np.ndarray:
    w1, w2 = params.omega1, params.omega2
    wp, wm = w1 + w2, w1 - w2
    return np.abs(4.0 * w1 * w2 - wp * wp * np.cos(wm * t) + wm * wm * np.cos(wp * t))


def harmonic_ensemble_fidelity(params: RotorParams, b: float, t):
    """Ensemble revival law; vectorized over ``t``. Singular samples (divisor
    below ``SINGULAR_DIVISOR``) come back as ``+inf`` and are the caller's to
    regularize. Warns when ``epsilon > b^2`` (outside the asymptotic regime)
    and refuses ensembles wider than the resonance island.
    """
    if params.epsilon == 0.0:
        raise ValueError("ensemble revival law requires a nonzero detuning")
    if b <= 0.0:
        raise ValueError(f"ensemble halfwidth must be > 0, got {b}")
    narrow_kick = 2 if params.ktilde2 <= params.ktilde1 else 1
    island = island_geometry(params, kick=narrow_kick)
    if b > island.halfwidth_beta:
        raise OutsideIslandError(
            f"ensemble halfwidth {b} exceeds island halfwidth "
            f"{island.halfwidth_beta:.4f}; harmonic approximation invalid")
    if abs(params.epsilon) > b * b:
        warnings.warn(
            f"epsilon = {params.epsilon} is not small compared to b^2 = {b*b:.2e}; "
            "the ensemble revival law is outside its asymptotic regime",
            ValidityWarning, stacklevel=2)
    t = np.asarray(t, dtype=np.float64)
    if params.delta_k == 0.0:
        val = np.ones_like(t)
        return float(val) if np.ndim(t) == 0 else val
    d = _ensemble_divisor(params, t)
    num = params.epsilon ** 2 * params.omega1 * params.omega2
    with np.errstate(divide="ignore"):
        val = np.where(d < SINGULAR_DIVISOR, np.inf,
                       num / (8.0 * math.pi ** 2 * b * b * d))
    return float(val) if np.ndim(t) == 0 else val


def _resonant_divisor(params: RotorParams, t: np.ndarray) -> np.ndarray:
    w1, w2 = params.omega1, params.omega2
    return np.abs(w2 * np.cos(w1 * t) * np.sin(w2 * t)
                  - w1 * np.cos(w2 * t) * np.sin(w1 * t))


def harmonic_resonant_fidelity(params: RotorParams, t):
    """Resonant-rotor revival law; vectorized over ``t``. Singular samples
    come back as ``+inf``; identical kicks short-circuit to F = 1."""
    if params.epsilon == 0.0:
        raise ValueError("resonant revival law requires a nonzero detuning")
    t = np.asarray(t, dtype=np.float64)
    if params.delta_k == 0.0:
        val = np.ones_like(t)
        return float(val) if np.ndim(t) == 0 else val
    d = _resonant_divisor(params, t)
    with np.errstate(divide="ignore"):
        val = np.where(d < SINGULAR_DIVISOR, np.inf,
                       (abs(params.epsilon) / TWO_PI) / d)
    return float(val) if np.ndim(t) == 0 else val


# ---------------------------------------------------------------------------
# curve sampling and smoothing
# ---------------------------------------------------------------------------

def exact_resonance_curve(params: RotorParams, t_max: int) -> FidelityCurve:
    t = np.arange(t_max + 1)
    return FidelityCurve(times=t, values=exact_resonance_fidelity(params, t),
                         kind=CurveKind.ANALYTIC_EXACT_RESONANCE)


def pseudoclassical_curve(params: RotorParams, t_max: int) -> FidelityCurve:
    t = np.arange(t_max + 1)
    return FidelityCurve(times=t, values=pseudoclassical_fidelity(params, t),
                         kind=CurveKind.ANALYTIC_PSEUDOCLASSICAL)


def _fine_times(t_max: int, samples_per_kick: int) -> np.ndarray:
    n = (t_max - 1) * samples_per_kick
    return 1.0 + np.arange(n + 1) / samples_per_kick


def harmonic_resonant_curve(params: RotorParams, t_max: int,
                            samples_per_kick: int = 32,
                            cap: float | None = None) -> FidelityCurve:
    """Resonant revival law on a sub-kick grid starting at t = 1.

    With ``cap`` set, values are clipped there — the law is only asymptotic
    where its divisor is small, and capping makes the singular spikes
    integrable for the smoothing stage. Without it, singular samples stay
    ``inf`` (recorded, not clamped).
    """
    t = _fine_times(t_max, samples_per_kick)
    v = harmonic_resonant_fidelity(params, t)
    if cap is not None:
        v = np.minimum(v, cap)
    return FidelityCurve(times=t, values=v, kind=CurveKind.ANALYTIC_HARMONIC_RESONANT)


def harmonic_ensemble_curve(params: RotorParams, b: float, t_max: int,
                            samples_per_kick: int = 32,
                            cap: float | None = None) -> FidelityCurve:
    """Ensemble revival law on a sub-kick grid starting at t = 1."""
    t = _fine_times(t_max, samples_per_kick)
    v = harmonic_ensemble_fidelity(params, b, t)
    if cap is not None:
        v = np.minimum(v, cap)
    return FidelityCurve(times=t, values=v, kind=CurveKind.ANALYTIC_HARMONIC_ENSEMBLE)


def smooth_curve(curve: FidelityCurve, sigma: float) -> FidelityCurve:
    """Convolve with a unit-area Gaussian of standard deviation ``sigma``
    kicks. Requires a uniform grid and finite samples; kernel mass falling
    off the ends is renormalized so constants stay constant."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not np.all(np.isfinite(curve.values)):
        raise NonIntegrableError(
            "curve contains singular (non-finite) samples; 1/|divisor| is not "
            "integrable across a zero -- sample with a cap before smoothing")
    dt = curve.spacing()
    half = int(math.ceil(5.0 * sigma / dt))
    x = np.arange(-half, half + 1) * dt
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    kernel /= kernel.sum()
    # slice the centre of the full convolution by hand: numpy's mode="same"
    # returns the kernel's length when the kernel is longer than the signal
    m = curve.values.size
    smoothed = np.convolve(curve.values, kernel)[half: half + m]
    coverage = np.convolve(np.ones(m), kernel)[half: half + m]
    return FidelityCurve(times=curve.times, values=smoothed / coverage,
                         kind=CurveKind.SMOOTHED)


def smooth_with_refinement(builder: Callable[[int], FidelityCurve], sigma: float,
                           samples_per_kick: int = 32,
                           tol: float = 1e-2) -> FidelityCurve:
    """Smooth ``builder(samples_per_kick)`` and verify against a doubled
    sampling rate; raises ``NonIntegrableError`` if the two disagree (which
    indicates an unregularized singularity)."""
    coarse = smooth_curve(builder(samples_per_kick), sigma)
    fine = smooth_curve(builder(2 * samples_per_kick), sigma)
    on_coarse = np.interp(coarse.times, fine.times, fine.values)
    drift = float(np.max(np.abs(coarse.values - on_coarse)))
    if drift > tol:
        raise NonIntegrableError(
            f"smoothed curve moved by {drift:.3e} under grid refinement "
            f"(tolerance {tol:.0e}); singularity handling did not converge")
    return coarse


def smoothed_harmonic_resonant(params: RotorParams, t_max: int, sigma: float,
                               samples_per_kick: int = 32,
                               cap: float = 1.0) -> FidelityCurve:
    """Capped, sampled, smoothed, and refinement-checked resonant revival law."""
    return smooth_with_refinement(
        lambda spk: harmonic_resonant_curve(params, t_max, spk, cap=cap),
        sigma, samples_per_kick)


def smoothed_harmonic_ensemble(params: RotorParams, b: float, t_max: int,
                               sigma: float, samples_per_kick: int = 32,
                               cap: float = 1.0) -> FidelityCurve:
    """Capped, sampled, smoothed, and refinement-checked ensemble revival law."""
    return smooth_with_refinement(
        lambda spk: harmonic_ensemble_curve(params, b, t_max, spk, cap=cap),
        sigma, samples_per_kick)
