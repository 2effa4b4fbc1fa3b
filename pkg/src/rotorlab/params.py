"""Core model: run parameters, quantum states, ensembles, and derived scalars.

Conventions used throughout the package:

* the rotor lives on a circle with angle ``theta``; momentum eigenstates
  ``|n>`` carry integer index ``n`` in ``[-n_max, n_max]``,
* the kicking period is ``tau = 2*pi*ell + epsilon`` with integer resonance
  order ``ell`` and detuning ``epsilon``,
* quasi-momentum ``beta`` lives in the unit Brillouin zone ``[0, 1)``,
* the rescaled quantities are ``ktilde_i = |epsilon| * k_i`` (kick strength
  in map units), ``beta_bar = tau * (beta - 1/2)`` (momentum offset of the
  pendulum), and ``omega_i = sqrt(ktilde_i)`` (libration frequency at the
  island center).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Basis-resolution defaults. The guard band is the outermost N_GUARD momentum
# states on each side; evolution is flagged under-resolved once they hold more
# than TAIL_TOL total probability.
DEFAULT_N_MAX = 128
N_GUARD = 16
TAIL_TOL = 1e-12

# Absolute slack allowed when validating state normalization at construction
# (a long evolution may legitimately accumulate ~1e-13/kick of norm drift).
NORM_TOL = 1e-9


@dataclass(frozen=True)
class RotorParams:
    """Physical and numerical parameters of a kicked-rotor fidelity run.

    ``tau`` and ``epsilon`` are stored redundantly; construct through
    :meth:`from_epsilon` or :meth:`from_tau` so that one is derived from the
    other and ``tau == 2*pi*ell + epsilon`` holds to rounding.
    """

    tau: float
    ell: int
    epsilon: float
    k1: float
    k2: float
    beta: float

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be a positive integer, got {self.ell}")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError(f"kick strengths must be >= 0, got k1={self.k1}, k2={self.k2}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        resid = self.tau - (TWO_PI * self.ell + self.epsilon)
        if abs(resid) > 16 * np.spacing(max(abs(self.tau), 1.0)):
            raise ValueError(
                f"tau inconsistent with 2*pi*ell + epsilon (residual {resid:.3e}); "
                "use RotorParams.from_epsilon or RotorParams.from_tau"
            )

    @classmethod
    def from_epsilon(cls, epsilon: float, k1: float, k2: float, beta: float,
                     ell: int = 1) -> "RotorParams":
        return cls(tau=TWO_PI * ell + epsilon, ell=ell, epsilon=epsilon,
                   k1=k1, k2=k2, beta=beta)

    @classmethod
    def from_tau(cls, tau: float, k1: float, k2: float, beta: float,
                 ell: int = 1) -> "RotorParams":
        return cls(tau=tau, ell=ell, epsilon=tau - TWO_PI * ell,
                   k1=k1, k2=k2, beta=beta)

    def with_beta(self, beta: float) -> "RotorParams":
        """Same run parameters for another ensemble member."""
        return RotorParams(tau=self.tau, ell=self.ell, epsilon=self.epsilon,
                           k1=self.k1, k2=self.k2, beta=beta)

    def kick_strength(self, kick: int) -> float:
        """Kick strength of evolution 1 or 2."""
        if kick == 1:
            return self.k1
        if kick == 2:
            return self.k2
        raise ValueError(f"kick selector must be 1 or 2, got {kick}")

    # -- derived scalars (pure functions of the fields) --

    @property
    def ktilde1(self) -> float:
        return abs(self.epsilon) * self.k1

    @property
    def ktilde2(self) -> float:
        return abs(self.epsilon) * self.k2

    def ktilde(self, kick: int) -> float:
        return abs(self.epsilon) * self.kick_strength(kick)

    @property
    def beta_bar(self) -> float:
        return self.tau * (self.beta - 0.5)

    @property
    def omega1(self) -> float:
        return math.sqrt(self.ktilde1)

    @property
    def omega2(self) -> float:
        return math.sqrt(self.ktilde2)

    @property
    def delta_k(self) -> float:
        return self.k2 - self.k1


@dataclass(frozen=True)
class DerivedQuantities:
    """All derived scalars of a parameter set in one record.

    ``beat_period`` is ``2*pi / |omega1 - omega2|``; it is ``None`` when the
    two libration frequencies coincide (degenerate beating, e.g. ``k1 == k2``
    or ``epsilon == 0``), in which case ``degenerate_beating`` is set.
    """

    ktilde1: float
    ktilde2: float
    beta_bar: float
    omega1: float
    omega2: float
    omega_plus: float
    omega_minus: float
    delta_k: float
    beat_period: float | None
    degenerate_beating: bool


def derived_quantities(params: RotorParams) -> DerivedQuantities:
    """Compute every derived scalar of ``params``.

    Swapping ``k1 <-> k2`` flips the signs of ``delta_k`` and ``omega_minus``
    and leaves everything else (including the beat period) unchanged.
    """
    w1, w2 = params.omega1, params.omega2
    degenerate = (w1 == w2)
    return DerivedQuantities(
        ktilde1=params.ktilde1,
        ktilde2=params.ktilde2,
        beta_bar=params.beta_bar,
        omega1=w1,
        omega2=w2,
        omega_plus=w1 + w2,
        omega_minus=w1 - w2,
        delta_k=params.delta_k,
        beat_period=None if degenerate else TWO_PI / abs(w1 - w2),
        degenerate_beating=degenerate,
    )


@dataclass(frozen=True)
class RotorState:
    """Complex amplitudes over the truncated momentum basis.

    ``amplitudes[i]`` is the coefficient of ``|n>`` with ``n = i - n_max``.
    ``under_resolved`` marks a state whose guard-band population exceeded
    ``TAIL_TOL`` during evolution.
    """

    n_max: int
    amplitudes: np.ndarray
    under_resolved: bool = False

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (2 * self.n_max + 1,):
            raise ValueError(
                f"amplitudes must have length 2*n_max+1 = {2*self.n_max+1}, "
                f"got shape {amps.shape}"
            )
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {self.norm():.15g}")

    def index_of(self, n: int) -> int:
        if abs(n) > self.n_max:
            raise IndexError(f"momentum {n} outside basis [-{self.n_max}, {self.n_max}]")
        return n + self.n_max

    def amplitude(self, n: int) -> complex:
        return complex(self.amplitudes[self.index_of(n)])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tail_population(self, n_guard: int = N_GUARD) -> float:
        """Total probability within ``n_guard`` states of the basis edge."""
        p = self.populations()
        return float(p[: n_guard].sum() + p[-n_guard:].sum())


def initial_state(n_max: int) -> RotorState:
    """The flat rotor wavefunction: a pure ``n = 0`` momentum state."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    amps = np.zeros(2 * n_max + 1, dtype=np.complex128)
    amps[n_max] = 1.0
    return RotorState(n_max=n_max, amplitudes=amps)


@dataclass(frozen=True)
class QuasiMomentumEnsemble:
    """Equidistant quasi-momentum samples on ``[center - b, center + b)``.

    The left endpoint is included and the right excluded; all members carry
    equal weight. Member values are stored as constructed and reduced mod 1
    only where they enter a propagator.
    """

    center: float
    halfwidth: float
    count: int
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        members = np.asarray(self.members, dtype=np.float64)
        object.__setattr__(self, "members", members)
        if not 0.0 <= self.center < 1.0:
            raise ValueError(f"center must lie in [0, 1), got {self.center}")
        if not 0.0 <= self.halfwidth <= 0.5:
            raise ValueError(f"halfwidth must lie in [0, 1/2], got {self.halfwidth}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if members.shape != (self.count,):
            raise ValueError("members length must equal count")

    @classmethod
    def uniform(cls, center: float, halfwidth: float, count: int) -> "QuasiMomentumEnsemble":
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        step = 2.0 * halfwidth / count
        members = center - halfwidth + step * np.arange(count)
        return cls(center=center, halfwidth=halfwidth, count=count, members=members)


class CurveKind(enum.Enum):
    NUMERIC = "numeric"
    ANALYTIC_EXACT_RESONANCE = "analytic_exact_resonance"
    ANALYTIC_PSEUDOCLASSICAL = "analytic_pseudoclassical"
    ANALYTIC_HARMONIC_ENSEMBLE = "analytic_harmonic_ensemble"
    ANALYTIC_HARMONIC_RESONANT = "analytic_harmonic_resonant"
    SMOOTHED = "smoothed"


@dataclass(frozen=True)
class FidelityCurve:
    """A fidelity time series ``t -> F(t)`` with a provenance label.

    Numeric curves are sampled at integer kick counts and bounded by 1;
    analytic curves may be sampled sub-kick and may exceed 1 (or be ``inf``)
    near singular times -- such values are recorded, never clamped.
    """

    times: np.ndarray
    values: np.ndarray
    kind: CurveKind

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if times.size >= 2 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.kind is CurveKind.NUMERIC:
            if not np.allclose(times, np.round(times)):
                raise ValueError("numeric curves are sampled at integer kick counts")
            if np.any(values < -1e-12) or np.any(values > 1.0 + 1e-9):
                raise ValueError("numeric fidelity values must lie in [0, 1 + 1e-9]")

    def value_at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise KeyError(f"time {t} not on the curve grid")
        return float(self.values[i])

    def spacing(self) -> float:
        """Grid spacing; raises unless the grid is uniform."""
        if self.times.size < 2:
            raise ValueError("need at least two samples")
        dt = np.diff(self.times)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
            raise ValueError("curve is not uniformly sampled")
        return float(dt[0])
