"""The near-resonant classical map, its islands, and motion classification.

One map step advances the angle with the *old* action, then kicks the action
with the *updated* angle:

    theta' = theta + I + pi*ell + tau*beta   (mod 2*pi)
    I'     = I + ktilde * sin(theta')

The map is area preserving and is the kicked discretization of a pendulum
with Hamiltonian ``H = (I + beta_bar)^2 / 2 + ktilde * cos(theta)``; its
stable islands sit at ``I_res = (2m + ell)*pi - tau*beta`` with separatrix
halfwidth ``2*sqrt(ktilde)`` in action.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import RotorParams

TWO_PI = 2.0 * math.pi

# Relative half-thickness of the energy band treated as "on the separatrix".
SEPARATRIX_TOL = 0.02


@dataclass(frozen=True)
class MapState:
    """A phase-space point (angle, action); the angle is stored mod 2*pi."""

    theta: float
    action: float

    def __post_init__(self):
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class MapOrbit:
    """A sequence of map iterates, seed included."""

    thetas: np.ndarray
    actions: np.ndarray

    def __len__(self) -> int:
        return len(self.thetas)

    def state(self, i: int) -> MapState:
        return MapState(theta=float(self.thetas[i]), action=float(self.actions[i]))


@dataclass(frozen=True)
class IslandGeometry:
    """Geometry of one resonance island."""

    center_action: float
    halfwidth_action: float
    halfwidth_beta: float
    libration_frequency_center: float
    min_half_period: float


class MotionClass(enum.Enum):
    LIBRATIONAL = "librational"
    ROTATIONAL = "rotational"
    NEAR_SEPARATRIX = "near_separatrix"


def _drift(params: RotorParams) -> float:
    return math.pi * params.ell + params.tau * params.beta


def map_step(s: MapState, params: RotorParams, kick: int = 1) -> MapState:
    """One forward iteration (angle first, then action with the new angle)."""
    theta = (s.theta + s.action + _drift(params)) % TWO_PI
    action = s.action + params.ktilde(kick) * math.sin(theta)
    return MapState(theta=theta, action=action)


def inverse_map_step(s: MapState, params: RotorParams, kick: int = 1) -> MapState:
    """Exact inverse: undo the action kick first, then the angle advance."""
    action = s.action - params.ktilde(kick) * math.sin(s.theta)
    theta = (s.theta - action - _drift(params)) % TWO_PI
    return MapState(theta=theta, action=action)


def iterate_orbit(s0: MapState, params: RotorParams, t: int, kick: int = 1) -> MapOrbit:
    """t forward steps from s0; the orbit includes the seed (t+1 points)."""
    if t < 0:
        raise ValueError(f"step count must be >= 0, got {t}")
    thetas, actions = kernels.map_orbit(
        np.array([s0.theta]), np.array([s0.action]),
        params.ktilde(kick), _drift(params), t)
    return MapOrbit(thetas=thetas[0], actions=actions[0])


def iterate_grid(theta0: np.ndarray, action0: np.ndarray, params: RotorParams,
                 t: int, kick: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Iterate many seeds at once; returns (thetas, actions) of shape
    ``(len(seeds), t+1)``. Used for phase portraits."""
    if t < 0:
        raise ValueError(f"step count must be >= 0, got {t}")
    return kernels.map_orbit(np.asarray(theta0, float), np.asarray(action0, float),
                             params.ktilde(kick), _drift(params), t)


def pendulum_energy(s: MapState, params: RotorParams, kick: int = 1) -> float:
    """``(I + beta_bar)^2 / 2 + ktilde cos(theta)``; the separatrix sits at
    energy ``+ktilde`` and the island center at ``-ktilde``."""
    p = s.action + params.beta_bar
    return 0.5 * p * p + params.ktilde(kick) * math.cos(s.theta)


def island_geometry(params: RotorParams, m: int | None = None,
                    kick: int = 1) -> IslandGeometry:
    """Center and width of the resonance island with index ``m``.

    By default ``m`` picks the island nearest action 0, the one an initially
    stationary rotor sits astride.
    """
    if params.epsilon == 0.0:
        raise ValueError("island geometry requires a nonzero detuning")
    ktil = params.ktilde(kick)
    if m is None:
        # choose m minimizing |(2m + ell)*pi - tau*beta|
        m = round((params.tau * params.beta / math.pi - params.ell) / 2.0)
    center = (2 * m + params.ell) * math.pi - params.tau * params.beta
    halfwidth = 2.0 * math.sqrt(ktil)
    omega = math.sqrt(ktil)
    return IslandGeometry(
        center_action=center,
        halfwidth_action=halfwidth,
        halfwidth_beta=halfwidth / params.tau,
        libration_frequency_center=omega,
        min_half_period=math.pi / omega if omega > 0 else math.inf,
    )


def classify_motion(s0: MapState, params: RotorParams, kick: int = 1,
                    sep_tol: float = SEPARATRIX_TOL) -> MotionClass:
    """Librational inside the island, rotational outside, with a small
    energy band around the separatrix reported as near-separatrix."""
    ktil = params.ktilde(kick)
    if ktil == 0.0:
        return MotionClass.ROTATIONAL
    energy = pendulum_energy(s0, params, kick)
    if abs(energy - ktil) < sep_tol * ktil:
        return MotionClass.NEAR_SEPARATRIX
    return MotionClass.LIBRATIONAL if energy < ktil else MotionClass.ROTATIONAL
