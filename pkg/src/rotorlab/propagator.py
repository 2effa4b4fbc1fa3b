"""One-period Floquet evolution of a rotor at fixed quasi-momentum.

A kick period applies ``exp(-i*k*cos(theta)) * exp(-i*tau*(N+beta)^2/2)``:
the kinetic factor is diagonal in the momentum basis, the kick factor is
diagonal on an angle grid, and an FFT pair moves between the two. The angle
grid is oversampled (next power of two above twice the basis size) so the
kick multiplication cannot alias back into the kept momentum window; what
leaks past the basis edge is truncated, and the guard-band monitor flags the
evolution as under-resolved before that truncation can bite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import UnderResolvedError
from .params import N_GUARD, TAIL_TOL, RotorParams, RotorState


def grid_size_for(n_max: int) -> int:
    """Smallest power of two >= 2*(2*n_max + 1)."""
    need = 2 * (2 * n_max + 1)
    g = 1
    while g < need:
        g *= 2
    return g


def kinetic_phases(tau: float, beta: float, n_max: int) -> np.ndarray:
    """``exp(-i*tau*(n+beta)^2/2)`` for n in [-n_max, n_max]; beta reduced mod 1."""
    n = np.arange(-n_max, n_max + 1, dtype=np.float64)
    return np.exp(-0.5j * tau * (n + (beta % 1.0)) ** 2)


def kick_phases(k: float, grid_size: int) -> np.ndarray:
    """``exp(-i*k*cos(theta_j))`` on the uniform angle grid."""
    theta = 2.0 * math.pi * np.arange(grid_size) / grid_size
    return np.exp(-1j * k * np.cos(theta))


@dataclass(frozen=True)
class PropagatorPlan:
    """Precomputed phase tables for one (beta, k) Floquet evolution."""

    params: RotorParams
    kick: int
    n_max: int
    grid_size: int
    kinetic_phases: np.ndarray
    kick_phases: np.ndarray

    def __post_init__(self):
        if self.grid_size < 2 * self.n_max + 1:
            raise ValueError(
                f"grid_size {self.grid_size} < 2*n_max+1 = {2*self.n_max+1}: "
                "kick multiplication would alias"
            )
        if self.kinetic_phases.shape != (2 * self.n_max + 1,):
            raise ValueError("kinetic_phases length must be 2*n_max+1")
        if self.kick_phases.shape != (self.grid_size,):
            raise ValueError("kick_phases length must equal grid_size")

    @classmethod
    def build(cls, params: RotorParams, kick: int = 2, n_max: int = 128,
              grid_size: int | None = None) -> "PropagatorPlan":
        if grid_size is None:
            grid_size = grid_size_for(n_max)
        return cls(
            params=params,
            kick=kick,
            n_max=n_max,
            grid_size=grid_size,
            kinetic_phases=kinetic_phases(params.tau, params.beta, n_max),
            kick_phases=kick_phases(params.kick_strength(kick), grid_size),
        )


def floquet_step_batch(amps: np.ndarray, kinetic: np.ndarray, kick: np.ndarray,
                       buf: np.ndarray, n_guard: int = N_GUARD,
                       workers: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance a batch of states by one kick period.

    ``amps`` has shape (members, 2*n_max+1), ``kinetic`` the same, ``kick``
    length grid_size, and ``buf`` shape (members, grid_size) is scratch.
    Returns ``(new_amps, tail, norm2)`` with per-member guard-band population
    and squared norm.
    """
    kernels.embed_kinetic(amps, kinetic, buf)
    psi = sfft.ifft(buf, axis=1, overwrite_x=True, workers=workers)
    kernels.multiply_rows(psi, kick)
    back = sfft.fft(psi, axis=1, overwrite_x=True, workers=workers)
    if back is not buf:
        buf[:] = back
    out = np.empty_like(amps)
    tail, norm2 = kernels.extract_state(buf, out, n_guard)
    return out, tail, norm2


def apply_floquet(state: RotorState, plan: PropagatorPlan) -> RotorState:
    """Apply one Floquet period; raises ``UnderResolvedError`` if the
    guard-band population exceeds the tolerance afterwards."""
    if state.n_max != plan.n_max:
        raise ValueError(f"state n_max {state.n_max} != plan n_max {plan.n_max}")
    amps = state.amplitudes[np.newaxis, :]
    buf = np.empty((1, plan.grid_size), dtype=np.complex128)
    out, tail, _ = floquet_step_batch(amps, plan.kinetic_phases[np.newaxis, :],
                                      plan.kick_phases, buf)
    if tail[0] > TAIL_TOL:
        raise UnderResolvedError(
            f"guard-band population {tail[0]:.3e} exceeds {TAIL_TOL:.0e} "
            f"at n_max={plan.n_max}", tail=float(tail[0]), n_max=plan.n_max)
    return RotorState(n_max=plan.n_max, amplitudes=out[0])


def evolve(state: RotorState, plan: PropagatorPlan, t: int) -> list[RotorState]:
    """States after 1..t kicks (empty for t = 0)."""
    if t < 0:
        raise ValueError(f"kick count must be >= 0, got {t}")
    trajectory = []
    current = state
    for _ in range(t):
        current = apply_floquet(current, plan)
        trajectory.append(current)
    return trajectory
