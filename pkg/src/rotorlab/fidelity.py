"""Rotor overlaps and atom fidelity via quasi-momentum averaging.

The atom fidelity is the squared modulus of the *beta-averaged complex
overlap*, not the average of per-rotor fidelities; the two differ whenever
the member phases disperse, and the former is bounded above by the latter.

Evolution is run for both kick strengths simultaneously, member-batched.
The momentum basis is sized per member from a pendulum/ballistic spreading
estimate and doubled-and-retried whenever the guard-band monitor trips, so a
run that starts at the default ``n_max`` still resolves resonant members
whose momentum support grows linearly with time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import UnderResolvedError
from .params import (N_GUARD, TAIL_TOL, CurveKind, FidelityCurve,
                     QuasiMomentumEnsemble, RotorParams)
from .propagator import floquet_step_batch, grid_size_for, kick_phases, kinetic_phases

# Largest basis the auto-escalation will try before giving up.
N_MAX_LIMIT = 4095

# Members per evolution batch; fixed so that reduction order (and hence the
# output bits) do not depend on available memory or threads.
CHUNK_SIZE = 512


@dataclass(frozen=True)
class OverlapSeries:
    """Complex overlaps ``<U_k1^t psi | U_k2^t psi>`` for one rotor.

    ``n_max_used`` records the basis halfwidth the evolution actually ran at
    (after any automatic escalation).
    """

    beta: float
    times: np.ndarray
    overlaps: np.ndarray
    n_max_used: int = 0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64)
        overlaps = np.asarray(self.overlaps, dtype=np.complex128)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "overlaps", overlaps)
        if times.shape != overlaps.shape:
            raise ValueError("times and overlaps must have equal length")
        if np.any(np.abs(overlaps) > 1.0 + 1e-10):
            raise ValueError("overlap moduli must not exceed 1")


@dataclass(frozen=True)
class EnsembleFidelityResult:
    """Atom fidelity of an ensemble plus per-run diagnostics."""

    times: np.ndarray
    mean_overlaps: np.ndarray       # complex mean over members, per kick count
    mean_rotor_fidelity: np.ndarray  # mean of |overlap|^2 over members
    n_max_used: int                  # largest basis any member needed

    def curve(self) -> FidelityCurve:
        return FidelityCurve(times=self.times,
                             values=np.abs(self.mean_overlaps) ** 2,
                             kind=CurveKind.NUMERIC)


def required_n_max(params: RotorParams, t_max: int, beta: float | None = None) -> int:
    """Estimate of the momentum support reached within ``t_max`` kicks.

    Away from resonance the pseudo-classical pendulum bounds the action
    excursion by ``|beta_bar| + sqrt(beta_bar^2 + 4*ktilde)``; at exact
    resonance the support grows like ``k * W_t`` with ``W_t`` capped by the
    inverse distance of beta from the resonant value. A fixed slack covers
    quantum tails; the guard-band monitor remains the authority.
    """
    if beta is None:
        beta = params.beta
    kmax = max(params.k1, params.k2, 1e-30)
    airy = lambda s: 4.0 * s ** (1.0 / 3.0)
    ballistic = kmax * t_max + airy(kmax * t_max)
    if params.epsilon == 0.0:
        s = abs(math.sin(math.pi * params.ell * (beta - 0.5)))
        w_cap = t_max if s < 1.0 / max(t_max, 1) else min(t_max, 1.0 / s)
        spread = kmax * w_cap + airy(max(kmax * w_cap, 1.0))
    else:
        bb = params.tau * ((beta % 1.0) - 0.5)
        ktil = abs(params.epsilon) * kmax
        pendulum = (abs(bb) + math.sqrt(bb * bb + 4.0 * ktil)) / abs(params.epsilon)
        spread = min(pendulum, ballistic)
    return int(math.ceil(spread)) + 64 + N_GUARD


def _escalation_ladder(n_start: int) -> list[int]:
    """Basis sizes to try: the requested one, then the largest n_max that
    fits each successive power-of-two grid (so the first escalation from the
    default 128 is free: 255 shares the 1024-point grid)."""
    ladder = [n_start]
    g = grid_size_for(n_start)
    while True:
        n = g // 4 - 1
        if n > ladder[-1]:
            ladder.append(n)
        if n >= N_MAX_LIMIT:
            break
        g *= 2
    return ladder


def _run_pair_chunk(params: RotorParams, betas: np.ndarray, n_max: int,
                    t_max: int, workers: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Evolve one member chunk under k1 and k2; stream overlaps per kick.

    Returns ``(overlaps[t_max+1, members], sum_sq[t_max+1])`` where sum_sq
    accumulates ``sum_m |overlap_m|^2``. Raises ``UnderResolvedError`` when
    any member's guard band exceeds the tolerance.
    """
    m = len(betas)
    width = 2 * n_max + 1
    grid = grid_size_for(n_max)
    kin = np.empty((m, width), dtype=np.complex128)
    for i, b in enumerate(betas):
        kin[i] = kinetic_phases(params.tau, b, n_max)
    kick1 = kick_phases(params.k1, grid)
    kick2 = kick_phases(params.k2, grid)

    c1 = np.zeros((m, width), dtype=np.complex128)
    c1[:, n_max] = 1.0
    c2 = c1.copy()
    buf = np.empty((m, grid), dtype=np.complex128)

    overlaps = np.empty((t_max + 1, m), dtype=np.complex128)
    overlaps[0] = 1.0
    for t in range(1, t_max + 1):
        c1, tail1, _ = floquet_step_batch(c1, kin, kick1, buf, workers=workers)
        c2, tail2, _ = floquet_step_batch(c2, kin, kick2, buf, workers=workers)
        worst = max(tail1.max(), tail2.max())
        if worst > TAIL_TOL:
            raise UnderResolvedError(
                f"guard-band population {worst:.3e} exceeds {TAIL_TOL:.0e} "
                f"at kick {t}, n_max={n_max}", kick=t, tail=float(worst), n_max=n_max)
        overlaps[t] = kernels.row_overlaps(c1, c2)
    sum_sq = (np.abs(overlaps) ** 2).sum(axis=1)
    return overlaps, sum_sq


def _run_members(params: RotorParams, betas: np.ndarray, n_start: int,
                 t_max: int, workers: int | None) -> tuple[np.ndarray, np.ndarray, int]:
    """Evolve members (already grouped to one basis class), escalating the
    basis whenever resolution fails. Returns (sum of complex overlaps per t,
    sum of |overlap|^2 per t, n_max actually used)."""
    last_err: UnderResolvedError | None = None
    for n_max in _escalation_ladder(n_start):
        try:
            ov_sum = np.zeros(t_max + 1, dtype=np.complex128)
            sq_sum = np.zeros(t_max + 1, dtype=np.float64)
            for lo in range(0, len(betas), CHUNK_SIZE):
                chunk = betas[lo: lo + CHUNK_SIZE]
                overlaps, sum_sq = _run_pair_chunk(params, chunk, n_max, t_max, workers)
                for t in range(t_max + 1):
                    ov_sum[t] += kernels.compensated_complex_sum(overlaps[t])
                sq_sum += sum_sq
            return ov_sum, sq_sum, n_max
        except UnderResolvedError as err:
            last_err = err
            continue
    raise UnderResolvedError(
        f"basis escalation exhausted at n_max={N_MAX_LIMIT}: {last_err}",
        n_max=N_MAX_LIMIT)


def rotor_overlap_series(params: RotorParams, n_max: int, t_max: int,
                         workers: int | None = None) -> OverlapSeries:
    """Evolve one rotor under both kick strengths; record the complex
    overlap after every kick (including the 0-kick value 1)."""
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    ladder = _escalation_ladder(n_max)
    req = min(required_n_max(params, t_max), N_MAX_LIMIT)
    first = min(int(np.searchsorted(ladder, req)), len(ladder) - 1)
    betas = np.array([params.beta])
    last_err: UnderResolvedError | None = None
    for n_try in ladder[first:]:
        try:
            overlaps, _ = _run_pair_chunk(params, betas, n_try, t_max, workers)
            return OverlapSeries(beta=params.beta,
                                 times=np.arange(t_max + 1),
                                 overlaps=overlaps[:, 0],
                                 n_max_used=n_try)
        except UnderResolvedError as err:
            last_err = err
            continue
    raise UnderResolvedError(
        f"basis escalation exhausted at n_max={N_MAX_LIMIT}: {last_err}",
        n_max=N_MAX_LIMIT)


def rotor_fidelity(series: OverlapSeries) -> FidelityCurve:
    """Squared overlap modulus of a single rotor."""
    return FidelityCurve(times=series.times,
                         values=np.abs(series.overlaps) ** 2,
                         kind=CurveKind.NUMERIC)


def ensemble_overlap_run(ensemble: QuasiMomentumEnsemble, params_template: RotorParams,
                         n_max: int, t_max: int,
                         workers: int | None = None) -> EnsembleFidelityResult:
    """Evolve every ensemble member and average the complex overlaps.

    Members are grouped into basis-size classes from the per-member spreading
    estimate and reduced in a fixed order (classes ascending, members in
    construction order within each class), so results are reproducible
    bit-for-bit for a given configuration.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    betas = ensemble.members
    ladder = _escalation_ladder(n_max)
    req = np.array([required_n_max(params_template, t_max, b) for b in betas])
    req = np.minimum(req, N_MAX_LIMIT)
    classes = np.searchsorted(ladder, req)
    classes = np.minimum(classes, len(ladder) - 1)

    total = np.zeros(t_max + 1, dtype=np.complex128)
    total_sq = np.zeros(t_max + 1, dtype=np.float64)
    n_used = 0
    for ci in range(len(ladder)):
        sel = betas[classes == ci]
        if sel.size == 0:
            continue
        ov_sum, sq_sum, n_got = _run_members(params_template, sel, ladder[ci],
                                             t_max, workers)
        total += ov_sum
        total_sq += sq_sum
        n_used = max(n_used, n_got)
    count = ensemble.count
    return EnsembleFidelityResult(
        times=np.arange(t_max + 1),
        mean_overlaps=total / count,
        mean_rotor_fidelity=total_sq / count,
        n_max_used=n_used,
    )


def atom_fidelity(ensemble: QuasiMomentumEnsemble, params_template: RotorParams,
                  n_max: int, t_max: int,
                  workers: int | None = None) -> FidelityCurve:
    """Atom fidelity ``|mean_beta <U_k1^t psi | U_k2^t psi>|^2``."""
    return ensemble_overlap_run(ensemble, params_template, n_max, t_max,
                                workers=workers).curve()
