"""Hot inner loops with numba-jitted and pure-numpy implementations.

The FFTs that dominate the Floquet step are always done by ``scipy.fft``
(there is no jittable FFT); what lives here are the surrounding
memory-bound passes -- phase multiplication, embedding into the padded FFT
grid, extraction with tail/norm diagnostics, overlap reductions -- plus the
classical-map iteration, which is a genuinely sequential loop and the main
numba win.

Backend selection: the environment variable ``ROTORLAB_NUMBA`` chooses the
implementation at import time.

* unset or ``auto`` -- use numba if it imports, else fall back to numpy;
* ``1/on/true/numba``  -- require numba (ImportError if missing);
* ``0/off/false/numpy`` -- force the pure-numpy path.

Both implementations of every kernel are importable at all times (see
``IMPLEMENTATIONS``) so they can be benchmarked against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("ROTORLAB_NUMBA", "auto").strip().lower()

if _FLAG in {"0", "off", "false", "no", "numpy"}:
    _nb = None
elif _FLAG in {"1", "on", "true", "yes", "numba"}:
    import numba as _nb
else:
    try:
        import numba as _nb
    except ImportError:  # pragma: no cover - exercised only without numba
        _nb = None

BACKEND = "numba" if _nb is not None else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def embed_kinetic_numpy(amps: np.ndarray, kinetic: np.ndarray, buf: np.ndarray) -> None:
    """Multiply by kinetic phases and scatter into FFT-bin order.

    ``amps[m, i]`` holds the coefficient of momentum ``n = i - n_max``; bin
    ``n mod G`` of ``buf`` receives it. Bins outside the basis are zeroed.
    """
    m, width = amps.shape
    n_max = (width - 1) // 2
    grid = buf.shape[1]
    buf[:, n_max + 1: grid - n_max] = 0.0
    ck = amps * kinetic
    buf[:, : n_max + 1] = ck[:, n_max:]
    buf[:, grid - n_max:] = ck[:, :n_max]


def extract_state_numpy(buf: np.ndarray, out: np.ndarray,
                        n_guard: int) -> tuple[np.ndarray, np.ndarray]:
    """Gather basis bins back out of FFT order; return (tail, norm^2) per row."""
    width = out.shape[1]
    n_max = (width - 1) // 2
    grid = buf.shape[1]
    out[:, n_max:] = buf[:, : n_max + 1]
    out[:, :n_max] = buf[:, grid - n_max:]
    pop = np.abs(out) ** 2
    tail = pop[:, :n_guard].sum(axis=1) + pop[:, width - n_guard:].sum(axis=1)
    return tail, pop.sum(axis=1)


def multiply_rows_numpy(buf: np.ndarray, phases: np.ndarray) -> None:
    """In-place ``buf[m, :] *= phases``."""
    buf *= phases


def row_overlaps_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-row inner products ``<a_m|b_m>``."""
    return np.einsum("ij,ij->i", a.conj(), b)


def compensated_complex_sum_numpy(values: np.ndarray) -> complex:
    """Sum of complex values; numpy's pairwise reduction is already
    compensated enough for near-cancelling ensemble phases."""
    return complex(np.sum(values))


def map_orbit_numpy(theta0: np.ndarray, action0: np.ndarray, ktilde: float,
                    drift: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Iterate the kicked map ``theta += action + drift; action += ktilde*sin(theta)``.

    Returns arrays of shape ``(len(theta0), steps + 1)`` including the seed.
    The angle is reduced mod 2*pi after every step; the action update uses
    the already-updated angle.
    """
    p = theta0.shape[0]
    thetas = np.empty((p, steps + 1))
    actions = np.empty((p, steps + 1))
    thetas[:, 0] = np.mod(theta0, 2.0 * np.pi)
    actions[:, 0] = action0
    th = thetas[:, 0].copy()
    ac = action0.astype(np.float64).copy()
    for s in range(1, steps + 1):
        th = np.mod(th + ac + drift, 2.0 * np.pi)
        ac = ac + ktilde * np.sin(th)
        thetas[:, s] = th
        actions[:, s] = ac
    return thetas, actions


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _nb is not None:
    _njit = _nb.njit(cache=True, fastmath=False)

    @_njit
    def _embed_kinetic_nb(amps, kinetic, buf):  # pragma: no cover - jitted
        m, width = amps.shape
        n_max = (width - 1) // 2
        grid = buf.shape[1]
        for r in range(m):
            for j in range(n_max + 1, grid - n_max):
                buf[r, j] = 0.0
            for i in range(width):
                n = i - n_max
                j = n if n >= 0 else grid + n
                buf[r, j] = amps[r, i] * kinetic[r, i]

    @_njit
    def _extract_state_nb(buf, out, n_guard):  # pragma: no cover - jitted
        m, width = out.shape
        n_max = (width - 1) // 2
        grid = buf.shape[1]
        tail = np.empty(m)
        norm2 = np.empty(m)
        for r in range(m):
            tl = 0.0
            nr = 0.0
            for i in range(width):
                n = i - n_max
                j = n if n >= 0 else grid + n
                v = buf[r, j]
                out[r, i] = v
                p = v.real * v.real + v.imag * v.imag
                nr += p
                if i < n_guard or i >= width - n_guard:
                    tl += p
            tail[r] = tl
            norm2[r] = nr
        return tail, norm2

    @_njit
    def _multiply_rows_nb(buf, phases):  # pragma: no cover - jitted
        m, g = buf.shape
        for r in range(m):
            for j in range(g):
                buf[r, j] *= phases[j]

    @_njit
    def _row_overlaps_nb(a, b):  # pragma: no cover - jitted
        m, width = a.shape
        out = np.empty(m, dtype=np.complex128)
        for r in range(m):
            acc = 0.0 + 0.0j
            for i in range(width):
                acc += np.conj(a[r, i]) * b[r, i]
            out[r] = acc
        return out

    @_njit
    def _comp_sum_nb(values):  # pragma: no cover - jitted
        # Neumaier compensation, separately on real and imaginary parts.
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        for v in values:
            x = v.real
            t = sr + x
            if abs(sr) >= abs(x):
                cr += (sr - t) + x
            else:
                cr += (x - t) + sr
            sr = t
            y = v.imag
            u = si + y
            if abs(si) >= abs(y):
                ci += (si - u) + y
            else:
                ci += (y - u) + si
            si = u
        return complex(sr + cr, si + ci)

    @_njit
    def _map_orbit_nb(theta0, action0, ktilde, drift, steps):  # pragma: no cover
        p = theta0.shape[0]
        thetas = np.empty((p, steps + 1))
        actions = np.empty((p, steps + 1))
        two_pi = 2.0 * math.pi
        for r in range(p):
            th = theta0[r] % two_pi
            ac = action0[r]
            thetas[r, 0] = th
            actions[r, 0] = ac
            for s in range(1, steps + 1):
                th = (th + ac + drift) % two_pi
                ac = ac + ktilde * math.sin(th)
                thetas[r, s] = th
                actions[r, s] = ac
        return thetas, actions

    def embed_kinetic_numba(amps, kinetic, buf):
        _embed_kinetic_nb(amps, kinetic, buf)

    def extract_state_numba(buf, out, n_guard):
        return _extract_state_nb(buf, out, n_guard)

    def multiply_rows_numba(buf, phases):
        _multiply_rows_nb(buf, phases)

    def row_overlaps_numba(a, b):
        return _row_overlaps_nb(a, b)

    def compensated_complex_sum_numba(values):
        return _comp_sum_nb(np.ascontiguousarray(values))

    def map_orbit_numba(theta0, action0, ktilde, drift, steps):
        return _map_orbit_nb(np.ascontiguousarray(theta0, dtype=np.float64),
                             np.ascontiguousarray(action0, dtype=np.float64),
                             float(ktilde), float(drift), int(steps))


IMPLEMENTATIONS: dict[str, dict] = {
    "numpy": {
        "embed_kinetic": embed_kinetic_numpy,
        "extract_state": extract_state_numpy,
        "multiply_rows": multiply_rows_numpy,
        "row_overlaps": row_overlaps_numpy,
        "compensated_complex_sum": compensated_complex_sum_numpy,
        "map_orbit": map_orbit_numpy,
    }
}
if _nb is not None:
    IMPLEMENTATIONS["numba"] = {
        "embed_kinetic": embed_kinetic_numba,
        "extract_state": extract_state_numba,
        "multiply_rows": multiply_rows_numba,
        "row_overlaps": row_overlaps_numba,
        "compensated_complex_sum": compensated_complex_sum_numba,
        "map_orbit": map_orbit_numba,
    }

_active = IMPLEMENTATIONS[BACKEND]
embed_kinetic = _active["embed_kinetic"]
extract_state = _active["extract_state"]
multiply_rows = _active["multiply_rows"]
row_overlaps = _active["row_overlaps"]
compensated_complex_sum = _active["compensated_complex_sum"]
map_orbit = _active["map_orbit"]
