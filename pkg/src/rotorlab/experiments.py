"""Experiment driver: run configurations, execution, and flat-file output.

Each run writes ``<experiment>.csv`` (header row, 17 significant digits) and
``<experiment>.meta`` (``key = value`` lines echoing the full configuration
and every derived quantity) into the output directory. Identical
configurations produce bit-identical files: there is no randomness, and all
reductions happen in a fixed order.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .fidelity import ensemble_overlap_run, rotor_fidelity, rotor_overlap_series
from .kernels import BACKEND
from .params import (DEFAULT_N_MAX, CurveKind, FidelityCurve,
                     QuasiMomentumEnsemble, RotorParams, derived_quantities)
from .pcmap import island_geometry, iterate_grid
from .theory import (exact_resonance_fidelity, harmonic_ensemble_fidelity,
                     harmonic_resonant_fidelity, pseudoclassical_fidelity,
                     smooth_curve, smoothed_harmonic_ensemble,
                     smoothed_harmonic_resonant)

EXPERIMENTS = ("figure1", "figure2a", "figure2b", "exact_resonance",
               "map_portrait", "sweep")

SWEEP_FIELDS = ("epsilon", "k2", "beta")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run description.

    ``epsilon`` and ``tau`` are alternatives; exactly the non-default one
    given in a config file is honored (``tau`` wins if both appear).
    """

    experiment: str
    epsilon: float = 0.01
    tau: float | None = None
    ell: int = 1
    k1: float = 0.8 * math.pi
    k2: float = 0.6 * math.pi
    beta: float = 0.5
    center: float = 0.5
    halfwidth: float = 0.025
    count: int = 5000
    t_max: int = 650
    n_max: int = DEFAULT_N_MAX
    sigma_smooth: float = 6.0
    samples_per_kick: int = 32
    cap: float = 1.0
    threads: int = 0
    output_path: str = "."
    # map-portrait controls
    map_theta_count: int = 24
    map_action_count: int = 21
    map_action_min: float = -0.6
    map_action_max: float = 0.6
    # sweep controls
    sweep_field: str = "epsilon"
    sweep_start: float = 0.005
    sweep_stop: float = 0.02
    sweep_count: int = 4

    def params(self, beta: float | None = None) -> RotorParams:
        b = self.beta if beta is None else beta
        if self.tau is not None:
            return RotorParams.from_tau(self.tau, self.k1, self.k2, b, self.ell)
        return RotorParams.from_epsilon(self.epsilon, self.k1, self.k2, b, self.ell)

    def ensemble(self) -> QuasiMomentumEnsemble:
        return QuasiMomentumEnsemble.uniform(self.center, self.halfwidth, self.count)

    def resolved_threads(self) -> int | None:
        n = self.threads
        if n == 0:
            env = os.environ.get("ROTORLAB_THREADS", "").strip()
            n = int(env) if env else 0
        if n == 0:
            n = os.cpu_count() or 1
        return n if n > 1 else None


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_FIELDS = {"ell", "count", "t_max", "n_max", "samples_per_kick", "threads",
               "map_theta_count", "map_action_count", "sweep_count"}
_STR_FIELDS = {"experiment", "output_path", "sweep_field"}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, value: str):
    if key in _STR_FIELDS:
        return value
    try:
        if key in _INT_FIELDS:
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"field {key!r}: cannot parse {value!r}") from exc


def build_config(experiment: str, file_values: dict[str, str] | None = None,
                 overrides: dict | None = None) -> RunConfig:
    """Merge defaults, config-file values, and CLI overrides; validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"field 'experiment': unknown experiment {experiment!r}")
    values: dict = {"experiment": experiment}
    if experiment == "figure2b":
        values["halfwidth"] = 0.5
    if experiment == "exact_resonance":
        values["epsilon"] = 0.0
        values["t_max"] = 100
    if experiment == "map_portrait":
        values["t_max"] = 300
    known = set(_FIELD_TYPES)
    for key, raw_value in (file_values or {}).items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "experiment":
            if raw_value != experiment:
                raise ConfigError(
                    f"field 'experiment': config file says {raw_value!r} but "
                    f"{experiment!r} was requested")
            continue
        values[key] = _convert(key, raw_value)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    def fail(name: str, why: str):
        raise ConfigError(f"field {name!r}: {why}")

    if cfg.ell < 1:
        fail("ell", f"must be >= 1, got {cfg.ell}")
    if cfg.k1 < 0 or cfg.k2 < 0:
        fail("k1/k2", f"kick strengths must be >= 0, got {cfg.k1}, {cfg.k2}")
    if not 0.0 <= cfg.beta < 1.0:
        fail("beta", f"must lie in [0, 1), got {cfg.beta}")
    if not 0.0 <= cfg.center < 1.0:
        fail("center", f"must lie in [0, 1), got {cfg.center}")
    if not 0.0 <= cfg.halfwidth <= 0.5:
        fail("halfwidth", f"must lie in [0, 1/2], got {cfg.halfwidth}")
    if cfg.count < 1:
        fail("count", f"must be >= 1, got {cfg.count}")
    if cfg.t_max < 1:
        fail("t_max", f"must be >= 1, got {cfg.t_max}")
    if cfg.n_max < 1:
        fail("n_max", f"must be >= 1, got {cfg.n_max}")
    if cfg.sigma_smooth <= 0:
        fail("sigma_smooth", f"must be > 0, got {cfg.sigma_smooth}")
    if cfg.samples_per_kick < 1:
        fail("samples_per_kick", f"must be >= 1, got {cfg.samples_per_kick}")
    if cfg.cap <= 0:
        fail("cap", f"must be > 0, got {cfg.cap}")
    if cfg.threads < 0:
        fail("threads", f"must be >= 0, got {cfg.threads}")
    if cfg.experiment == "exact_resonance":
        p = cfg.params()
        if p.epsilon != 0.0:
            fail("tau", f"exact-resonance runs need tau = 2*pi*ell, got detuning {p.epsilon}")
    if cfg.experiment == "sweep" and cfg.sweep_field not in SWEEP_FIELDS:
        fail("sweep_field", f"must be one of {SWEEP_FIELDS}, got {cfg.sweep_field!r}")
    if cfg.experiment == "sweep" and cfg.sweep_count < 2:
        fail("sweep_count", f"must be >= 2, got {cfg.sweep_count}")
    if cfg.map_action_max <= cfg.map_action_min:
        fail("map_action_max", "must exceed map_action_min")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "none"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    rows = len(next(iter(columns.values())))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(col[i] if not np.isscalar(col) else col)
                              for col in (columns[n] for n in names)) + "\n")


def write_meta(path: Path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {_fmt(value)}\n")


def _base_metadata(cfg: RunConfig) -> dict:
    p = cfg.params()
    d = derived_quantities(p)
    meta: dict = {"experiment": cfg.experiment, "rotorlab_version": __version__,
                  "backend": BACKEND}
    for f in fields(RunConfig):
        meta[f.name] = getattr(cfg, f.name)
    meta["tau"] = p.tau
    meta["epsilon"] = p.epsilon
    meta.update(ktilde1=d.ktilde1, ktilde2=d.ktilde2, beta_bar=d.beta_bar,
                omega1=d.omega1, omega2=d.omega2, omega_plus=d.omega_plus,
                omega_minus=d.omega_minus, delta_k=d.delta_k,
                beat_period=d.beat_period,
                degenerate_beating=d.degenerate_beating)
    if p.epsilon != 0.0:
        for kick, label in ((1, "island1"), (2, "island2")):
            if p.kick_strength(kick) > 0:
                geo = island_geometry(p, kick=kick)
                meta[f"{label}_halfwidth_action"] = geo.halfwidth_action
                meta[f"{label}_halfwidth_beta"] = geo.halfwidth_beta
                meta[f"{label}_min_half_period"] = geo.min_half_period
    return meta


def _out_paths(cfg: RunConfig) -> tuple[Path, Path]:
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{cfg.experiment}.csv", out / f"{cfg.experiment}.meta"


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def run_figure1(cfg: RunConfig) -> list[Path]:
    """Single resonant rotor: numeric fidelity against the raw and smoothed
    resonant revival law."""
    p = cfg.params()
    series = rotor_overlap_series(p, cfg.n_max, cfg.t_max,
                                  workers=cfg.resolved_threads())
    numeric = rotor_fidelity(series)
    t = np.arange(1, cfg.t_max + 1)
    if p.delta_k == 0.0:
        raw = np.ones_like(t, dtype=float)
        smoothed = np.ones_like(t, dtype=float)
    else:
        raw = harmonic_resonant_fidelity(p, t)
        curve = smoothed_harmonic_resonant(p, cfg.t_max, cfg.sigma_smooth,
                                           cfg.samples_per_kick, cfg.cap)
        smoothed = _at_integer_times(curve, t)
    csv_path, meta_path = _out_paths(cfg)
    write_csv(csv_path, {
        "t": t,
        "F_numeric": numeric.values[1:],
        "F_res_raw": raw,
        "F_res_smoothed": smoothed,
    })
    meta = _base_metadata(cfg)
    meta["n_max_used"] = series.n_max_used
    write_meta(meta_path, meta)
    return [csv_path, meta_path]


def _at_integer_times(curve: FidelityCurve, t: np.ndarray) -> np.ndarray:
    return np.interp(t, curve.times, curve.values)


def run_figure2(cfg: RunConfig) -> list[Path]:
    """Quasi-momentum ensemble: numeric atom fidelity, with the ensemble
    revival law alongside when the ensemble fits inside the island."""
    p = cfg.params()
    result = ensemble_overlap_run(cfg.ensemble(), p, cfg.n_max, cfg.t_max,
                                  workers=cfg.resolved_threads())
    numeric = result.curve()
    t = np.arange(1, cfg.t_max + 1)
    columns: dict[str, np.ndarray] = {"t": t, "F_numeric_ensemble": numeric.values[1:]}
    meta = _base_metadata(cfg)
    validity_warned = False
    # analytic ensemble columns need a finite width inside the island; a
    # zero-width "ensemble" degenerates to the single-rotor run
    if cfg.experiment == "figure2a" and cfg.halfwidth > 0:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            raw = harmonic_ensemble_fidelity(p, cfg.halfwidth, t)
            curve = smoothed_harmonic_ensemble(p, cfg.halfwidth, cfg.t_max,
                                               cfg.sigma_smooth,
                                               cfg.samples_per_kick, cfg.cap)
        validity_warned = any(w.category.__name__ == "ValidityWarning" for w in caught)
        for w in caught:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
        columns["F_ens_raw"] = raw
        columns["F_ens_smoothed"] = _at_integer_times(curve, t)
    csv_path, meta_path = _out_paths(cfg)
    write_csv(csv_path, columns)
    meta["n_max_used"] = result.n_max_used
    meta["validity_warning_epsilon_vs_b2"] = validity_warned
    write_meta(meta_path, meta)
    return [csv_path, meta_path]


def run_exact_resonance(cfg: RunConfig) -> list[Path]:
    """Resonant kicking period: numeric fidelity against the exact law."""
    p = cfg.params()
    series = rotor_overlap_series(p, cfg.n_max, cfg.t_max,
                                  workers=cfg.resolved_threads())
    numeric = rotor_fidelity(series)
    t = np.arange(1, cfg.t_max + 1)
    analytic = exact_resonance_fidelity(p, t)
    csv_path, meta_path = _out_paths(cfg)
    write_csv(csv_path, {"t": t, "F_numeric": numeric.values[1:],
                         "F_exact_law": analytic})
    meta = _base_metadata(cfg)
    meta["n_max_used"] = series.n_max_used
    meta["max_abs_column_difference"] = float(np.abs(numeric.values[1:] - analytic).max())
    write_meta(meta_path, meta)
    return [csv_path, meta_path]


def run_map_portrait(cfg: RunConfig) -> list[Path]:
    """Phase portrait of the near-resonant map on a seed grid, plus the
    island geometry behind the ensemble-width choices."""
    p = cfg.params()
    thetas0 = 2.0 * math.pi * np.arange(cfg.map_theta_count) / cfg.map_theta_count
    actions0 = np.linspace(cfg.map_action_min, cfg.map_action_max,
                           cfg.map_action_count)
    th_seeds, ac_seeds = np.meshgrid(thetas0, actions0)
    th_seeds = th_seeds.ravel()
    ac_seeds = ac_seeds.ravel()
    thetas, actions = iterate_grid(th_seeds, ac_seeds, p, cfg.t_max, kick=1)
    orbit_ids = np.repeat(np.arange(len(th_seeds)), cfg.t_max + 1)
    steps = np.tile(np.arange(cfg.t_max + 1), len(th_seeds))
    csv_path, meta_path = _out_paths(cfg)
    write_csv(csv_path, {"orbit": orbit_ids, "step": steps,
                         "theta": thetas.ravel(), "action": actions.ravel()})
    meta = _base_metadata(cfg)
    geo = island_geometry(p, kick=1)
    meta.update(island_center_action=geo.center_action,
                island_halfwidth_action=geo.halfwidth_action,
                island_halfwidth_beta=geo.halfwidth_beta,
                island_libration_frequency=geo.libration_frequency_center,
                island_min_half_period=geo.min_half_period)
    write_meta(meta_path, meta)
    return [csv_path, meta_path]


def run_sweep(cfg: RunConfig) -> list[Path]:
    """Vary one parameter and summarize each run: derived scalars plus the
    worst short-time deviation of the numerics from the near-resonant law
    (over kicks below the minimal half libration period)."""
    values = np.linspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_count)
    rows: dict[str, list] = {cfg.sweep_field: [], "omega1": [], "omega2": [],
                             "beat_period": [], "min_half_period": [],
                             "t_short": [], "max_abs_dev_short_time": [],
                             "F_numeric_at_t_max": []}
    for value in values:
        cfg_i = replace(cfg, **{cfg.sweep_field: float(value)})
        p = cfg_i.params()
        d = derived_quantities(p)
        series = rotor_overlap_series(p, cfg.n_max, cfg.t_max,
                                      workers=cfg.resolved_threads())
        numeric = rotor_fidelity(series)
        if p.epsilon != 0.0 and max(p.ktilde1, p.ktilde2) > 0:
            half_period = math.pi / math.sqrt(max(p.ktilde1, p.ktilde2))
            t_short = max(1, min(cfg.t_max, int(half_period)))
            t = np.arange(1, t_short + 1)
            dev = float(np.abs(numeric.values[1:t_short + 1]
                               - pseudoclassical_fidelity(p, t)).max())
        else:
            half_period = math.inf
            t_short = 0
            dev = math.nan
        rows[cfg.sweep_field].append(float(value))
        rows["omega1"].append(d.omega1)
        rows["omega2"].append(d.omega2)
        rows["beat_period"].append(math.nan if d.beat_period is None else d.beat_period)
        rows["min_half_period"].append(half_period)
        rows["t_short"].append(t_short)
        rows["max_abs_dev_short_time"].append(dev)
        rows["F_numeric_at_t_max"].append(float(numeric.values[-1]))
    csv_path, meta_path = _out_paths(cfg)
    write_csv(csv_path, {k: np.asarray(v) for k, v in rows.items()})
    write_meta(meta_path, _base_metadata(cfg))
    return [csv_path, meta_path]


RUNNERS = {
    "figure1": run_figure1,
    "figure2a": run_figure2,
    "figure2b": run_figure2,
    "exact_resonance": run_exact_resonance,
    "map_portrait": run_map_portrait,
    "sweep": run_sweep,
}


def run(cfg: RunConfig) -> list[Path]:
    return RUNNERS[cfg.experiment](cfg)
