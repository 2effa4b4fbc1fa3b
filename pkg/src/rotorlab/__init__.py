"""Kicked-rotor fidelity near quantum resonance.

Exact Floquet numerics, quasi-momentum ensemble averaging, the
pseudo-classical map with its resonance islands, and the closed-form
revival laws, with a CLI that reproduces the standard experiments.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, NonIntegrableError, OutsideIslandError,
                     RotorlabError, UnderResolvedError, ValidityWarning)
from .fidelity import (EnsembleFidelityResult, OverlapSeries, atom_fidelity,
                       ensemble_overlap_run, required_n_max, rotor_fidelity,
                       rotor_overlap_series)
from .kernels import BACKEND
from .params import (DEFAULT_N_MAX, N_GUARD, TAIL_TOL, CurveKind,
                     DerivedQuantities, FidelityCurve, QuasiMomentumEnsemble,
                     RotorParams, RotorState, derived_quantities,
                     initial_state)
from .pcmap import (IslandGeometry, MapOrbit, MapState, MotionClass,
                    classify_motion, inverse_map_step, island_geometry,
                    iterate_grid, iterate_orbit, map_step, pendulum_energy)
from .propagator import PropagatorPlan, apply_floquet, evolve
from .theory import (HarmonicCoefficients, bessel_j0, exact_resonance_curve,
                     exact_resonance_fidelity, harmonic_coefficients,
                     harmonic_ensemble_curve, harmonic_ensemble_fidelity,
                     harmonic_resonant_curve, harmonic_resonant_fidelity,
                     pseudoclassical_curve, pseudoclassical_fidelity,
                     smooth_curve, smoothed_harmonic_ensemble,
                     smoothed_harmonic_resonant)

__all__ = [
    "BACKEND", "ConfigError", "CurveKind", "DEFAULT_N_MAX",
    "DerivedQuantities", "EnsembleFidelityResult", "FidelityCurve",
    "HarmonicCoefficients", "IslandGeometry", "MapOrbit", "MapState",
    "MotionClass", "N_GUARD", "NonIntegrableError", "OutsideIslandError",
    "OverlapSeries", "PropagatorPlan", "QuasiMomentumEnsemble", "RotorParams",
    "RotorState", "RotorlabError", "TAIL_TOL", "UnderResolvedError",
    "ValidityWarning", "apply_floquet", "atom_fidelity", "bessel_j0",
    "classify_motion", "derived_quantities", "ensemble_overlap_run", "evolve",
    "exact_resonance_curve", "exact_resonance_fidelity",
    "harmonic_coefficients", "harmonic_ensemble_curve",
    "harmonic_ensemble_fidelity", "harmonic_resonant_curve",
    "harmonic_resonant_fidelity", "initial_state", "inverse_map_step",
    "island_geometry", "iterate_grid", "iterate_orbit", "map_step",
    "pendulum_energy", "pseudoclassical_curve", "pseudoclassical_fidelity",
    "required_n_max", "rotor_fidelity", "rotor_overlap_series", "smooth_curve",
    "smoothed_harmonic_ensemble", "smoothed_harmonic_resonant",
]
