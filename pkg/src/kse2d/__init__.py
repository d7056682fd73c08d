"""Pseudo-spectral 2D Kuramoto-Sivashinsky solver and regularity diagnostics."""

from .fields import Grid, SpectralField, VectorField, load_field, save_field
from .etdrk4 import DivergenceError, EtdCoefficients, precompute_coefficients, step
from .models import (ConfigError, ModelConfig, SimulationResult, SimulationState,
                     galerkin_truncate, initial_data, kkp_potential, linear_symbol,
                     random_potential, scalar_nonlinearity, simulate,
                     unstable_mode_count, vector_nonlinearity)
from .helmholtz import (DriftQuantities, HodgeDecomposition, drift_quantities,
                        fit_drift_rate, leray_project)
from .diagnostics import (DiagnosticsRecord, energy_record, lp_norm, sobolev_norm,
                          wmp_norm)
from .criteria import (CriterionSpec, criterion_check, criterion_integral,
                       THEOREM_IDS)
from .harness import RunConfig, parse_config, scaling_symmetry_test, validate

__all__ = [
    "Grid", "SpectralField", "VectorField", "load_field", "save_field",
    "DivergenceError", "EtdCoefficients", "precompute_coefficients", "step",
    "ConfigError", "ModelConfig", "SimulationResult", "SimulationState",
    "galerkin_truncate", "initial_data", "kkp_potential", "linear_symbol",
    "random_potential", "scalar_nonlinearity", "simulate", "unstable_mode_count",
    "vector_nonlinearity",
    "DriftQuantities", "HodgeDecomposition", "drift_quantities", "fit_drift_rate",
    "leray_project",
    "DiagnosticsRecord", "energy_record", "lp_norm", "sobolev_norm", "wmp_norm",
    "CriterionSpec", "criterion_check", "criterion_integral", "THEOREM_IDS",
    "RunConfig", "parse_config", "scaling_symmetry_test", "validate",
]

__version__ = "0.1.0"
