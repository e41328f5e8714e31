"""magnonlink: cavity-magnon microwave/optical converter toolkit.

Frequency-domain modeling of a microwave cavity strongly coupled to the
uniform-precession magnon mode of a ferromagnetic sphere, with the
surrounding laboratory workflow: spectrum fitting, microscopic parameter
derivation, shot-noise and receiver-chain calibration, detuning
optimization, and 2-D sweeps — all exposed through one CLI.

Conventions: angular frequencies (rad/s) everywhere inside the library;
ordinary frequencies (Hz), watts/dBm and metres at file, config and CLI
boundaries.
"""

from .calibration import (ChainCalibration, ShotNoiseResult, ShotNoiseRun,
                          TransferFunction, efficiency_from_powers,
                          extract_transfer_function, magnon_spectral_density,
                          predict_snr, snr_to_zeta, subtract_electronic_noise,
                          svv_spectrum)
from .config import (RunConfig, apply_overrides, config_hash, default_config,
                     load_config, schema_document, validate_config)
from .errors import (ConfigError, DataError, MagnonlinkError, NumericalError,
                     SingularInputError, ValidationError)
from .fitting import (FitResult, SpectrumTrace, TraceKind, find_dips,
                      fit_power_only, fit_s11_coil, fit_s11_hybrid, fit_s_lm,
                      initial_guess_s11, jacobian_fd, monte_carlo_recovery,
                      synthesize_trace)
from .io import (read_grid_csv, read_json, read_power_csv, read_trace_csv,
                 write_grid_csv, write_json, write_landscape_csv,
                 write_manifest, write_trace_csv)
from .microscopic import (collective_coupling, gamma_from_gilbert,
                          kittel_freq_from_current, kittel_shift,
                          predicted_coupling, single_spin_coupling,
                          verdet_to_G, zero_point_field, zeta_from_G)
from .model import (chi_c, chi_m, conversion_prefactor, cooperativity,
                    efficiency_detuned, efficiency_resonant,
                    normal_mode_frequencies, normal_mode_frequencies_lossy,
                    s11_coil, s11_hybrid, s21_cavity, s_lm, s_lm_minus,
                    s_lm_plus, s_ml_minus, s_ml_plus)
from .optimize import (EfficiencyLandscape, HessianKind, LineOptimum,
                       OptimumReport, efficiency_landscape, find_optimum,
                       optimum_along_fixed_offset, stationarity_residual)
from .params import (Detunings, FieldBias, MaterialGeometry,
                     OpticalDriveParams, SystemParams)
from .sweep import Quantity, SweepGrid, evaluate_quantity, run_sweep, sweep_map
from .units import (dbm_to_watts, parse_power, resolve_thread_count,
                    watts_to_dbm)

__version__ = "0.1.0"

__all__ = [
    "ChainCalibration", "ConfigError", "DataError", "Detunings",
    "EfficiencyLandscape", "FieldBias", "FitResult", "HessianKind",
    "LineOptimum", "MagnonlinkError", "MaterialGeometry", "NumericalError",
    "OpticalDriveParams", "OptimumReport", "Quantity", "RunConfig",
    "ShotNoiseResult", "ShotNoiseRun", "SingularInputError", "SpectrumTrace",
    "SweepGrid", "SystemParams", "TraceKind", "TransferFunction",
    "ValidationError", "apply_overrides", "chi_c", "chi_m",
    "collective_coupling", "config_hash", "conversion_prefactor",
    "cooperativity", "dbm_to_watts", "default_config", "efficiency_detuned",
    "efficiency_from_powers", "efficiency_landscape", "efficiency_resonant",
    "evaluate_quantity", "extract_transfer_function", "find_dips",
    "find_optimum", "fit_power_only", "fit_s11_coil", "fit_s11_hybrid",
    "fit_s_lm", "gamma_from_gilbert", "initial_guess_s11", "jacobian_fd",
    "kittel_freq_from_current", "kittel_shift", "load_config",
    "magnon_spectral_density", "monte_carlo_recovery",
    "normal_mode_frequencies", "normal_mode_frequencies_lossy",
    "optimum_along_fixed_offset", "parse_power", "predict_snr",
    "predicted_coupling", "read_grid_csv", "read_json", "read_power_csv",
    "read_trace_csv", "resolve_thread_count", "run_sweep", "s11_coil",
    "s11_hybrid", "s21_cavity", "s_lm", "s_lm_minus", "s_lm_plus",
    "s_ml_minus", "s_ml_plus", "schema_document", "single_spin_coupling",
    "snr_to_zeta", "stationarity_residual", "subtract_electronic_noise",
    "svv_spectrum", "sweep_map", "synthesize_trace", "validate_config",
    "verdet_to_G", "watts_to_dbm", "write_grid_csv", "write_json",
    "write_landscape_csv", "write_manifest", "write_trace_csv",
    "zero_point_field", "zeta_from_G",
]
