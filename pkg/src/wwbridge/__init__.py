"""Fractional Wiener-Weierstrass bridges: exact covariances, simulation and path statistics."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .errors import (DomainError, EstimatorError, FitError, GridError, ModeError, NumericError,
                     ParameterError, ResourceError, WWBError)
from .fitting import LogLogFit, ScalingReport, fit_loglog
from .fraccalc import (hardy_littlewood_check, hls_sweep, make_homogeneous_family, ml_norm_sq,
                       rl_apply)
from .gaussian import (bridge_cov, helix_profile, increment_bilinear, increment_step_repr,
                       step_bilinear, ww_cov, ww_cov_matrix, ww_cov_truncated)
from .model import GridSpec, Kappa, ModelParams, Regime, derive_K, frac_index
from .paths import Ensemble, PathSample, make_ensemble, read_wwb1, synth_fgn, ww_path, write_wwb1
from .stats import (PhiSpec, argmax_distribution, box_dimension, modulus_profile, phi_variation,
                    pvar_badic, roughness_exponent, sample_restricted_pairs)
from .stepfunc import StepFunction

__all__ = [
    "BACKEND", "DomainError", "Ensemble", "EstimatorError", "FitError", "GridError", "GridSpec",
    "Kappa", "LogLogFit", "ModeError", "ModelParams", "NumericError", "ParameterError", "PathSample",
    "PhiSpec", "Regime", "ResourceError", "ScalingReport", "StepFunction", "WWBError",
    "argmax_distribution", "box_dimension", "bridge_cov", "derive_K", "fit_loglog", "frac_index",
    "hardy_littlewood_check", "helix_profile", "hls_sweep", "increment_bilinear",
    "increment_step_repr", "make_ensemble", "make_homogeneous_family", "ml_norm_sq",
    "modulus_profile", "phi_variation", "pvar_badic", "read_wwb1", "rl_apply", "roughness_exponent",
    "sample_restricted_pairs", "step_bilinear", "synth_fgn", "ww_cov", "ww_cov_matrix",
    "ww_cov_truncated", "ww_path", "write_wwb1",
]
