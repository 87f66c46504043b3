"""Numerical laboratory for the Riesz transforms of the inverse-Gaussian
Laplacian: log-domain kernel evaluation, Hermite spectral calculus, singular
quadrature, and weak-type (1,1) probes."""

from rieszlab.logscaled import LogScaled, log_sum
from rieszlab.geometry import (
    MultiIndex,
    PolarDecomposition,
    decompose,
    identity_residuals,
)
from rieszlab.quadrature import NonConvergenceError, QuadratureConfig, integrate01
from rieszlab.hermite import gamma_h, gauss_density, h_normalized, inv_gauss_density
from rieszlab.kernels import (
    KernelValue,
    heat_kernel,
    frac_power_kernel,
    riesz_kernel,
    riesz_kernel_batch,
)
from rieszlab.spectral import (
    SpectralCoefficients,
    analyze,
    apply_frac_power,
    apply_riesz_spectral,
    l2_norm_bound,
    orthonormality_defect,
    synthesize,
)
from rieszlab.apply import (
    GridFunction,
    PVConfig,
    apply_glob,
    apply_loc,
    apply_riesz,
    ball_indicator,
)
from rieszlab.weaktype import (
    BOUND_REGISTRY,
    CounterexampleConfig,
    LemmaKernelSpec,
    LevelSetReport,
    counterexample_lower_bound,
    czlocal_supremum,
    gamma_inv_ball_log,
    gamma_inv_measure,
    gamma_inv_measure_mc,
    lemma_kernel_eval,
    level_set_report,
    rank_one_quasinorm_exact,
    run_bound_sweep,
    slope_fit,
    weak_quasinorm_probe,
)

__all__ = [
    "LogScaled",
    "log_sum",
    "MultiIndex",
    "PolarDecomposition",
    "decompose",
    "identity_residuals",
    "NonConvergenceError",
    "QuadratureConfig",
    "integrate01",
    "gamma_h",
    "gauss_density",
    "h_normalized",
    "inv_gauss_density",
    "KernelValue",
    "heat_kernel",
    "frac_power_kernel",
    "riesz_kernel",
    "riesz_kernel_batch",
    "SpectralCoefficients",
    "analyze",
    "apply_frac_power",
    "apply_riesz_spectral",
    "l2_norm_bound",
    "orthonormality_defect",
    "synthesize",
    "GridFunction",
    "PVConfig",
    "apply_glob",
    "apply_loc",
    "apply_riesz",
    "ball_indicator",
    "BOUND_REGISTRY",
    "CounterexampleConfig",
    "LemmaKernelSpec",
    "LevelSetReport",
    "counterexample_lower_bound",
    "czlocal_supremum",
    "gamma_inv_ball_log",
    "gamma_inv_measure",
    "gamma_inv_measure_mc",
    "lemma_kernel_eval",
    "level_set_report",
    "rank_one_quasinorm_exact",
    "run_bound_sweep",
    "slope_fit",
    "weak_quasinorm_probe",
]
