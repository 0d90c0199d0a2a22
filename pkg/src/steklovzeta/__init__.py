"""Steklov spectra, zeta traces and zeta invariants of weighted
Dirichlet-to-Neumann operators on the circle."""

from .circle_fourier import (
    GridSampling,
    WeightFunction,
    antiderivative_mean_one,
    boundary_length,
    from_samples,
    load_weight,
    normalize,
    pointwise_map,
    save_weight,
    to_samples,
    trim,
)
from .conformal import DomainMap, MoebiusMap, gallery, moebius_pullback, weight_from_map
from .dtn_operators import (
    KERNEL_TOL,
    KernelProjection,
    OperatorMatrix,
    assemble_fourier,
    assemble_phi,
    kernel_projection,
    matrix_power,
    phi_basis_samples,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    random_weight,
    recompute_bundle,
    run_scan,
    run_verify,
)
from .steklov_spectral import (
    SteklovSpectrum,
    asymptotic_residuals,
    classical_inequality_report,
    rayleigh_quotient,
    steklov_spectrum,
)
from .zeta_engine import (
    GrowthCertificate,
    ZetaCurve,
    conformal_defect,
    growth_certificate,
    psi_curve,
    riemann_zeta,
    sandwich_check,
    trace_R,
    zeta_a,
)
from .zeta_invariants import (
    IndexTuple,
    InvariantReport,
    edward_z1,
    estimate_residuals,
    n_coefficient,
    zeta_invariant,
)

__version__ = "0.1.0"

__all__ = [
    "DomainMap", "ExperimentConfig", "GridSampling", "GrowthCertificate",
    "IndexTuple", "InvariantReport", "KERNEL_TOL", "KernelProjection",
    "MoebiusMap", "OperatorMatrix", "ResultRecord", "SteklovSpectrum",
    "WeightFunction", "ZetaCurve", "antiderivative_mean_one",
    "assemble_fourier", "assemble_phi", "asymptotic_residuals",
    "boundary_length", "classical_inequality_report", "conformal_defect",
    "edward_z1", "estimate_residuals", "from_samples", "gallery",
    "growth_certificate", "kernel_projection", "load_weight", "matrix_power",
    "moebius_pullback", "n_coefficient", "normalize", "phi_basis_samples",
    "pointwise_map", "psi_curve", "random_weight", "rayleigh_quotient",
    "recompute_bundle", "riemann_zeta", "run_scan", "run_verify",
    "sandwich_check", "save_weight", "steklov_spectrum", "to_samples",
    "trace_R", "trim", "weight_from_map", "zeta_a", "zeta_invariant",
]
