"""Eigenspace perturbation bounds for eddy-viscosity turbulence closures.

The toolkit perturbs the modeled Reynolds stress toward the limiting
states of realizable turbulence anisotropy (and through the eigenvector
alignments extremizing production), re-solves the mean flow for each
perturbed model, and reports the spread of the predictions as interval
bounds on the quantities of interest.
"""

from ._kernels import BACKEND
from .aggregate import (
    IntervalBound,
    ProfileEnvelope,
    VariabilityField,
    build_campaign_aggregates,
    emit_report,
    field_variability,
    interval_bounds,
    profile_envelope,
)
from .barycentric import (
    DEFAULT_GEOMETRY,
    BaryPoint,
    ComponentTarget,
    TriangleGeometry,
    bary_from_eigenvalues,
    eigenvalues_from_bary,
    perturb_bary,
    triangle_weights,
)
from .campaign import (
    BuiltinChannelSolver,
    CampaignPlan,
    ExternalCommandSolver,
    RunPlan,
    RunResult,
    UqConfig,
    emit_config,
    external_solver_exec,
    parse_config,
    plan_campaign,
    run_campaign,
)
from .channel import (
    ChannelGrid,
    ChannelParams,
    ChannelSolution,
    QoiRecord,
    build_grid,
    eddy_viscosity,
    load_solution,
    qoi_extract,
    solve_baseline,
    solve_perturbed,
    write_solution,
)
from .errors import (
    AggregationError,
    ConfigError,
    DegenerateTKE,
    EigenUQError,
    GeometryError,
    GridError,
    InvalidFrame,
    InvalidMagnitude,
    IoError,
    LaunchError,
    NonFiniteError,
    OrderingError,
    RealizabilityError,
    ShapeError,
)
from .perturb import (
    PerturbationSpec,
    StrainFrame,
    alignment_range,
    boussinesq_stress,
    model_alignment,
    perturb_eigenvalues,
    perturb_eigenvectors,
    perturb_field,
    perturbed_stress,
    production,
    relax_stress,
    strain_eigenframe,
    strain_rate,
)
from .tensors import (
    AnisotropyEigenvalues,
    EigenFrame,
    RealizabilityReport,
    SymTensor3,
    anisotropy_from_stress,
    realizability_check,
    stress_from_eigen,
    symmetric_eigen,
    turbulent_kinetic_energy,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # errors
    "EigenUQError",
    "NonFiniteError",
    "DegenerateTKE",
    "InvalidFrame",
    "InvalidMagnitude",
    "OrderingError",
    "RealizabilityError",
    "ShapeError",
    "GeometryError",
    "GridError",
    "ConfigError",
    "AggregationError",
    "IoError",
    "LaunchError",
    # tensor core
    "SymTensor3",
    "EigenFrame",
    "AnisotropyEigenvalues",
    "RealizabilityReport",
    "symmetric_eigen",
    "turbulent_kinetic_energy",
    "anisotropy_from_stress",
    "stress_from_eigen",
    "realizability_check",
    # barycentric map
    "BaryPoint",
    "ComponentTarget",
    "TriangleGeometry",
    "DEFAULT_GEOMETRY",
    "bary_from_eigenvalues",
    "triangle_weights",
    "eigenvalues_from_bary",
    "perturb_bary",
    # eigenspace perturbation
    "PerturbationSpec",
    "StrainFrame",
    "strain_rate",
    "strain_eigenframe",
    "boussinesq_stress",
    "model_alignment",
    "perturb_eigenvalues",
    "perturb_eigenvectors",
    "alignment_range",
    "perturbed_stress",
    "relax_stress",
    "production",
    "perturb_field",
    # channel solver
    "ChannelParams",
    "ChannelGrid",
    "ChannelSolution",
    "QoiRecord",
    "build_grid",
    "eddy_viscosity",
    "solve_baseline",
    "solve_perturbed",
    "qoi_extract",
    "write_solution",
    "load_solution",
    # campaign
    "UqConfig",
    "parse_config",
    "emit_config",
    "RunPlan",
    "CampaignPlan",
    "RunResult",
    "plan_campaign",
    "BuiltinChannelSolver",
    "ExternalCommandSolver",
    "external_solver_exec",
    "run_campaign",
    # aggregation
    "IntervalBound",
    "ProfileEnvelope",
    "VariabilityField",
    "interval_bounds",
    "profile_envelope",
    "field_variability",
    "emit_report",
    "build_campaign_aggregates",
]
