"""mixneu: mixed local/nonlocal Neumann operator on an interval.

Galerkin assembly of  -alpha * Laplacian + beta * (-Laplacian)^s  with
natural (alpha, beta)-Neumann conditions, two-sided weighted eigenvalue
solves on the weight-orthogonal subspace, Neumann-residual diagnostics,
Poincare/Sobolev checks, level-set machinery with De Giorgi boundedness
certificates, and randomized audits of the scalar inequalities behind
them.

Core modules
------------
mesh       collared interval meshes, element pairs, quadrature rules
fields     operator parameters, piecewise data, exponent arithmetic
assembly   dense Galerkin forms, graph collocation form
spectral   weighted eigensolves, source problems, Neumann residuals
analysis   Poincare/Sobolev checks, level sets, De Giorgi certificates
cli        the `mixneu` command-line entry point
"""

from .analysis import (
    STREAMS,
    AuditResult,
    DeGiorgiReport,
    LevelSetData,
    SobolevCheck,
    audit_decomposition,
    audit_mediant,
    audit_product_bound,
    audit_truncation,
    check_decomposition,
    check_mediant,
    check_product_bound,
    check_truncation,
    degiorgi_bound,
    degiorgi_certificate,
    level_profile,
    poincare_constant,
    project_to_v,
    sobolev_check,
    stream_rng,
)
from .assembly import AssembledForms, GraphForm, assemble, graph_form, load_vector, seminorm_sq
from .config import TASKS, RunConfig, config_from_dict, config_to_dict, load_config
from .errors import (
    AssemblyError,
    ConfigError,
    ConvergenceError,
    DegenerateDirectionError,
    DegenerateWeightError,
    DiscretePoincareError,
    FieldSpecError,
    HypothesisViolationError,
    IntegrabilityError,
    InvalidGeometryError,
    InvalidParamsError,
    MixneuError,
    NumericalError,
    ZeroFluxViolationError,
)
from .fields import (
    ExponentPack,
    OperatorParams,
    PiecewiseField,
    WeightDiagnostics,
    critical_exponent,
    exponent_pack,
    sobolev_exponent,
    weight_diagnostics,
)
from .mesh import Mesh1D, QuadratureRule, build_mesh, element_pairs, gauss_rule
from .reports import Report, emit, parse_report, run
from .spectral import (
    EigenPair,
    FirstEigenStructure,
    NeumannResiduals,
    ReducedCountWarning,
    Spectrum,
    first_eigen_structure,
    householder_null_basis,
    neumann_residuals,
    rayleigh,
    solve_source,
    solve_spectrum,
    v_basis,
)

__version__ = "0.1.0"

__all__ = [
    "STREAMS",
    "TASKS",
    "AssembledForms",
    "AssemblyError",
    "AuditResult",
    "ConfigError",
    "ConvergenceError",
    "DeGiorgiReport",
    "DegenerateDirectionError",
    "DegenerateWeightError",
    "DiscretePoincareError",
    "EigenPair",
    "FieldSpecError",
    "HypothesisViolationError",
    "IntegrabilityError",
    "InvalidGeometryError",
    "InvalidParamsError",
    "MixneuError",
    "NumericalError",
    "ZeroFluxViolationError",
    "ExponentPack",
    "FirstEigenStructure",
    "GraphForm",
    "LevelSetData",
    "Mesh1D",
    "NeumannResiduals",
    "OperatorParams",
    "PiecewiseField",
    "QuadratureRule",
    "ReducedCountWarning",
    "Report",
    "RunConfig",
    "SobolevCheck",
    "Spectrum",
    "WeightDiagnostics",
    "assemble",
    "audit_decomposition",
    "audit_mediant",
    "audit_product_bound",
    "audit_truncation",
    "build_mesh",
    "check_decomposition",
    "check_mediant",
    "check_product_bound",
    "check_truncation",
    "config_from_dict",
    "config_to_dict",
    "critical_exponent",
    "degiorgi_bound",
    "degiorgi_certificate",
    "element_pairs",
    "emit",
    "exponent_pack",
    "first_eigen_structure",
    "gauss_rule",
    "graph_form",
    "householder_null_basis",
    "level_profile",
    "load_config",
    "load_vector",
    "neumann_residuals",
    "parse_report",
    "poincare_constant",
    "project_to_v",
    "rayleigh",
    "run",
    "seminorm_sq",
    "sobolev_check",
    "sobolev_exponent",
    "solve_source",
    "solve_spectrum",
    "stream_rng",
    "v_basis",
    "weight_diagnostics",
]
