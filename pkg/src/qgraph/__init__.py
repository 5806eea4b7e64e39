"""qgraph: delta-coupling approximation of quantum-graph vertex conditions.

The package approximates an arbitrary self-adjoint vertex coupling of a star
graph by a family of graphs carrying only delta couplings and constant
magnetic potentials on short inner edges, and provides the closed-form
spectral machinery (scattering matrices, Green's functions, secular
eigenvalue solver) needed to verify the approximation numerically.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .budget import (
    ExponentBudget,
    FormBoundInputs,
    FormBoundReport,
    FormBoundViolation,
    ManifoldConstants,
    VertexBlock,
    budget_to_json,
    c_eta,
    c_eta_edge,
    delta_eps,
    eps0_manifold,
    eps0_statement,
    exponent_budget,
    form_bound_inputs,
    optimal_alpha,
    verify_form_bound,
)
from .builder import (
    ApproxGraph,
    NeighborSets,
    Order,
    bracket,
    build_approx_graph,
    inner_delta_schedule,
    magnetic_schedule,
    neighbor_sets,
    order_check,
    vertex_delta_schedule,
)
from ._util import DEFAULT_TOL
from .convergence import (
    DEFAULT_D_VALUES,
    ConvergenceReport,
    EigGap,
    HSResolvent,
    QuadratureWarning,
    ScatteringNorm,
    SweepConfig,
    SweepPoint,
    eigengap_floor,
    fit_rate,
    metric_eigengap,
    metric_hs_resolvent,
    metric_scattering,
    report_to_csv,
    run_sweep,
    write_report_csv,
)
from .couplings import (
    CouplingKind,
    NamedCoupling,
    STForm,
    ValidationResult,
    VertexCoupling,
    ab_equiv,
    ab_from_st,
    coupling_distance,
    named_to_st,
    permute_coupling,
    st_from_ab,
    star_scattering,
    validate_coupling,
)
from .errors import (
    ConditioningError,
    DegenerateArgumentError,
    InputError,
    NearSingularZError,
    NonNormalizableError,
    QGraphError,
    ResonantKError,
    ScanRangeError,
    SingularDError,
    StructuralError,
)
from .graphs import (
    CouplingCondition,
    DeltaCondition,
    Edge,
    EndCondition,
    MetricGraphSystem,
    Truncation,
    Vertex,
    dirichlet_condition,
    gauge_transform,
    split_components,
    star_system,
    system_from_approx,
    truncate,
)
from .serialize import dumps, loads
from .solver import (
    GreensFunction,
    SecularProblem,
    effective_scattering,
    eigenvalues_compact,
    greens_function,
    scattering_matrix,
    secular_problem,
)

__all__ = [
    "__version__",
    "DEFAULT_TOL",
    # couplings
    "VertexCoupling",
    "STForm",
    "CouplingKind",
    "NamedCoupling",
    "ValidationResult",
    "validate_coupling",
    "st_from_ab",
    "ab_from_st",
    "ab_equiv",
    "coupling_distance",
    "star_scattering",
    "named_to_st",
    "permute_coupling",
    # builder
    "ApproxGraph",
    "NeighborSets",
    "Order",
    "bracket",
    "build_approx_graph",
    "inner_delta_schedule",
    "magnetic_schedule",
    "neighbor_sets",
    "order_check",
    "vertex_delta_schedule",
    # graphs
    "Edge",
    "EndCondition",
    "Vertex",
    "DeltaCondition",
    "CouplingCondition",
    "MetricGraphSystem",
    "Truncation",
    "dirichlet_condition",
    "gauge_transform",
    "split_components",
    "star_system",
    "system_from_approx",
    "truncate",
    # solver
    "GreensFunction",
    "SecularProblem",
    "effective_scattering",
    "eigenvalues_compact",
    "greens_function",
    "scattering_matrix",
    "secular_problem",
    # convergence
    "DEFAULT_D_VALUES",
    "ConvergenceReport",
    "EigGap",
    "HSResolvent",
    "QuadratureWarning",
    "ScatteringNorm",
    "SweepConfig",
    "SweepPoint",
    "eigengap_floor",
    "fit_rate",
    "metric_eigengap",
    "metric_hs_resolvent",
    "metric_scattering",
    "report_to_csv",
    "run_sweep",
    "write_report_csv",
    # budget
    "ExponentBudget",
    "FormBoundInputs",
    "FormBoundReport",
    "FormBoundViolation",
    "ManifoldConstants",
    "VertexBlock",
    "budget_to_json",
    "c_eta",
    "c_eta_edge",
    "delta_eps",
    "eps0_manifold",
    "eps0_statement",
    "exponent_budget",
    "form_bound_inputs",
    "optimal_alpha",
    "verify_form_bound",
    # serialize
    "dumps",
    "loads",
    # errors
    "QGraphError",
    "InputError",
    "StructuralError",
    "NonNormalizableError",
    "SingularDError",
    "DegenerateArgumentError",
    "ConditioningError",
    "ResonantKError",
    "NearSingularZError",
    "ScanRangeError",
]
