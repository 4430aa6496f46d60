"""Averaging-based periodic-orbit analysis for a dumbbell satellite.

The pipeline: parse perturbation torques, extract their angle-linearized
coefficients, average them into 2D bifurcation fields over the two resonant
planes, certify the fields' simple zeros by damped Newton, and verify each
predicted orbit by direct shooting on the full nonlinear attitude equations
along a descending epsilon ladder.
"""

from .averaging import (
    AveragedField,
    averaged_field,
    linearized_perturbation,
    malkin_average,
    periodic_quadrature,
)
from .dynamics import (
    T1,
    T2,
    FundamentalMatrix,
    Mode,
    PerturbSetup,
    ResonanceSpec,
    SatelliteState,
    closed_form_solution,
    first_order_rhs,
    full_rhs,
    fundamental_matrix,
    make_first_order_rhs,
    make_full_rhs,
    monodromy_gap,
    plane_embed,
    plane_project,
    unperturbed_rhs,
)
from .errors import (
    DegenerateMonodromyError,
    DumbbellError,
    NoConvergenceError,
    SingularJacobianError,
    SingularityError,
    StepSizeUnderflowError,
)
from .reference import BUNDLED_CASES, BundledCase
from .shooting import (
    ContinuationReport,
    OrbitCertificate,
    epsilon_continuation,
    integrate,
    sample_trajectory,
    shoot_periodic,
)
from .torques import (
    DomainError,
    EquilibriumReport,
    LinearizedTorque,
    SamplingPlan,
    TorqueExpression,
    TorqueSyntaxError,
    UnknownIdentifierError,
    eval_dual,
    extract_linearized,
    parse_torque,
    validate_equilibrium,
)
from .zeros import (
    CertifiedZero,
    ZeroSearchDomain,
    group_orbit_classes,
    jacobian2d,
    multistart_zeros,
    newton2d,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedField",
    "BUNDLED_CASES",
    "BundledCase",
    "CertifiedZero",
    "ContinuationReport",
    "DegenerateMonodromyError",
    "DomainError",
    "DumbbellError",
    "EquilibriumReport",
    "FundamentalMatrix",
    "LinearizedTorque",
    "Mode",
    "NoConvergenceError",
    "OrbitCertificate",
    "PerturbSetup",
    "ResonanceSpec",
    "SamplingPlan",
    "SatelliteState",
    "SingularJacobianError",
    "SingularityError",
    "StepSizeUnderflowError",
    "T1",
    "T2",
    "TorqueExpression",
    "TorqueSyntaxError",
    "UnknownIdentifierError",
    "ZeroSearchDomain",
    "averaged_field",
    "closed_form_solution",
    "epsilon_continuation",
    "eval_dual",
    "extract_linearized",
    "first_order_rhs",
    "full_rhs",
    "fundamental_matrix",
    "group_orbit_classes",
    "integrate",
    "jacobian2d",
    "linearized_perturbation",
    "make_first_order_rhs",
    "make_full_rhs",
    "malkin_average",
    "monodromy_gap",
    "multistart_zeros",
    "newton2d",
    "parse_torque",
    "periodic_quadrature",
    "plane_embed",
    "plane_project",
    "sample_trajectory",
    "shoot_periodic",
    "unperturbed_rhs",
    "validate_equilibrium",
]
