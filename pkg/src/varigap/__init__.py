"""varigap: a numerical toolkit for 1-D autonomous variational problems.

Evaluate energies F(y) = integral of L(y, y') with honest divergence
reporting, certify the blow-up of the builtin gap example in closed form,
check the boundedness hypotheses that rule the gap out, and repair
finite-energy trajectories into nearby Lipschitz ones.
"""

from .conditions import Verdict, check_B, check_R, check_Ry, check_zero_speed
from .extreal import INF, ExtendedValue, ExtRealError, add, scale
from .functional import (
    ConsistencyReport,
    EnergyResult,
    GapCertificate,
    IntegrandError,
    PreconditionError,
    energy,
    gap_certificate,
    jensen_split,
    verify_divergence_consistency,
)
from .lagrangian import (
    BUILTIN_SOURCES,
    Lagrangian,
    NonnegativityError,
    RhoPair,
    SignFailureError,
    eval_L,
    eval_rho,
)
from .quadrature import QuadConfig, ToleranceNotMet
from .repair import (
    ComposedPath,
    LusinSplit,
    Reparam,
    RepairError,
    RepairReport,
    RhoBounds,
    RhoRejectedError,
    build_reparam,
    compose_v,
    compute_rho_bounds,
    extend,
    lusin_split,
    repair,
    sweep_csv,
)
from .trajectory import (
    AmbiguousPointError,
    AnalyticTrajectory,
    DomainError,
    Partition,
    PLTrajectory,
    RangeBounds,
    SingularEndpointError,
    Trajectory,
    TrajectoryError,
    discretize,
    sobolev_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousPointError",
    "AnalyticTrajectory",
    "BUILTIN_SOURCES",
    "ComposedPath",
    "ConsistencyReport",
    "DomainError",
    "EnergyResult",
    "ExtRealError",
    "ExtendedValue",
    "GapCertificate",
    "INF",
    "IntegrandError",
    "Lagrangian",
    "LusinSplit",
    "NonnegativityError",
    "Partition",
    "PLTrajectory",
    "PreconditionError",
    "QuadConfig",
    "RangeBounds",
    "Reparam",
    "RepairError",
    "RepairReport",
    "RhoBounds",
    "RhoPair",
    "RhoRejectedError",
    "SignFailureError",
    "SingularEndpointError",
    "ToleranceNotMet",
    "Trajectory",
    "TrajectoryError",
    "Verdict",
    "add",
    "build_reparam",
    "check_B",
    "check_R",
    "check_Ry",
    "check_zero_speed",
    "compose_v",
    "compute_rho_bounds",
    "discretize",
    "energy",
    "eval_L",
    "eval_rho",
    "extend",
    "gap_certificate",
    "jensen_split",
    "lusin_split",
    "repair",
    "scale",
    "sobolev_distance",
    "sweep_csv",
    "verify_divergence_consistency",
]
