"""Finite thermodynamics of the quantized electromagnetic field in a closed
rectangular cavity with perfectly conducting walls."""

from .core import (
    BranchBoundary,
    BranchSignature,
    CavityGeometry,
    CavityThermError,
    ConvergenceFailure,
    CutoffConstants,
    DomainError,
    ExcludedMode,
    ImageVector,
    InvalidGeometry,
    ModeTriple,
    NumericalFailure,
    QuadratureFailure,
    QuantityParts,
    RootFailure,
    SumPolicy,
    TailBoundTooLarge,
    TailMethod,
    ThermoPoint,
    ThermoReport,
    mode_weight,
    validate_geometry,
)
from .lattice import (
    ShellEnumerator,
    SumKind,
    SumResult,
    casimir_energy,
    edge_sum,
    mode_frequencies,
    volume_sum,
)
from .regularize import G, K_E, K_V, QuadratureResult, solve_cutoffs
from .thermo import (
    blackbody_energy,
    blackbody_entropy,
    blackbody_free_energy,
    branch_boundaries,
    delta_energy,
    delta_entropy,
    delta_free_energy,
    evaluate_report,
    pressures,
    specific_heat,
    total_energy,
    total_entropy,
    total_free_energy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
