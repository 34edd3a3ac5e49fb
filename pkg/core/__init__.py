"""Core module: polarization-qubit registers and the shared error types."""

from .errors import (
    SimulatorError,
    CapacityError,
    DimensionError,
    QubitIndexError,
    NonUnitaryError,
    DomainError,
    ConfigError,
    BudgetExceededError,
    RankDeficiencyError,
    ZeroTraceError,
    ConvergenceError,
)
from .states import (
    PureState,
    DensityMatrix,
    PauliString,
    Projector,
    KETS,
    PAULIS,
    PHI_PLUS,
    PSI_PLUS,
    bell,
    ghz,
    tensor,
    apply_single,
    project,
    fidelity,
    expectation,
    is_unitary,
    random_density,
    random_pure,
    configure,
)


def configure_core_from_config(config) -> None:
    """Factory-style hook: install qubit cap and tolerances from config."""
    configure(
        max_qubits=config.MAX_QUBITS,
        algebra_tol=config.ALGEBRA_TOL,
        pipeline_tol=config.PIPELINE_TOL,
    )


__all__ = [
    # Errors
    "SimulatorError",
    "CapacityError",
    "DimensionError",
    "QubitIndexError",
    "NonUnitaryError",
    "DomainError",
    "ConfigError",
    "BudgetExceededError",
    "RankDeficiencyError",
    "ZeroTraceError",
    "ConvergenceError",
    # States
    "PureState",
    "DensityMatrix",
    "PauliString",
    "Projector",
    "KETS",
    "PAULIS",
    "PHI_PLUS",
    "PSI_PLUS",
    "bell",
    "ghz",
    "tensor",
    "apply_single",
    "project",
    "fidelity",
    "expectation",
    "is_unitary",
    "random_density",
    "random_pure",
    "configure",
    "configure_core_from_config",
]
