"""Exception hierarchy shared by every simulator package."""


class SimulatorError(Exception):
    """Base class for all simulator failures."""


class CapacityError(SimulatorError):
    """A dense register would exceed the configured qubit cap."""


class DimensionError(SimulatorError):
    """Operands act on registers of different sizes."""


class QubitIndexError(SimulatorError, IndexError):
    """Qubit index outside the register."""


class NonUnitaryError(SimulatorError, ValueError):
    """A gate that must be unitary is not."""


class DomainError(SimulatorError, ValueError):
    """A physical parameter lies outside its allowed range."""


class ConfigError(SimulatorError):
    """Invalid configuration file or option combination."""


class BudgetExceededError(SimulatorError):
    """Exact enumeration would exceed its branch budget."""

    def __init__(self, branches: int, budget: int):
        self.branches = branches
        self.budget = budget
        super().__init__(
            f"enumeration needs {branches:,} branches (budget {budget:,}); "
            f"rerun with --method sample"
        )


class RankDeficiencyError(SimulatorError):
    """Tomography data do not span the operator space."""


class ZeroTraceError(SimulatorError, ValueError):
    """An operator that must be normalised has zero trace."""


class ConvergenceError(SimulatorError):
    """An iterative estimator stopped before reaching its tolerance."""
