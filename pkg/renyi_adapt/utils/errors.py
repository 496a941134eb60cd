"""Error hierarchy and exit-code mapping for renyi-adapt.

Library code raises these exceptions; the CLI translates them into the process exit codes
documented for the experiment harness.
"""

from pydantic import ValidationError


EXIT_OK = 0
EXIT_PARAMETER_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_PARTIAL_FAILURE = 4


class RenyiAdaptError(Exception):
    """Base class for all renyi-adapt errors."""


class ParameterError(RenyiAdaptError, ValueError):
    """An argument is outside its documented domain."""


class UnsupportedConfigurationError(ParameterError):
    """A combination of otherwise valid parameters is not supported."""


class CapacityError(RenyiAdaptError):
    """A request exceeds the dense-simulation capacity (12 qubits)."""


class NumericalError(RenyiAdaptError, ArithmeticError):
    """A numerical routine failed or produced an unusable result."""


class SingularityError(NumericalError):
    """A matrix function hit a non-finite value on the spectrum of its argument.

    Attributes:
        eigenvalue: The offending eigenvalue, when one is known.
    """

    def __init__(self, message: str, eigenvalue: float | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConvergenceError(NumericalError):
    """An iterative decomposition did not converge."""


class PartialFailureError(RenyiAdaptError):
    """Some trials of an experiment failed while the others completed.

    Attributes:
        failures: Human-readable description of each failed task.
    """

    def __init__(self, message: str, failures: list[str]):
        super().__init__(message)
        self.failures = failures


class TruncationQualityWarning(UserWarning):
    """A truncated Taylor target needed more PSD clamping than round-off explains.

    Attributes:
        clamped_mass: Total negative spectral weight removed before renormalization.
    """

    def __init__(self, message: str, clamped_mass: float):
        super().__init__(message)
        self.clamped_mass = clamped_mass


def exit_code_for(exc: BaseException) -> int:
    """Map an exception onto the harness exit code.

    Args:
        exc: Exception raised by a command.

    Returns:
        int: 2 for parameter problems, 3 for numerical failures, 4 for partial failures, 1 otherwise.
    """
    if isinstance(exc, PartialFailureError):
        return EXIT_PARTIAL_FAILURE
    if isinstance(exc, (ParameterError, CapacityError, ValidationError)):
        return EXIT_PARAMETER_ERROR
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL_ERROR
    return 1
