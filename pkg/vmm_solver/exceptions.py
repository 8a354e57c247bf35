"""
    Custom exceptions that may occur while working with the solver.
"""

from typing import Optional, Sequence, Tuple

from vmm_solver.consts import EXIT_CODE_NUMERICAL, EXIT_CODE_USAGE


class VmmError(Exception):
    """
    Super class for solver exceptions.
    """

    # Exit code reported by the CLI when this error escapes a subcommand.
    exit_code: int = EXIT_CODE_NUMERICAL


class MeshConstructionError(VmmError):
    """
    Raised when mesh parameters are invalid (empty interval, zero cells, non positive radius).
    """

    exit_code = EXIT_CODE_USAGE


class DimensionMismatchError(VmmError):
    """
    Raised when mesh, element, and problem dimensions disagree.
    """

    exit_code = EXIT_CODE_USAGE


class DegenerateElementError(VmmError):
    """
    Raised when the duality system of an element is near singular.
    """

    def __init__(self, message: str, condition: float):
        """
        :param message: Message of the exception.
        :param condition: Condition estimate of the scaled duality matrix.
        """
        super().__init__(message)
        self.condition = condition


class QuadratureUnavailableError(VmmError):
    """
    Raised when no quadrature rule exists for the requested dimension / degree.
    """

    exit_code = EXIT_CODE_USAGE


class CoefficientEvaluationError(VmmError):
    """
    Raised when a coefficient field or source cannot be evaluated at a quadrature point.
    """

    def __init__(self, message: str, cell_index: int, point: Tuple[float, ...]):
        """
        :param message: Message of the exception.
        :param cell_index: Index of the cell being integrated.
        :param point: Physical point where evaluation failed.
        """
        super().__init__(message)
        self.cell_index = cell_index
        self.point = point


class MissingBoundaryDataError(VmmError):
    """
    Raised when a constrained DOF needs boundary data derivatives that the problem does not provide.
    """

    exit_code = EXIT_CODE_USAGE


class NotPositiveDefiniteError(VmmError):
    """
    Raised when a matrix expected to be symmetric positive definite is not.
    """


class GramFactorizationError(NotPositiveDefiniteError):
    """
    Raised when a Gram matrix restricted to the free subspace cannot be factorized.
    """


class DiagnosticCeilingError(VmmError):
    """
    Raised when a dense diagnostic would exceed the configured DOF ceiling.
    """

    exit_code = EXIT_CODE_USAGE

    def __init__(self, message: str, n_dofs: int, ceiling: int):
        """
        :param message: Message of the exception.
        :param n_dofs: Number of free DOFs requested.
        :param ceiling: Configured ceiling.
        """
        super().__init__(message)
        self.n_dofs = n_dofs
        self.ceiling = ceiling


class UnknownProblemError(VmmError):
    """
    Raised when a built-in problem name is not known.
    """

    exit_code = EXIT_CODE_USAGE


class ExpressionSyntaxError(VmmError):
    """
    Raised when a field expression cannot be parsed.
    """

    exit_code = EXIT_CODE_USAGE

    def __init__(self, message: str, offset: int):
        """
        :param message: Message of the exception.
        :param offset: Byte offset of the offending token in the expression.
        """
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class FieldEvaluationError(VmmError):
    """
    Raised when a field evaluates to non finite values (domain errors) at some points.
    """

    def __init__(self, message: str, failed_points: Optional[Sequence[int]] = None):
        """
        :param message: Message of the exception.
        :param failed_points: Indices of the points where evaluation failed.
        """
        super().__init__(message)
        self.failed_points = list(failed_points) if failed_points is not None else []


class ConfigurationError(VmmError):
    """
    Raised when run configuration is invalid (for example, two epsilon schedules at once).
    """

    exit_code = EXIT_CODE_USAGE


class OutputError(VmmError):
    """
    Raised when there is any error in the writer.
    For example, raised when a CSV file cannot be written.
    """


class UnexpectedSingularityError(VmmError):
    """
    Raised by the CLI when a solve is singular and the run did not expect it.
    """


class EllipticityBoundError(ConfigurationError):
    """
    Raised when the sampled minimal eigenvalue of the coefficient is below the declared `lambda_lower`.
    """

    def __init__(self, message: str, min_eigenvalue: float, lambda_lower: float):
        """
        :param message: Message of the exception.
        :param min_eigenvalue: Smallest sampled eigenvalue.
        :param lambda_lower: Declared ellipticity bound.
        """
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.lambda_lower = lambda_lower
