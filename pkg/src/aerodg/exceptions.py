"""Custom exception classes for AeroDG."""

from typing import Any, Dict, Optional, Sequence


class AeroDGError(Exception):
    """Base exception class for AeroDG-specific errors."""

    def __init__(
        self,
        message: str,
        error_code: str,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigError(AeroDGError):
    """Run-configuration errors."""

    def __init__(self, message: str, key: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        details = details or {}
        if key:
            details["key"] = key

        super().__init__(
            message=message,
            error_code="config_invalid",
            exit_code=2,
            details=details,
        )


class MeshParseError(AeroDGError):
    """Malformed mesh file."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        details: Dict[str, Any] = {}
        if line is not None:
            details["line"] = line
        if path:
            details["path"] = path

        super().__init__(
            message=message,
            error_code="mesh_parse_failed",
            exit_code=2,
            details=details,
        )


class MeshTopologyError(AeroDGError):
    """Mesh connectivity or orientation violations."""

    def __init__(self, message: str, issues: Sequence[str] = (), details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["issues"] = list(issues)

        super().__init__(
            message=message,
            error_code="mesh_topology_invalid",
            exit_code=2,
            details=details,
        )


class DegenerateElementError(AeroDGError):
    """Element with zero area."""

    def __init__(self, element: int, area: float):
        super().__init__(
            message=f"Element {element} is degenerate (area {area:.3e})",
            error_code="degenerate_element",
            details={"element": element, "area": area},
        )


class ParameterizationError(AeroDGError):
    """Geometry parameterization errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="parameterization_failed",
            details=details,
        )


class EmbeddingError(AeroDGError):
    """FFD local-coordinate inversion errors."""

    def __init__(self, message: str, points: Sequence[int] = (), details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["points"] = list(points)

        super().__init__(
            message=message,
            error_code="ffd_embedding_failed",
            details=details,
        )


class DeformationError(AeroDGError):
    """Mesh deformation errors."""

    def __init__(self, message: str, elements: Sequence[int] = (), details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["elements"] = list(elements)

        super().__init__(
            message=message,
            error_code="mesh_deformation_failed",
            details=details,
        )


class PositivityError(AeroDGError):
    """Non-positive density or pressure that the limiter cannot recover."""

    def __init__(self, message: str, elements: Sequence[int] = (), details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["elements"] = list(elements)[:20]

        super().__init__(
            message=message,
            error_code="positivity_lost",
            exit_code=3,
            details=details,
        )


class LinearSolverError(AeroDGError):
    """Krylov breakdown or non-convergence."""

    def __init__(self, message: str, iterations: Optional[int] = None, residual: Optional[float] = None):
        details: Dict[str, Any] = {}
        if iterations is not None:
            details["iterations"] = iterations
        if residual is not None:
            details["residual"] = residual

        super().__init__(
            message=message,
            error_code="linear_solve_failed",
            exit_code=3,
            details=details,
        )


class SolverDivergenceError(AeroDGError):
    """Pseudo-time iteration diverged."""

    def __init__(self, message: str, step: int, residual: float):
        super().__init__(
            message=message,
            error_code="solver_diverged",
            exit_code=3,
            details={"step": step, "residual": residual},
        )


class AdjointError(AeroDGError):
    """Adjoint and sensitivity evaluation errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="adjoint_failed",
            details=details,
        )


class GradientCheckError(AeroDGError):
    """Adjoint gradient disagrees with finite differences."""

    def __init__(self, message: str, failed: Sequence[int] = (), details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["failed_components"] = list(failed)

        super().__init__(
            message=message,
            error_code="gradient_check_failed",
            exit_code=4,
            details=details,
        )


class OptimizerError(AeroDGError):
    """Optimizer failures (line search, callbacks, QP)."""

    def __init__(self, message: str, status: str, details: Optional[Dict[str, Any]] = None):
        details = details or {}
        details["status"] = status

        super().__init__(
            message=message,
            error_code="optimizer_failed",
            exit_code=5,
            details=details,
        )


class CheckpointError(AeroDGError):
    """Checkpoint save/restore errors."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(
            message=message,
            error_code="checkpoint_failed",
            details={"path": path} if path else None,
        )
