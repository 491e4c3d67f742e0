"""Exception hierarchy shared by every module."""


class GripperError(Exception):
    """Base class for simulator errors."""


class DomainError(GripperError, ValueError):
    """An argument lies outside the range where a formula is defined."""


class IngestionError(GripperError):
    """A calibration log could not be turned into a grid."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleError(GripperError):
    """The requested target cannot be reached by the model."""


class EngineError(GripperError):
    """A grasp trial could not be evaluated."""


class ConfigError(GripperError):
    """A run configuration is malformed or references missing inputs."""
