# Relata/exceptions.py

from typing import Optional


class RelataError(Exception):
    """Base class for all exceptions raised by Relata."""
    exit_code = 1

    def __init__(self, message: str = "Relata error.", trial_index: Optional[int] = None):
        self.message = message
        self.trial_index = trial_index
        if trial_index is not None:
            message = f"{message} (trial {trial_index})"
        super().__init__(message)


class InvalidInputError(RelataError):
    """Raised when an event coordinate or angle is not a finite real number."""
    def __init__(self, message="Inputs must be finite real numbers.", trial_index=None):
        super().__init__(message, trial_index)


class InvalidVelocityError(RelataError):
    """Raised when a frame velocity reaches or exceeds the speed of light."""
    def __init__(self, velocity, message=None):
        self.velocity = velocity
        if message is None:
            message = f"Velocity {velocity!r} m/s violates |v| < c = 299792458 m/s."
        super().__init__(message)


class InvalidStateError(RelataError):
    """Raised when a state vector is not normalized."""
    def __init__(self, message="State vector must have unit norm."):
        super().__init__(message)


class ConfigError(RelataError):
    """Raised when a configuration document is malformed or violates a bound."""
    def __init__(self, message="Invalid configuration.", field: Optional[str] = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError):
    """Raised when a configuration document contains keys outside the schema."""
    def __init__(self, keys, section: str = "config"):
        self.keys = sorted(keys)
        super().__init__(f"unknown keys {', '.join(self.keys)}", field=section)


class ConsistencyError(ConfigError):
    """Raised when redundant configuration fields disagree."""
    def __init__(self, message="Redundant fields are inconsistent.", field=None):
        super().__init__(message, field)


class EmptyCountsError(RelataError):
    """Raised when statistics are requested for a table with zero trials."""
    def __init__(self, message="Counts table is empty; at least one trial is required."):
        super().__init__(message)


class InvalidQueryError(RelataError):
    """Raised when a feasibility query has missing or non-positive inputs."""
    def __init__(self, message="Feasibility inputs must be positive and finite."):
        super().__init__(message)


class UsageError(RelataError):
    """Raised for command-line usage errors."""
    def __init__(self, message="Invalid usage."):
        super().__init__(message)


class DegenerateGeometryError(RelataError):
    """Raised when jitter pushes an optical path to a non-positive length."""
    exit_code = 2

    def __init__(self, message="Jittered optical path L2 is not positive.", trial_index=None):
        super().__init__(message, trial_index)


class InfeasibleConfigurationError(RelataError):
    """Raised when a configuration would require a velocity at or above c."""
    exit_code = 2

    def __init__(self, message="Configuration requires a superluminal beam-splitter velocity."):
        super().__init__(message)


class UnsupportedConfigurationError(RelataError):
    """Raised when the alternative description has no prediction for a class."""
    exit_code = 3

    def __init__(self, experiment_class=None, message=None, trial_index=None):
        self.experiment_class = experiment_class
        if message is None:
            message = (
                f"No alternative-description prediction for class {experiment_class}; "
                "set nonbefore_policy to treat-as-qm or treat-as-local."
            )
        super().__init__(message, trial_index)
