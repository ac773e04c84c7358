"""
Exception hierarchy for the simulator
"""
from typing import Optional


class PathIdError(Exception):
    """Base class for all simulator errors"""


class ConfigError(PathIdError):
    """A run configuration could not be read or parsed"""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, field: Optional[str] = None):
        self.path = path
        self.line = line
        self.field = field
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class SpecValidationError(PathIdError):
    """A configuration or spec violates an invariant"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DomainError(PathIdError):
    """Numeric or domain problem while evaluating a model"""


class CoherenceError(DomainError):
    """A coherent-only operation received partially coherent sources"""


class UndefinedVisibilityError(DomainError):
    """Visibility or distinguishability requested for an all-zero input"""


class UndefinedAttributionError(DomainError):
    """Attribution requested with zero total counts"""


class InconsistentInputsError(DomainError):
    """Measured inputs imply an unphysical model parameter"""
