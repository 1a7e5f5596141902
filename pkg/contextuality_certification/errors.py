"""Exception hierarchy shared by the engines and the command-line front end."""


class CertificationError(Exception):
    """Base class for every error the toolkit raises on purpose."""

    exit_code = 1


class InputValidationError(CertificationError, ValueError):
    """An argument or a scenario violates a documented invariant."""


class ScenarioParseError(InputValidationError):
    """A scenario document could not be parsed or failed schema validation."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ScenarioLookupError(CertificationError, KeyError):
    """Unknown built-in scenario or named state."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ResourceLimitError(CertificationError):
    """Enumeration would exceed the supported problem size."""


class ModelError(CertificationError):
    """The requested model quantity does not exist for this input."""


class ConsistencyError(CertificationError):
    """An internal cross-check failed; usually signals an invalid input state."""


class UsageError(CertificationError):
    """Bad command-line usage."""

    exit_code = 2
