"""Exception types shared across the package."""


class LidscoreError(Exception):
    """Base class for package-specific failures."""


class ValidationError(LidscoreError, ValueError):
    """An input violates a documented precondition or type invariant."""


class ConfigError(LidscoreError):
    """Invalid project configuration. Carries the full batch of messages."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))
