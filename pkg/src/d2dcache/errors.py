class ParameterError(ValueError):
    """An argument lies outside the domain of a model operation."""


class DomainError(ValueError):
    """A special function was evaluated at a pole or divergent point."""


class InvariantError(ValueError):
    """A data object violates one of its structural invariants."""


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
