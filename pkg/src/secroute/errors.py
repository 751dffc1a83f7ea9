"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a physical model."""


class ContractError(ValueError):
    """Inputs violate a function's shape or finiteness contract."""


class GenerationError(RuntimeError):
    """A random topology could not satisfy its placement constraints."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
