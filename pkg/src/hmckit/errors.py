"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, bad value, missing input)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(ArithmeticError):
    """A numerical evaluation produced a non-finite or invalid result."""


class DivergenceError(RuntimeError):
    """A numerical flow blew up (non-finite state or runaway energy).

    Integrators raise this internally; `integrate` converts it into a
    trajectory with the divergent flag set so that kernels can reject.
    """

    def __init__(self, message, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual


class BracketError(ValueError):
    """A conditional-CDF bracket does not enclose the requested quantile."""


class DegenerateChainError(ValueError):
    """Diagnostics requested on a chain with zero empirical variance."""
