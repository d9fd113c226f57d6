"""Exception types shared across the package."""


class ConwillError(Exception):
    pass


class ShapeError(ConwillError):
    """Array shapes inconsistent with the grid."""


class DomainError(ConwillError):
    """Geometry or point-set input outside what the operation supports."""


class StaleTopologyError(ConwillError):
    """Labeling or geodesic data was computed for a different field."""


class SolverError(ConwillError):
    """Iterative solver failed to reach the requested residual."""

    def __init__(self, msg, residual=None, iterations=None):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class DivergenceError(ConwillError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, msg, step=None, max_abs=None):
        super().__init__(msg)
        self.step = step
        self.max_abs = max_abs


class ConfigError(ConwillError):
    """One or more configuration violations; collects all of them."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))
