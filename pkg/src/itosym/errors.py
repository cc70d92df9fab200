"""Exception types raised across the package."""


class ItosymError(Exception):
    """Base class for all package errors."""


class DomainError(ItosymError, ValueError):
    """A coefficient function was evaluated outside its domain."""


class DegenerateNoises(ItosymError, ValueError):
    """Two noise coefficients are functionally dependent (Lambda vanishes)."""


class SingularNoise(ItosymError, ValueError):
    """The noise used for a standard-form reduction vanishes in the domain."""


class QuadratureFailure(ItosymError, RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


class DegenerateProbe(ItosymError, ValueError):
    """Three-noise probe parameters make two noise coefficients proportional."""


class BadGrid(ItosymError, ValueError):
    """Time grid is not strictly increasing from zero."""


class BadFactor(ItosymError, ValueError):
    """Coarsening factor does not divide the number of steps."""


class IncomparableTrajectories(ItosymError, ValueError):
    """Trajectories cannot be compared (exit, mismatched grids or horizons)."""


class SpecError(ItosymError, ValueError):
    """Malformed equation or expression input.

    ``where`` holds a dotted field path such as ``drift.terms[1].exp``.
    """

    def __init__(self, message, where=""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
