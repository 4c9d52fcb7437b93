"""Exception hierarchy shared by every module of the package."""


class BDSError(Exception):
    """Base class for all errors raised by :mod:`bds`."""


class DomainError(BDSError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ParameterError(BDSError, ValueError):
    """Shape parameters violate a precondition of the requested operation."""


class OrderError(BDSError, ValueError):
    """A derivative order exceeds what the test function provides."""


class IntegrabilityError(BDSError, ValueError):
    """The integrand grows too fast for the weighted integral to exist."""


class DivergenceError(BDSError, ValueError):
    """An exact moment is infinite for the requested order."""


class StructureError(BDSError):
    """A symbolic decomposition left terms outside its admissible index set."""


class MomentValidityError(BDSError, ValueError):
    """The moment recurrence would divide by ``n - gamma*m <= 0``.

    The partially built table is attached as :attr:`table`.
    """

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class ConvergenceError(BDSError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class InstabilityError(ConvergenceError):
    """An extrapolated sequence is not Cauchy."""
