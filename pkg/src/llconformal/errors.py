"""Exception types raised across the toolkit."""


class ConformalError(ValueError):
    """Base class for toolkit errors."""


class InsufficientStencilError(ConformalError):
    pass


class OutOfDomainError(ConformalError):
    pass


class EllipticityError(ConformalError):
    """Coefficient modulus reached or exceeded 1 where strict ellipticity is required."""


class NeumannDivergenceError(ConformalError):
    pass


class NotHomeomorphicError(ConformalError):
    pass


class InternalInconsistencyError(ConformalError):
    """An identity that holds by construction failed numerically."""
