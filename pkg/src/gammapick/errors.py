"""Exception types shared across the package."""


class GammaPickError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GammaPickError):
    """A point or parameter lies outside the domain an operation requires."""


class LinalgError(GammaPickError):
    """Dense linear algebra failed (non-convergence, bad conditioning)."""


class NotPSDError(LinalgError):
    """A matrix required to be positive semidefinite is not.

    Carries the violating eigenvalue in ``min_eigenvalue``.
    """

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = float(min_eigenvalue)


class ConeMembershipError(GammaPickError):
    """A kernel matrix fails the admissibility cone constraints."""


class CertificateError(GammaPickError):
    """A certificate is inconsistent with the problem it claims to solve."""


class UndecidedError(GammaPickError):
    """The solver could not certify feasibility or infeasibility.

    Carries the best residual each phase achieved so the caller can widen the
    grid or loosen tolerances.
    """

    def __init__(self, message: str, primal_residual: float, dual_violation: float):
        super().__init__(message)
        self.primal_residual = float(primal_residual)
        self.dual_violation = float(dual_violation)
