"""Exception types shared across the package."""


class AssemblyError(RuntimeError):
    """A quadrature produced a non-finite value during stiffness assembly."""


class SingularMatrixError(RuntimeError):
    """LU factorization hit a zero pivot; the matrix is singular to working precision."""

    def __init__(self, pivot_index):
        self.pivot_index = pivot_index
        super().__init__(f"matrix is singular to working precision (zero pivot at index {pivot_index})")


class SvdConvergenceError(RuntimeError):
    """The SVD backend did not converge within its iteration cap."""
