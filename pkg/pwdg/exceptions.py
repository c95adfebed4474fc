"""
Errors raised by the PWDG discretisation.
"""


class PwdgError(Exception):
    """Base class for discretisation and solve failures."""


class SystemDimensionError(PwdgError, ValueError):
    """Mesh, space, DtN operator or vectors have inconsistent sizes."""


class SingularSystemError(PwdgError, RuntimeError):
    """LU factorisation met an exactly zero pivot."""

    def __init__(self, pivot_index: int, message: str = ""):
        self.pivot_index = pivot_index
        super().__init__(message or f"Matrix is singular: zero pivot at index {pivot_index}")


class NonNegativityViolation(PwdgError, RuntimeError):
    """Im(v* A v) is negative beyond round-off."""

    def __init__(self, value: float, tolerance: float):
        self.value = value
        self.tolerance = tolerance
        super().__init__(f"Im(v* A v) = {value:.3e} below -{tolerance:.3e}")


class DofCapExceededError(PwdgError, ValueError):
    """The requested discretisation exceeds the dense-solver DOF cap."""

    def __init__(self, n_dofs: int, cap: int):
        self.n_dofs = n_dofs
        self.cap = cap
        super().__init__(f"N_h = {n_dofs} exceeds the dense solver cap of {cap} DOFs")
