"""
Dense complex LU solves with residual and conditioning diagnostics.

Factorisation is LAPACK getrf (partial pivoting) through scipy.linalg;
the 1-norm condition number is estimated with gecon on the factors.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor
from scipy.linalg import lu_solve as _lapack_lu_solve
from scipy.linalg.lapack import get_lapack_funcs

from config.settings import SOLVER_CONFIG
from logging_config.logger import get_logger
from pwdg.exceptions import SingularSystemError, SystemDimensionError

logger = get_logger(__name__)


@dataclass(frozen=True)
class LuFactorization:
    """
    P A = L U factors of a square matrix.

    Attributes:
        lu: Packed L (unit lower, implicit diagonal) and U
        piv: LAPACK pivot indices
        norm_1: ||A||_1 of the factored matrix
        growth: max |U| / max |A|
    """
    lu: np.ndarray
    piv: np.ndarray
    norm_1: float
    growth: float

    @property
    def n(self) -> int:
        return int(self.lu.shape[0])

    def solve(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F)
        if F.shape[0] != self.n:
            raise SystemDimensionError(f"Right-hand side of length {F.shape[0]} for n={self.n}")
        return _lapack_lu_solve((self.lu, self.piv), F)

    def condition_estimate(self) -> float:
        """Hager-Higham estimate of ||A||_1 ||A^-1||_1."""
        if self.norm_1 == 0.0:
            return math.inf
        gecon, = get_lapack_funcs(("gecon",), (self.lu,))
        rcond, info = gecon(self.lu, self.norm_1, norm="1")
        if info != 0:
            raise RuntimeError(f"gecon failed with info={info}")
        if rcond == 0.0:
            return math.inf
        estimate = max(1.0, 1.0 / rcond)
        if estimate > SOLVER_CONFIG["condition_warning"]:
            logger.warning(f"Condition estimate {estimate:.3e} for n={self.n}")
        return estimate


def factorize(A: np.ndarray) -> LuFactorization:
    """
    LU factorisation with partial pivoting.

    Raises:
        SystemDimensionError: A not square
        SingularSystemError: A zero pivot was met (index in pivot_index)
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SystemDimensionError(f"Matrix must be square, got {A.shape}")

    norm_1 = float(np.abs(A).sum(axis=0).max()) if A.size else 0.0
    # zero pivots are reported below as SingularSystemError
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(A)

    pivots = np.abs(np.diag(lu))
    zero = np.flatnonzero(pivots == 0.0)
    if zero.size:
        raise SingularSystemError(int(zero[0]))

    scale = float(np.abs(A).max())
    # lu packs the unit-lower multipliers below the diagonal
    growth = float(np.abs(np.triu(lu)).max() / scale) if scale > 0.0 else 1.0
    if growth > SOLVER_CONFIG["growth_warning"]:
        logger.warning(f"Large LU growth factor {growth:.3e} for n={A.shape[0]}")
    logger.debug(f"LU factorised: n={A.shape[0]}, growth={growth:.3e}")
    return LuFactorization(lu=lu, piv=piv, norm_1=norm_1, growth=growth)


def lu_solve(A: np.ndarray, F: np.ndarray) -> np.ndarray:
    """
    Solve A U = F by dense LU.

    Args:
        A: Square complex matrix
        F: Right-hand side of matching length

    Returns:
        Solution vector U

    Raises:
        SingularSystemError: Exactly singular pivot
    """
    F = np.asarray(F)
    if F.shape[0] != np.shape(A)[0]:
        raise SystemDimensionError(f"Right-hand side of length {F.shape[0]} for {np.shape(A)} matrix")
    return factorize(A).solve(F)


def condition_estimate(A: np.ndarray) -> float:
    """
    1-norm condition estimate, +inf for singular matrices.
    """
    try:
        factors = factorize(A)
    except SingularSystemError as exc:
        logger.warning(f"Condition estimate of singular matrix (pivot {exc.pivot_index})")
        return math.inf
    return factors.condition_estimate()
