"""
Diagonal symbols of the Dirichlet-to-Neumann map on a circle.

zeta_m = k * H'_m(kR) / H_m(kR) with H = H^(2). The logarithmic derivative
is propagated with the ratio recurrence q_{m+1} = 2m/x - 1/q_m,
q_m = H_m / H_{m-1}, so it stays finite where H_m itself leaves double
range. The imaginary part is taken from the Wronskian,
Im(H'_m / H_m) = -2 / (pi x |H_m|^2), which keeps its sign exactly.
"""
import math
from dataclasses import dataclass

import numpy as np

from config.settings import DTN_CONFIG
from logging_config.logger import get_logger
from special_functions.bessel import (
    SpecialFunctionDomainError,
    _check_argument,
    _check_order,
    _jy_table,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class DtnSymbol:
    """
    One diagonal entry of the DtN operator.

    Attributes:
        order: Fourier mode m
        value: zeta_m (units 1/length), Im(value) <= 0
    """
    order: int
    value: complex

    def bound_ratio(self, k: float) -> float:
        """|zeta_m| / (k sqrt(1 + m^2)), compared against 1/|m| + 1/(kR)."""
        return abs(self.value) / (k * math.sqrt(1.0 + self.order ** 2))


def hankel2_ratio_sequence(n_max: int, x: float) -> np.ndarray:
    """
    Logarithmic derivatives H'_m(x) / H_m(x) for m = 0..n_max.

    Args:
        n_max: Highest order
        x: Positive argument

    Returns:
        Complex array of length n_max + 1
    """
    n_max = _check_order(n_max)
    if n_max < 0:
        raise SpecialFunctionDomainError(f"n_max must be >= 0, got {n_max}")
    x = float(_check_argument(x, allow_zero=False))

    j, y = _jy_table(1, np.array([x]))
    h0 = complex(j[0, 0], -y[0, 0])
    h1 = complex(j[1, 0], -y[1, 0])
    wronskian = 2.0 / (math.pi * x)

    ratios = np.empty(n_max + 1, dtype=complex)
    log_modulus = math.log(abs(h0) ** 2)
    q = h1 / h0
    ratios[0] = complex(-q.real, -wronskian * math.exp(-log_modulus))

    for m in range(1, n_max + 1):
        log_modulus += 2.0 * math.log(abs(q))
        real = (1.0 / q).real - m / x
        ratios[m] = complex(real, -wronskian * math.exp(-log_modulus))
        q = 2.0 * m / x - 1.0 / q

    return ratios


def dtn_symbols(n: int, k: float, R: float) -> np.ndarray:
    """
    zeta_m for m = -n..n, ordered by increasing m.

    Entries for -m and m are the same floating-point number.
    """
    if k <= 0.0 or R <= 0.0:
        raise SpecialFunctionDomainError(f"k and R must be positive, got k={k}, R={R}")
    half = k * hankel2_ratio_sequence(n, k * R)
    return np.concatenate([half[:0:-1], half])


def dtn_symbol(m: int, k: float, R: float) -> DtnSymbol:
    """
    Single DtN symbol zeta_m = k H'_m(kR) / H_m(kR).

    Args:
        m: Fourier mode (any sign)
        k: Wavenumber
        R: Radius of the artificial boundary

    Returns:
        DtnSymbol for mode m
    """
    m = _check_order(m)
    if k <= 0.0 or R <= 0.0:
        raise SpecialFunctionDomainError(f"k and R must be positive, got k={k}, R={R}")
    value = k * hankel2_ratio_sequence(abs(m), k * R)[abs(m)]
    return DtnSymbol(order=m, value=complex(value))


def recommended_truncation_order(k: float, R: float, factor: float = DTN_CONFIG["auto_factor"]) -> int:
    """Smallest N with N >= factor * kR; beyond it the DtN truncation error stops dominating."""
    if k <= 0.0 or R <= 0.0:
        raise ValueError(f"k and R must be positive, got k={k}, R={R}")
    order = int(math.ceil(factor * k * R))
    logger.debug(f"Recommended truncation order for kR={k * R:.4g}: N={order}")
    return order
