"""
Bessel and Hankel functions of integer order for real arguments.

J_m is computed by Miller's downward recurrence normalised with
J_0 + 2 * sum_k J_2k = 1. Y_0 and Y_1 come from the Neumann series that
reuse the same Miller sums for moderate x and from the Hankel asymptotic
expansion for large x; higher orders follow by upward recurrence, which is
stable for Y. Negative orders use J_{-m} = (-1)^m J_m and Y_{-m} = (-1)^m Y_m.

Every public function is vectorised over x and raises
SpecialFunctionDomainError instead of returning a non-finite value.
"""
import math
from typing import Tuple, Union

import numpy as np

from config.settings import SPECFUN_CONFIG
from logging_config.logger import get_logger

logger = get_logger(__name__)

EULER_GAMMA = 0.5772156649015329
MAX_ORDER = SPECFUN_CONFIG["max_order"]
MAX_ARGUMENT = SPECFUN_CONFIG["max_argument"]
ASYMPTOTIC_THRESHOLD = SPECFUN_CONFIG["asymptotic_threshold"]
ASYMPTOTIC_TERMS = SPECFUN_CONFIG["asymptotic_terms"]
RESCALE_THRESHOLD = SPECFUN_CONFIG["rescale_threshold"]

ArrayLike = Union[float, np.ndarray]


class SpecialFunctionDomainError(ValueError):
    """Argument outside the supported envelope, or a value outside double range."""


# ============================================================================
# ARGUMENT CHECKS
# ============================================================================

def _check_order(order) -> int:
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise SpecialFunctionDomainError(f"Order must be an integer, got {order!r}")
    order = int(order)
    if abs(order) > MAX_ORDER:
        raise SpecialFunctionDomainError(
            f"Order {order} outside supported range |order| <= {MAX_ORDER}"
        )
    return order


def _check_argument(x, allow_zero: bool) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise SpecialFunctionDomainError("Argument must be finite")
    if allow_zero:
        if np.any(values < 0.0):
            raise SpecialFunctionDomainError(f"Argument must be >= 0, got min {values.min()}")
    elif np.any(values <= 0.0):
        raise SpecialFunctionDomainError(
            f"Argument must be > 0 (logarithmic singularity at 0), got min {values.min()}"
        )
    if np.any(values > MAX_ARGUMENT):
        raise SpecialFunctionDomainError(
            f"Argument {values.max()} outside supported range x <= {MAX_ARGUMENT}"
        )
    return values


def _require_finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise SpecialFunctionDomainError(f"{what} is not representable in double precision")
    return values


def _as_output(values: np.ndarray, like) -> ArrayLike:
    if np.ndim(like) == 0:
        return values.item()
    return values


# ============================================================================
# KERNELS
# ============================================================================

def _miller_start(n_max: int, x_top: float) -> int:
    reach = max(float(n_max), x_top, 1.0)
    return int(math.ceil(max(n_max, x_top))) + 20 + int(math.ceil(math.sqrt(60.0 * reach)))


def _miller(n_max: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Downward recurrence for J_0..J_n_max at strictly positive x (1-D).

    Returns:
        (J, s_even, s_odd) where s_even and s_odd are the normalised
        alternating sums entering the Neumann series of Y_0 and Y_1.
    """
    start = _miller_start(n_max, float(x.max()))
    values = np.zeros((n_max + 1, x.size))
    f2 = np.zeros_like(x)
    f1 = np.full_like(x, 1.0e-30)
    f = f1
    even_sum = np.zeros_like(x)
    s_even = np.zeros_like(x)
    s_odd = np.zeros_like(x)

    for order in range(start, -1, -1):
        f = 2.0 * (order + 1) / x * f1 - f2
        if order <= n_max:
            values[order] = f
        sign = -1.0 if (order // 2) % 2 else 1.0
        if order % 2 == 0 and order != 0:
            even_sum += 2.0 * f
            s_even += sign * f / order
        elif order > 1:
            s_odd += sign * order / (order * order - 1.0) * f

        big = np.abs(f) > RESCALE_THRESHOLD
        if np.any(big):
            scale = np.where(big, 1.0 / RESCALE_THRESHOLD, 1.0)
            f = f * scale
            f1 = f1 * scale
            values *= scale
            even_sum *= scale
            s_even *= scale
            s_odd *= scale
        f2, f1 = f1, f

    norm = even_sum + f
    return values / norm, 4.0 * s_even / norm, 4.0 * s_odd / norm


def _hankel_asymptotic(nu: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Large-argument expansion returning (J_nu, Y_nu) for nu in {0, 1}."""
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 2 * ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
    chi = x - (0.5 * nu + 0.25) * math.pi
    amplitude = np.sqrt(2.0 / (math.pi * x))
    j = amplitude * (p * np.cos(chi) - q * np.sin(chi))
    y = amplitude * (p * np.sin(chi) + q * np.cos(chi))
    return j, y


def _jy_table(n_max: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """J and Y for orders 0..n_max at positive 1-D x; Y may overflow to inf."""
    width = max(n_max, 1)
    j, s_even, s_odd = _miller(width, x)

    y = np.empty((width + 1, x.size))
    small = x < ASYMPTOTIC_THRESHOLD
    ec = np.log(x[small] / 2.0) + EULER_GAMMA
    y[0, small] = 2.0 / math.pi * (ec * j[0, small] - s_even[small])
    y[1, small] = 2.0 / math.pi * (
        (ec - 1.0) * j[1, small] - j[0, small] / x[small] - s_odd[small]
    )
    if np.any(~small):
        _, y[0, ~small] = _hankel_asymptotic(0, x[~small])
        _, y[1, ~small] = _hankel_asymptotic(1, x[~small])

    with np.errstate(over="ignore", invalid="ignore"):
        for order in range(1, width):
            y[order + 1] = 2.0 * order / x * y[order] - y[order - 1]
    return j[: n_max + 1], y[: n_max + 1]


def _j_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """J for orders 0..n_max at x >= 0 (1-D), J_m(0) = delta_m0."""
    table = np.zeros((n_max + 1, x.size))
    positive = x > 0.0
    table[0, ~positive] = 1.0
    if np.any(positive):
        table[:, positive] = _miller(n_max, x[positive])[0]
    return table


def _parity(order: int) -> float:
    return -1.0 if order < 0 and order % 2 else 1.0


# ============================================================================
# PUBLIC API
# ============================================================================

def bessel_jy_sequence(n_max: int, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    J_m(x) and Y_m(x) for every order m = 0..n_max.

    Args:
        n_max: Highest order (0 <= n_max <= MAX_ORDER)
        x: Positive argument(s)

    Returns:
        (J, Y) arrays of shape (n_max + 1, *shape(x))

    Raises:
        SpecialFunctionDomainError: Bad arguments or Y overflowing double range
    """
    n_max = _check_order(n_max)
    if n_max < 0:
        raise SpecialFunctionDomainError(f"n_max must be >= 0, got {n_max}")
    values = _check_argument(x, allow_zero=False)
    j, y = _jy_table(n_max, values.ravel())
    _require_finite(y, f"Y_m up to order {n_max}")
    shape = (n_max + 1,) + values.shape
    return j.reshape(shape), y.reshape(shape)


def hankel2_sequence(n_max: int, x: ArrayLike) -> np.ndarray:
    """H^(2)_m(x) = J_m(x) - i Y_m(x) for m = 0..n_max, shape (n_max + 1, *shape(x))."""
    j, y = bessel_jy_sequence(n_max, x)
    return j - 1j * y


def largest_finite_order(n_max: int, x: ArrayLike) -> int:
    """
    Largest order m <= n_max for which Y_m is finite at every given x.

    Used by series evaluations to drop modes whose Bessel coefficient
    J_m(x) has already underflowed.
    """
    n_max = _check_order(n_max)
    values = _check_argument(x, allow_zero=False).ravel()
    _, y = _jy_table(n_max, values)
    finite = np.all(np.isfinite(y), axis=1)
    if finite.all():
        return n_max
    last = int(np.argmin(finite)) - 1
    logger.debug(f"Y_m overflows beyond order {last} at x_min={values.min():.4g}")
    return last


def bessel_j(order: int, x: ArrayLike) -> ArrayLike:
    """
    Bessel function of the first kind J_order(x).

    Args:
        order: Integer order, |order| <= MAX_ORDER
        x: Argument(s), 0 <= x <= MAX_ARGUMENT

    Returns:
        float for scalar x, ndarray otherwise
    """
    order = _check_order(order)
    values = _check_argument(x, allow_zero=True)
    m = abs(order)
    result = _j_table(m, values.ravel())[m].reshape(values.shape) * _parity(order)
    return _as_output(result, x)


def bessel_y(order: int, x: ArrayLike) -> ArrayLike:
    """
    Bessel function of the second kind Y_order(x), x > 0.

    Raises:
        SpecialFunctionDomainError: x <= 0, out of envelope, or overflow
    """
    order = _check_order(order)
    values = _check_argument(x, allow_zero=False)
    m = abs(order)
    _, y = _jy_table(m, values.ravel())
    result = _require_finite(y[m], f"Y_{order}").reshape(values.shape) * _parity(order)
    return _as_output(result, x)


def hankel2(order: int, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    Hankel function of the second kind and its derivative.

    The derivative uses H'_m = (H_{m-1} - H_{m+1}) / 2, with H_{-1} = -H_1.

    Args:
        order: Integer order, |order| <= MAX_ORDER
        x: Argument(s), 0 < x <= MAX_ARGUMENT

    Returns:
        (value, derivative), complex scalars for scalar x
    """
    order = _check_order(order)
    values = _check_argument(x, allow_zero=False)
    m = abs(order)
    j, y = _jy_table(m + 1, values.ravel())
    h = j - 1j * y
    below = -h[1] if m == 0 else h[m - 1]
    value = h[m]
    derivative = (below - h[m + 1]) / 2.0
    _require_finite(np.concatenate([value, derivative]), f"H^(2)_{order}")

    sign = _parity(order)
    value = (value * sign).reshape(values.shape)
    derivative = (derivative * sign).reshape(values.shape)
    return _as_output(value, x), _as_output(derivative, x)
