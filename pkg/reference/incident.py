"""
Incident plane wave and its Dirichlet datum on the scatterer.

Time dependence exp(+i omega t): H^(2) is outgoing and the incident field
travelling along d is exp(ik x.d).
"""
import math
from typing import Callable

import numpy as np

from special_functions.bessel import bessel_jy_sequence, largest_finite_order

# i^m for m mod 4
I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


def incident_direction(angle: float) -> np.ndarray:
    """Unit vector (cos angle, sin angle)."""
    return np.array([math.cos(angle), math.sin(angle)])


def _check_direction(direction: np.ndarray) -> np.ndarray:
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (2,) or abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise ValueError(f"Incident direction must be a unit 2-vector, got {direction}")
    return direction


def incident_wave(k: float, direction: np.ndarray, x: np.ndarray):
    """
    exp(ik x.d) at one point (2,) or many points (n, 2).

    Raises:
        ValueError: direction is not a unit vector
    """
    direction = _check_direction(direction)
    value = np.exp(1j * k * (np.asarray(x, dtype=float) @ direction))
    return complex(value) if np.ndim(value) == 0 else value


def dirichlet_datum(k: float, direction: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Sound-soft datum g = -u_inc as a function of boundary points."""
    direction = _check_direction(direction)

    def g(points: np.ndarray) -> np.ndarray:
        return -np.exp(1j * k * (np.atleast_2d(points) @ direction))

    return g


def dirichlet_modes(k: float, a: float, n: int, angle: float = 0.0) -> np.ndarray:
    """
    Fourier modes g_m, m = -n..n, of g = -exp(ik x.d) on r = a.

    By Jacobi-Anger, g_m = -i^m J_m(ka) exp(-i m angle). Orders whose
    companion Y_m(ka) leaves double range are returned as zero; |J_m(ka)|
    is far below round-off there.
    """
    usable = min(n, largest_finite_order(n, k * a))
    j, _ = bessel_jy_sequence(usable, k * a)
    positive = np.zeros(n + 1, dtype=complex)
    orders = np.arange(usable + 1)
    positive[: usable + 1] = -I_POWERS[orders % 4] * j
    modes = np.arange(-n, n + 1)
    # i^{-m} J_{-m} = i^m J_m
    return positive[np.abs(modes)] * np.exp(-1j * modes * angle)
