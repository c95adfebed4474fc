"""
Exact scattered field of a sound-soft disk (separation of variables).

    u(r, theta) = -sum_m i^m J_m(ka) / H_m(ka) H_m(kr) exp(im (theta - phi))

with H = H^(2) and phi the incident angle; the +m and -m terms are equal,
which gives the cosine series evaluated here.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.settings import MIE_CONFIG
from logging_config.logger import get_logger
from reference.incident import I_POWERS
from special_functions.bessel import bessel_jy_sequence, hankel2_sequence, largest_finite_order

logger = get_logger(__name__)


def default_truncation(k: float, a: float) -> int:
    """max(100, ceil(1.5 ka + 30))."""
    return max(
        MIE_CONFIG["default_truncation"],
        int(math.ceil(MIE_CONFIG["slope"] * k * a + MIE_CONFIG["min_margin"])),
    )


@dataclass(frozen=True)
class MieSeries:
    """
    Truncated Mie series of the scattered field.

    Attributes:
        k: Wavenumber
        a: Scatterer radius
        n_exact: Requested truncation order
        n_effective: Orders actually summed; higher orders have J_m(ka)
            below double range
        incident_angle: Direction of the incident wave
        bessel_ka: J_m(ka), m = 0..n_effective
        hankel_ka: H_m(ka), m = 0..n_effective
    """
    k: float
    a: float
    n_exact: int
    n_effective: int
    incident_angle: float
    bessel_ka: np.ndarray
    hankel_ka: np.ndarray

    @classmethod
    def build(cls, k: float, a: float, n_exact: Optional[int] = None, incident_angle: float = 0.0) -> "MieSeries":
        if k <= 0.0 or a <= 0.0:
            raise ValueError(f"k and a must be positive, got k={k}, a={a}")
        if n_exact is None:
            n_exact = default_truncation(k, a)
        floor = MIE_CONFIG["slope"] * k * a + MIE_CONFIG["min_margin"]
        if n_exact < floor:
            raise ValueError(f"n_exact={n_exact} below 1.5 ka + 30 = {floor:.1f}")

        n_effective = largest_finite_order(n_exact, k * a)
        j, y = bessel_jy_sequence(n_effective, k * a)
        if n_effective < n_exact:
            logger.debug(f"Mie series summed to order {n_effective} of {n_exact}")
        return cls(
            k=float(k),
            a=float(a),
            n_exact=int(n_exact),
            n_effective=int(n_effective),
            incident_angle=float(incident_angle),
            bessel_ka=j,
            hankel_ka=j - 1j * y,
        )

    @property
    def coefficients(self) -> np.ndarray:
        """J_m(ka) / H_m(ka), m = 0..n_effective."""
        return self.bessel_ka / self.hankel_ka

    def radial_modes(self, r: np.ndarray) -> np.ndarray:
        """
        -i^m J_m(ka) H_m(kr) / H_m(ka) for m = 0..n_effective, shape (n + 1, len(r)).
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        orders = np.arange(self.n_effective + 1)
        ratio = hankel2_sequence(self.n_effective, self.k * r) / self.hankel_ka[:, None]
        return -(I_POWERS[orders % 4] * self.bessel_ka)[:, None] * ratio

    def mode_coefficients(self, r: np.ndarray, n: int) -> np.ndarray:
        """Signed Fourier modes u_m(r), m = -n..n, including the incident phase."""
        radial = self.radial_modes(r)
        padded = np.zeros((n + 1, radial.shape[1]), dtype=complex)
        usable = min(n, self.n_effective)
        padded[: usable + 1] = radial[: usable + 1]
        modes = np.arange(-n, n + 1)
        return padded[np.abs(modes)] * np.exp(-1j * modes * self.incident_angle)[:, None]

    def evaluate(self, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        unique_r, inverse = np.unique(r.ravel(), return_inverse=True)
        radial = self.radial_modes(unique_r)[:, inverse]

        orders = np.arange(self.n_effective + 1)
        weights = np.where(orders == 0, 1.0, 2.0)
        angular = np.cos(np.outer(orders, theta.ravel() - self.incident_angle))
        return np.sum(weights[:, None] * radial * angular, axis=0).reshape(r.shape)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        r = np.hypot(points[:, 0], points[:, 1])
        theta = np.arctan2(points[:, 1], points[:, 0])
        return exact_scattered_field(self, r, theta)


def exact_scattered_field(series: MieSeries, r, theta):
    """
    Scattered field at polar coordinates (r, theta), r >= a.

    Raises:
        ValueError: r < a
    """
    r_values = np.asarray(r, dtype=float)
    if np.any(r_values < series.a * (1.0 - 1e-12)):
        raise ValueError(f"Mie series evaluated inside the scatterer (r < {series.a})")
    result = series.evaluate(r_values, theta)
    return complex(result) if np.ndim(result) == 0 else result
