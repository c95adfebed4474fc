"""
Mode-by-mode solution of the scattering problem truncated at r = R.

Each Fourier mode u_m(r) = c1 J_m(kr) + c2 Y_m(kr) satisfies
u_m(a) = g_m and u_m'(R) = lambda_m u_m(R):

    DtN,  |m| <= N : lambda_m = zeta_m, solved by g_m H_m(kr) / H_m(ka)
    DtN,  |m| >  N : lambda_m = 0 (S_N annihilates these modes)
    impedance      : lambda_m = -ik for every m

Comparing the PWDG solution with this field isolates the discretisation
error from the error of truncating the DtN map.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from logging_config.logger import get_logger
from special_functions.bessel import bessel_jy_sequence, largest_finite_order

logger = get_logger(__name__)

RESONANCE_TOLERANCE = 1e-12


class BoundaryCondition(str, Enum):
    """Condition imposed on the artificial boundary."""
    DTN = "dtn"
    IMPEDANCE = "impedance"


class ModeResonanceError(RuntimeError):
    """The 2 x 2 system of one Fourier mode is singular."""

    def __init__(self, mode: int):
        self.mode = mode
        super().__init__(f"Truncated problem is resonant in Fourier mode m={mode}")


def _signed(table: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Rows for signed orders from a table of orders 0..n, with (-1)^m parity."""
    parity = np.where((modes < 0) & (np.abs(modes) % 2 == 1), -1.0, 1.0)
    return table[np.abs(modes)] * parity.reshape((-1,) + (1,) * (table.ndim - 1))


@dataclass(frozen=True)
class TruncatedModeReference:
    """
    Fourier-mode reference solution on a <= r <= R.

    Attributes:
        k, a, R: Wavenumber and radii
        N: DtN truncation order (ignored for impedance)
        bc: Boundary condition on r = R
        modes: Signed orders m = -n..n
        c1, c2: Coefficients of J_m(kr) and Y_m(kr) per mode
    """
    k: float
    a: float
    R: float
    N: int
    bc: BoundaryCondition
    modes: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def n_modes(self) -> int:
        return int(self.modes.size // 2)

    def _bessel(self, r: np.ndarray):
        n = self.n_modes
        j, y = bessel_jy_sequence(n + 1, self.k * r)
        derivative_j = np.empty_like(j[: n + 1])
        derivative_y = np.empty_like(y[: n + 1])
        derivative_j[0], derivative_y[0] = -j[1], -y[1]
        derivative_j[1:] = 0.5 * (j[: n] - j[2: n + 2])
        derivative_y[1:] = 0.5 * (y[: n] - y[2: n + 2])
        return (
            _signed(j[: n + 1], self.modes),
            _signed(y[: n + 1], self.modes),
            _signed(derivative_j, self.modes),
            _signed(derivative_y, self.modes),
        )

    def mode_values(self, r: np.ndarray) -> np.ndarray:
        """u_m(r), shape (2n + 1, len(r))."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        j, y, _, _ = self._bessel(r)
        return self.c1[:, None] * j + self.c2[:, None] * y

    def mode_derivatives(self, r: np.ndarray) -> np.ndarray:
        """u_m'(r), shape (2n + 1, len(r))."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        _, _, dj, dy = self._bessel(r)
        return self.k * (self.c1[:, None] * dj + self.c2[:, None] * dy)

    def evaluate(self, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        unique_r, inverse = np.unique(r.ravel(), return_inverse=True)
        radial = self.mode_values(unique_r)[:, inverse]
        angular = np.exp(1j * np.outer(self.modes, theta.ravel()))
        return np.sum(radial * angular, axis=0).reshape(r.shape)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return self.evaluate(np.hypot(points[:, 0], points[:, 1]), np.arctan2(points[:, 1], points[:, 0]))


def truncated_mode_reference(
    k: float,
    a: float,
    R: float,
    N: int,
    g_modes: np.ndarray,
    bc: BoundaryCondition = BoundaryCondition.DTN,
) -> TruncatedModeReference:
    """
    Solve every Fourier mode of the truncated boundary value problem.

    Args:
        k: Wavenumber
        a: Scatterer radius
        R: Artificial radius
        N: DtN truncation order
        g_modes: Dirichlet data modes g_m, m = -n..n (odd length)
        bc: DtN or impedance condition on r = R

    Returns:
        TruncatedModeReference

    Raises:
        ModeResonanceError: Singular mode system, reporting m
    """
    g_modes = np.asarray(g_modes, dtype=complex)
    if g_modes.ndim != 1 or g_modes.size % 2 == 0:
        raise ValueError("g_modes must list m = -n..n")
    if not 0.0 < a < R:
        raise ValueError(f"Need 0 < a < R, got a={a}, R={R}")
    bc = BoundaryCondition(bc)

    n = g_modes.size // 2
    usable = min(n, largest_finite_order(n + 1, k * a) - 1)
    if usable < n:
        logger.debug(f"Truncated reference limited to |m| <= {usable} (Y_m(ka) overflows beyond)")
        g_modes = g_modes[n - usable: n + usable + 1]
        n = usable
    modes = np.arange(-n, n + 1)

    radii = np.array([a, R])
    j, y = bessel_jy_sequence(n + 1, k * radii)
    dj = np.empty((n + 1, 2))
    dy = np.empty((n + 1, 2))
    dj[0], dy[0] = -j[1], -y[1]
    dj[1:] = 0.5 * (j[:n] - j[2: n + 2])
    dy[1:] = 0.5 * (y[:n] - y[2: n + 2])
    j_a, y_a = _signed(j[: n + 1, 0], modes), _signed(y[: n + 1, 0], modes)
    j_r, y_r = _signed(j[: n + 1, 1], modes), _signed(y[: n + 1, 1], modes)
    dj_r, dy_r = _signed(dj[:, 1], modes), _signed(dy[:, 1], modes)

    c1 = np.zeros(modes.size, dtype=complex)
    c2 = np.zeros(modes.size, dtype=complex)
    if bc == BoundaryCondition.DTN:
        # modes beyond N see a homogeneous Neumann condition
        lam = np.zeros(modes.size, dtype=complex)
        outgoing = np.abs(modes) <= N
        # outgoing modes satisfy u' = zeta_m u at R exactly
        h_a = j_a[outgoing] - 1j * y_a[outgoing]
        c1[outgoing] = g_modes[outgoing] / h_a
        c2[outgoing] = -1j * g_modes[outgoing] / h_a
        solve = ~outgoing
    else:
        lam = np.full(modes.size, -1j * k)
        solve = np.ones(modes.size, dtype=bool)

    # (c1, c2) proportional to (k Y'(kR) - lam Y(kR), -(k J'(kR) - lam J(kR)))
    p = k * dy_r - lam * y_r
    q = k * dj_r - lam * j_r
    psi_a = j_a * p - y_a * q
    scale = np.abs(j_a * p) + np.abs(y_a * q)
    resonant = solve & (np.abs(psi_a) <= RESONANCE_TOLERANCE * scale)
    if np.any(resonant):
        raise ModeResonanceError(int(modes[np.argmax(resonant)]))

    c1[solve] = g_modes[solve] * p[solve] / psi_a[solve]
    c2[solve] = -g_modes[solve] * q[solve] / psi_a[solve]

    logger.debug(f"Truncated reference: bc={bc.value}, N={N}, modes |m| <= {n}")
    return TruncatedModeReference(
        k=float(k), a=float(a), R=float(R), N=int(N), bc=bc, modes=modes, c1=c1, c2=c2,
    )
