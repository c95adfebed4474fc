"""
Truncated Dirichlet-to-Neumann operator on the artificial circle.

Traces on Gamma_R are projected onto span{exp(i l theta) : |l| <= N}:

    M[l, j]   = int xi_j conj(eta_l) ds
    M_D[l, j] = int (ik d_j . n) xi_j conj(eta_l) ds
    T         = diag(zeta_{-N}, ..., zeta_N)

and the boundary block of the stiffness matrix is

    A_DtN = -(1 / 2piR) M* T M
            + delta / (2ik piR) [M_D* T M + (TM)* M_D - (TM)* (TM)].
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from config.settings import QUADRATURE_CONFIG
from logging_config.logger import get_logger
from mesh.annulus import EdgeKind, Mesh
from mesh.quadrature import edge_quadrature
from pwdg.basis import PlaneWaveSpace
from pwdg.exceptions import SystemDimensionError
from special_functions.dtn_symbols import dtn_symbols

logger = get_logger(__name__)

EDGE_POINTS = QUADRATURE_CONFIG["edge_points"]


def _modes(n: int) -> np.ndarray:
    return np.arange(-n, n + 1)


def _symbols(T: np.ndarray) -> np.ndarray:
    T = np.asarray(T)
    return np.diag(T) if T.ndim == 2 else T


def build_projection_matrices(
    mesh: Mesh,
    space: PlaneWaveSpace,
    k: float,
    N: int,
    R: float,
    n_points: int = EDGE_POINTS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projection matrix M and projection-differentiation matrix M_D.

    Args:
        mesh: Annulus mesh
        space: Plane-wave space on the mesh
        k: Wavenumber of the basis
        N: Truncation order
        R: Artificial radius
        n_points: Gauss-Legendre points per Gamma_R edge

    Returns:
        (M, M_D), each (2N + 1, N_h), zero outside Gamma_R elements
    """
    artificial = mesh.edges_of_kind(EdgeKind.ARTIFICIAL)
    if not artificial:
        raise SystemDimensionError("Mesh has no artificial boundary edges")
    if abs(artificial[0].radius - R) > 1e-12 * R:
        raise SystemDimensionError(f"Artificial edges lie on r={artificial[0].radius}, not R={R}")
    if space.k != k:
        raise SystemDimensionError(f"Space wavenumber {space.k} differs from k={k}")

    modes = _modes(N)
    M = np.zeros((modes.size, space.n_dofs), dtype=complex)
    M_D = np.zeros_like(M)
    for edge in artificial:
        rule = edge_quadrature(edge, n_points)
        values, normal_derivatives = space.traces(rule.nodes, rule.normals)
        weighted = np.exp(-1j * np.outer(modes, rule.angles)) * rule.weights
        dofs = space.dofs(edge.elements[0])
        M[:, dofs] += weighted @ values.T
        M_D[:, dofs] += weighted @ normal_derivatives.T
    return M, M_D


def build_symbol_diagonal(k: float, R: float, N: int) -> np.ndarray:
    """(2N + 1) x (2N + 1) diagonal matrix of zeta_m, m = -N..N."""
    return np.diag(dtn_symbols(N, k, R))


def adjoint_symbol_diagonal(T: np.ndarray) -> np.ndarray:
    """Symbol matrix of the L2(Gamma_R) adjoint: entrywise conjugate."""
    return np.conj(T)


def apply_truncated_dtn(coefficients: np.ndarray, T: np.ndarray) -> np.ndarray:
    """
    Fourier coefficients of S_N w from those of w.

    Args:
        coefficients: w_m for m = -N..N
        T: Symbol diagonal (matrix or vector of length 2N + 1)

    Returns:
        zeta_m * w_m
    """
    symbols = _symbols(T)
    coefficients = np.asarray(coefficients)
    if coefficients.shape[0] != symbols.size:
        raise SystemDimensionError(
            f"Expected {symbols.size} Fourier coefficients, got {coefficients.shape[0]}"
        )
    if coefficients.ndim == 1:
        return symbols * coefficients
    return symbols[:, None] * coefficients


def dtn_products(
    M: np.ndarray,
    M_D: np.ndarray,
    T: np.ndarray,
    delta: float,
    k: float,
    R: float,
    trial: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> np.ndarray:
    """
    DtN boundary terms with test functions given by the columns of M / M_D.

    Args:
        trial: (M u, M_D u) projections of the trial functions; defaults
            to the columns of M and M_D themselves

    Returns:
        Matrix (n_test, n_trial), or vector when the trial projections are 1-D
    """
    symbols = _symbols(T)
    if M.shape != M_D.shape or M.shape[0] != symbols.size:
        raise SystemDimensionError(
            f"Inconsistent DtN shapes: M {M.shape}, M_D {M_D.shape}, T {symbols.size}"
        )
    trial_m, trial_md = (M, M_D) if trial is None else trial
    if trial_m.shape[0] != symbols.size or trial_md.shape != trial_m.shape:
        raise SystemDimensionError("Trial projections do not match the truncation order")

    t_trial = apply_truncated_dtn(trial_m, symbols)
    t_test = symbols[:, None] * M
    scale = 1.0 / (2.0 * math.pi * R)
    result = -scale * (M.conj().T @ t_trial)
    if delta != 0.0:
        coupling = M_D.conj().T @ t_trial + t_test.conj().T @ trial_md - t_test.conj().T @ t_trial
        result = result + delta * scale / (1j * k) * coupling
    return result


def boundary_dofs(M: np.ndarray, M_D: np.ndarray) -> np.ndarray:
    """DOFs with a nonzero column in M or M_D."""
    return np.flatnonzero(np.any(M != 0.0, axis=0) | np.any(M_D != 0.0, axis=0))


def assemble_dtn_block(
    M: np.ndarray,
    M_D: np.ndarray,
    T: np.ndarray,
    delta: float,
    k: float,
    R: float,
    dofs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Dense N_h x N_h DtN contribution to the stiffness matrix.

    Products run over the compressed Gamma_R columns and are scattered back.
    """
    if dofs is None:
        dofs = boundary_dofs(M, M_D)
    block = dtn_products(M[:, dofs], M_D[:, dofs], T, delta, k, R)
    full = np.zeros((M.shape[1], M.shape[1]), dtype=complex)
    full[np.ix_(dofs, dofs)] = block
    return full


def boundary_moments(
    mesh: Mesh,
    N: int,
    trace: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_points: int = EDGE_POINTS,
) -> np.ndarray:
    """
    Unnormalised moments int f conj(eta_l) ds over Gamma_R, l = -N..N.

    Args:
        trace: f(points, normals) evaluated at Gamma_R quadrature nodes
    """
    modes = _modes(N)
    moments = np.zeros(modes.size, dtype=complex)
    for edge in mesh.edges_of_kind(EdgeKind.ARTIFICIAL):
        rule = edge_quadrature(edge, n_points)
        values = np.asarray(trace(rule.nodes, rule.normals))
        moments += np.exp(-1j * np.outer(modes, rule.angles)) @ (rule.weights * values)
    return moments


def project_trace(
    mesh: Mesh,
    N: int,
    trace: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_points: int = EDGE_POINTS,
) -> np.ndarray:
    """Fourier coefficients (1 / 2piR) int f conj(eta_l) ds of a Gamma_R trace."""
    return boundary_moments(mesh, N, trace, n_points) / (2.0 * math.pi * mesh.spec.R)


@dataclass(frozen=True)
class DtnOperator:
    """
    Truncated DtN operator S_N with its projection data.

    Attributes:
        N: Truncation order
        k: Wavenumber
        R: Artificial radius
        T: Symbol diagonal (2N + 1, 2N + 1)
        M: Projection matrix (2N + 1, N_h)
        M_D: Projection-differentiation matrix (2N + 1, N_h)
        dofs: Compressed index of Gamma_R DOFs
    """
    N: int
    k: float
    R: float
    T: np.ndarray
    M: np.ndarray
    M_D: np.ndarray
    dofs: np.ndarray

    @classmethod
    def build(cls, mesh: Mesh, space: PlaneWaveSpace, k: float, R: float, N: int,
              n_points: int = EDGE_POINTS) -> "DtnOperator":
        if N < 0:
            raise ValueError(f"Truncation order must be >= 0, got {N}")
        M, M_D = build_projection_matrices(mesh, space, k, N, R, n_points)
        T = build_symbol_diagonal(k, R, N)
        operator = cls(N=N, k=k, R=R, T=T, M=M, M_D=M_D, dofs=boundary_dofs(M, M_D))
        logger.debug(f"DtN operator: N={N}, boundary DOFs={operator.dofs.size}")
        return operator

    @property
    def modes(self) -> np.ndarray:
        return _modes(self.N)

    @property
    def symbols(self) -> np.ndarray:
        return np.diag(self.T)

    def with_order(self, N: int) -> "DtnOperator":
        """Operator of lower order sharing this operator's quadrature."""
        if not 0 <= N <= self.N:
            raise ValueError(f"Order {N} not within 0..{self.N}")
        rows = slice(self.N - N, self.N + N + 1)
        return DtnOperator(
            N=N, k=self.k, R=self.R,
            T=self.T[rows, rows].copy(), M=self.M[rows], M_D=self.M_D[rows],
            dofs=self.dofs,
        )

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        return apply_truncated_dtn(coefficients, self.T)

    def block(self, delta: float) -> np.ndarray:
        return assemble_dtn_block(self.M, self.M_D, self.T, delta, self.k, self.R, self.dofs)
