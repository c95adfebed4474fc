"""
Skeleton assembly of the PWDG sesquilinear form and load vector.

Entry A[j, i] = a(xi_i, xi_j): rows are test functions, columns trial
functions, so that Im(v* A v) is the DG norm of v squared. Jumps use the
first element's outward normal n+, [v] = v+ - v-, [dv] = d_n+ v+ - d_n+ v-.

Interior edges:
    int {u}[dv] - {du}[v] - beta/(ik) [du][dv] + ik alpha [u][v]
Dirichlet edges:
    int -du v + ik alpha u v
Artificial edges (DtN):
    int u dv - (delta/ik) du dv          plus the A_DtN block
Artificial edges (impedance, S replaced by -ik):
    int ik u v + u dv - (delta/ik) (du + ik u)(dv + ik v)
with every test factor conjugated.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel, Field

from config.settings import FLUX_DEFAULTS, QUADRATURE_CONFIG, SOLVER_CONFIG
from logging_config.logger import get_logger
from mesh.annulus import EdgeKind, Mesh
from mesh.quadrature import edge_quadrature
from pwdg.basis import PlaneWaveSpace
from pwdg.dtn import DtnOperator, boundary_moments, dtn_products
from pwdg.exceptions import NonNegativityViolation, SystemDimensionError

logger = get_logger(__name__)

EDGE_POINTS = QUADRATURE_CONFIG["edge_points"]

ScalarField = Callable[[np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray], np.ndarray]


class FluxParams(BaseModel):
    """Numerical flux coefficients, constant on the mesh."""
    model_config = {"frozen": True}

    alpha: float = Field(default=FLUX_DEFAULTS["alpha"], gt=0, description="Trace jump penalty")
    beta: float = Field(default=FLUX_DEFAULTS["beta"], gt=0, description="Normal-derivative jump penalty")
    delta: float = Field(default=FLUX_DEFAULTS["delta"], gt=0, description="Artificial boundary weight")


@dataclass(frozen=True)
class LinearSystem:
    """Dense system A U = F."""
    A: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise SystemDimensionError(f"A must be square, got {self.A.shape}")
        if self.F.shape != (self.A.shape[0],):
            raise SystemDimensionError(f"F has shape {self.F.shape}, expected ({self.A.shape[0]},)")

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    def residual(self, U: np.ndarray) -> float:
        """Relative residual ||A U - F|| / ||F||."""
        norm_f = np.linalg.norm(self.F)
        return float(np.linalg.norm(self.A @ U - self.F) / (norm_f if norm_f > 0.0 else 1.0))

    def with_rhs(self, F: np.ndarray) -> "LinearSystem":
        return LinearSystem(A=self.A, F=np.asarray(F, dtype=complex))


def _check_space(mesh: Mesh, space: PlaneWaveSpace, dtn: Optional[DtnOperator]) -> None:
    if space.n_elements != mesh.n_elements:
        raise SystemDimensionError(
            f"Space built on {space.n_elements} elements, mesh has {mesh.n_elements}"
        )
    if dtn is not None and dtn.M.shape[1] != space.n_dofs:
        raise SystemDimensionError(
            f"DtN operator has {dtn.M.shape[1]} columns, space has {space.n_dofs} DOFs"
        )


class _EdgeTraces:
    """Basis traces and Gram-type products on one edge."""

    def __init__(self, space: PlaneWaveSpace, edge, n_points: int):
        self.rule = edge_quadrature(edge, n_points)
        self.values, self.normal_derivatives = space.traces(self.rule.nodes, self.rule.normals)

    def gram(self, test: np.ndarray, trial: np.ndarray) -> np.ndarray:
        return test.conj() @ (self.rule.weights * trial).T

    def moments(self, test: np.ndarray, trial: np.ndarray) -> np.ndarray:
        return test.conj() @ (self.rule.weights * trial)


def _interior_blocks(traces: _EdgeTraces, flux: FluxParams, k: float):
    V, D = traces.values, traces.normal_derivatives
    advective = 0.5 * (traces.gram(D, V) - traces.gram(V, D))
    penalty = -flux.beta / (1j * k) * traces.gram(D, D) + 1j * k * flux.alpha * traces.gram(V, V)
    return advective, penalty


def _dirichlet_block(traces: _EdgeTraces, flux: FluxParams, k: float) -> np.ndarray:
    V, D = traces.values, traces.normal_derivatives
    return -traces.gram(V, D) + 1j * k * flux.alpha * traces.gram(V, V)


def _artificial_block(traces: _EdgeTraces, flux: FluxParams, k: float, impedance: bool) -> np.ndarray:
    V, D = traces.values, traces.normal_derivatives
    if impedance:
        robin = D + 1j * k * V
        return (
            1j * k * traces.gram(V, V)
            + traces.gram(D, V)
            - flux.delta / (1j * k) * traces.gram(robin, robin)
        )
    return traces.gram(D, V) - flux.delta / (1j * k) * traces.gram(D, D)


def assemble_system(
    mesh: Mesh,
    space: PlaneWaveSpace,
    flux: FluxParams,
    k: float,
    dtn: Optional[DtnOperator] = None,
    *,
    impedance: bool = False,
    g: Optional[ScalarField] = None,
    boundary_terms: bool = True,
    n_points: int = EDGE_POINTS,
) -> LinearSystem:
    """
    Assemble the stiffness matrix and, when g is given, the load vector.

    Args:
        mesh: Annulus mesh
        space: Plane-wave space on mesh
        flux: Flux coefficients
        k: Wavenumber
        dtn: Truncated DtN operator (required unless impedance=True)
        impedance: Use du/dn + iku = 0 on Gamma_R instead of the DtN map
        g: Dirichlet datum on Gamma_D, g(points) -> values
        boundary_terms: False keeps only the interior-edge terms
        n_points: Gauss-Legendre points per edge

    Returns:
        LinearSystem with F = 0 when g is None
    """
    if boundary_terms and not impedance and dtn is None:
        raise SystemDimensionError("DtN mode needs a DtnOperator")
    _check_space(mesh, space, None if impedance else dtn)
    if space.k != k:
        raise SystemDimensionError(f"Space wavenumber {space.k} differs from k={k}")

    n = space.n_dofs
    A = np.zeros((n, n), dtype=complex)

    for edge in mesh.edges:
        if edge.kind != EdgeKind.INTERIOR and not boundary_terms:
            continue
        traces = _EdgeTraces(space, edge, n_points)
        if edge.kind == EdgeKind.INTERIOR:
            advective, penalty = _interior_blocks(traces, flux, k)
            sides = ((edge.elements[0], 1.0), (edge.elements[1], -1.0))
            for test, sign_test in sides:
                for trial, sign_trial in sides:
                    A[space.dofs(test), space.dofs(trial)] += (
                        sign_test * advective + sign_test * sign_trial * penalty
                    )
        elif edge.kind == EdgeKind.DIRICHLET:
            dofs = space.dofs(edge.elements[0])
            A[dofs, dofs] += _dirichlet_block(traces, flux, k)
        else:
            dofs = space.dofs(edge.elements[0])
            A[dofs, dofs] += _artificial_block(traces, flux, k, impedance)

    if boundary_terms and not impedance:
        dofs = dtn.dofs
        A[np.ix_(dofs, dofs)] += dtn_products(
            dtn.M[:, dofs], dtn.M_D[:, dofs], dtn.T, flux.delta, k, dtn.R
        )

    F = assemble_rhs(mesh, space, flux, k, g, n_points) if g is not None else np.zeros(n, dtype=complex)
    if not boundary_terms:
        mode = "interior only"
    else:
        mode = "impedance" if impedance else f"DtN N={dtn.N}"
    logger.info(f"Assembled PWDG system: N_h={n}, boundary={mode}")
    return LinearSystem(A=A, F=F)


def assemble_rhs(
    mesh: Mesh,
    space: PlaneWaveSpace,
    flux: FluxParams,
    k: float,
    g: ScalarField,
    n_points: int = EDGE_POINTS,
) -> np.ndarray:
    """
    Load vector F_j = -int g conj(d_n xi_j) + ik alpha int g conj(xi_j) over Gamma_D.

    Args:
        g: Dirichlet datum, g(points) -> complex values

    Returns:
        Complex vector of length N_h
    """
    _check_space(mesh, space, None)
    F = np.zeros(space.n_dofs, dtype=complex)
    for edge in mesh.edges_of_kind(EdgeKind.DIRICHLET):
        traces = _EdgeTraces(space, edge, n_points)
        values = np.asarray(g(traces.rule.nodes), dtype=complex)
        F[space.dofs(edge.elements[0])] += (
            -traces.moments(traces.normal_derivatives, values)
            + 1j * k * flux.alpha * traces.moments(traces.values, values)
        )
    return F


def apply_form(
    mesh: Mesh,
    space: PlaneWaveSpace,
    flux: FluxParams,
    k: float,
    u: ScalarField,
    grad_u: VectorField,
    dtn: Optional[DtnOperator] = None,
    *,
    impedance: bool = False,
    n_points: int = EDGE_POINTS,
) -> np.ndarray:
    """
    Vector of a(u, xi_j) for a smooth trial field u continuous across edges.

    Args:
        u: u(points) -> values
        grad_u: grad_u(points) -> (n, 2) gradients

    Returns:
        Complex vector of length N_h
    """
    if not impedance and dtn is None:
        raise SystemDimensionError("DtN mode needs a DtnOperator")
    _check_space(mesh, space, None if impedance else dtn)

    result = np.zeros(space.n_dofs, dtype=complex)
    for edge in mesh.edges:
        traces = _EdgeTraces(space, edge, n_points)
        V, D = traces.values, traces.normal_derivatives
        points, normals = traces.rule.nodes, traces.rule.normals
        values = np.asarray(u(points), dtype=complex)
        normal_derivative = np.sum(np.asarray(grad_u(points)) * normals, axis=1)

        if edge.kind == EdgeKind.INTERIOR:
            local = traces.moments(D, values) - traces.moments(V, normal_derivative)
            result[space.dofs(edge.elements[0])] += local
            result[space.dofs(edge.elements[1])] -= local
        elif edge.kind == EdgeKind.DIRICHLET:
            result[space.dofs(edge.elements[0])] += traces.moments(
                V, -normal_derivative + 1j * k * flux.alpha * values
            )
        elif impedance:
            robin = normal_derivative + 1j * k * values
            result[space.dofs(edge.elements[0])] += (
                1j * k * traces.moments(V, values)
                + traces.moments(D, values)
                - flux.delta / (1j * k) * traces.moments(D + 1j * k * V, robin)
            )
        else:
            result[space.dofs(edge.elements[0])] += traces.moments(
                D, values - flux.delta / (1j * k) * normal_derivative
            )

    if not impedance:
        trial_m = boundary_moments(mesh, dtn.N, lambda x, n: u(x), n_points)
        trial_md = boundary_moments(
            mesh, dtn.N, lambda x, n: np.sum(np.asarray(grad_u(x)) * n, axis=1), n_points
        )
        dofs = dtn.dofs
        result[dofs] += dtn_products(
            dtn.M[:, dofs], dtn.M_D[:, dofs], dtn.T, flux.delta, k, dtn.R,
            trial=(trial_m, trial_md),
        )
    return result


def _symbol_field(dtn: DtnOperator, coefficients: np.ndarray, angles: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(angles, dtn.modes)) @ dtn.apply(coefficients)


def quadratic_form_terms(
    v: np.ndarray,
    mesh: Mesh,
    space: PlaneWaveSpace,
    flux: FluxParams,
    k: float,
    dtn: Optional[DtnOperator] = None,
    *,
    impedance: bool = False,
    n_points: int = EDGE_POINTS,
) -> Dict[str, float]:
    """
    The non-negative pieces of Im a(v, v), each integrated edge by edge.

    Returns:
        Dict with keys gradient_jump, trace_jump, dirichlet, artificial_sign,
        artificial_residual; their sum equals Im(v* A v)
    """
    coefficients = np.asarray(v).reshape(space.n_elements, space.p)
    terms = {
        "gradient_jump": 0.0,
        "trace_jump": 0.0,
        "dirichlet": 0.0,
        "artificial_sign": 0.0,
        "artificial_residual": 0.0,
    }

    artificial_traces = []
    for edge in mesh.edges:
        traces = _EdgeTraces(space, edge, n_points)
        w = traces.rule.weights
        first = coefficients[edge.elements[0]]
        value = first @ traces.values
        derivative = first @ traces.normal_derivatives
        if edge.kind == EdgeKind.INTERIOR:
            second = coefficients[edge.elements[1]]
            jump = value - second @ traces.values
            gradient_jump = derivative - second @ traces.normal_derivatives
            terms["gradient_jump"] += flux.beta / k * float(np.sum(w * np.abs(gradient_jump) ** 2))
            terms["trace_jump"] += k * flux.alpha * float(np.sum(w * np.abs(jump) ** 2))
        elif edge.kind == EdgeKind.DIRICHLET:
            terms["dirichlet"] += k * flux.alpha * float(np.sum(w * np.abs(value) ** 2))
        else:
            artificial_traces.append((traces, value, derivative))

    if impedance:
        for traces, value, derivative in artificial_traces:
            w = traces.rule.weights
            terms["artificial_sign"] += k * float(np.sum(w * np.abs(value) ** 2))
            terms["artificial_residual"] += flux.delta / k * float(
                np.sum(w * np.abs(derivative + 1j * k * value) ** 2)
            )
        return terms

    radius = mesh.spec.R
    fourier = np.zeros(2 * dtn.N + 1, dtype=complex)
    for traces, value, _ in artificial_traces:
        fourier += np.exp(-1j * np.outer(dtn.modes, traces.rule.angles)) @ (traces.rule.weights * value)
    fourier /= 2.0 * math.pi * radius

    terms["artificial_sign"] = float(
        -2.0 * math.pi * radius * np.sum(dtn.symbols.imag * np.abs(fourier) ** 2)
    )
    for traces, value, derivative in artificial_traces:
        residual = derivative - _symbol_field(dtn, fourier, traces.rule.angles)
        terms["artificial_residual"] += flux.delta / k * float(
            np.sum(traces.rule.weights * np.abs(residual) ** 2)
        )
    return terms


def dg_seminorm(
    v: np.ndarray,
    system,
    tolerance: float = SOLVER_CONFIG["nonnegativity_tolerance"],
) -> float:
    """
    sqrt(Im(v* A v)).

    Args:
        v: Coefficient vector
        system: LinearSystem or the matrix A itself
        tolerance: Relative slack, in units of ||v||^2, before a negative
            value counts as a violation

    Raises:
        NonNegativityViolation: Im(v* A v) < -tolerance * ||v||^2
    """
    A = system.A if isinstance(system, LinearSystem) else np.asarray(system)
    v = np.asarray(v)
    if A.shape[0] != v.shape[0]:
        raise SystemDimensionError(f"Vector of length {v.shape[0]} for a {A.shape} matrix")
    value = float(np.vdot(v, A @ v).imag)
    slack = tolerance * float(np.vdot(v, v).real)
    if value < -slack:
        raise NonNegativityViolation(value, slack)
    return math.sqrt(max(value, 0.0))
