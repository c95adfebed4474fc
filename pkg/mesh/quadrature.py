"""
Quadrature rules: Gauss-Legendre on edges and a tensor rule on the annulus.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import legendre

from config.settings import QUADRATURE_CONFIG
from logging_config.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class QuadratureRule:
    """
    Nodes and positive weights of a quadrature rule.

    Attributes:
        nodes: Reference nodes (n,) or physical points (n, 2)
        weights: Weights (n,); physical rules fold the Jacobian in
        degree: Polynomial degree integrated exactly, when known
        normals: Unit normals at the nodes (edge rules only)
        angles: Polar angle of each node in [0, 2pi) (physical rules)
        radii: Distance of each node to the origin (physical rules)
    """
    nodes: np.ndarray
    weights: np.ndarray
    degree: Optional[int] = None
    normals: Optional[np.ndarray] = None
    angles: Optional[np.ndarray] = None
    radii: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def integrate(self, values: np.ndarray) -> complex:
        """Weighted sum over the last axis of values."""
        return np.asarray(values) @ self.weights


def _verify_exactness(rule: QuadratureRule, tolerance: float = 1e-12) -> None:
    for power in range(rule.degree + 1):
        exact = 1.0 / (power + 1)
        approx = float(np.sum(rule.weights * rule.nodes ** power))
        if abs(approx - exact) > tolerance * exact:
            raise RuntimeError(
                f"Gauss-Legendre rule with {rule.size} points fails on t^{power}: "
                f"{approx} != {exact}"
            )


def gauss_legendre(n_points: int) -> QuadratureRule:
    """
    Gauss-Legendre rule on [0, 1].

    Args:
        n_points: Number of nodes (>= 1)

    Returns:
        QuadratureRule exact for polynomials of degree 2 * n_points - 1
    """
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    nodes, weights = legendre.leggauss(n_points)
    rule = QuadratureRule(
        nodes=0.5 * (nodes + 1.0),
        weights=0.5 * weights,
        degree=2 * n_points - 1,
    )
    _verify_exactness(rule)
    return rule


def edge_quadrature(edge, n_points: int = QUADRATURE_CONFIG["edge_points"]) -> QuadratureRule:
    """
    Gauss-Legendre rule mapped to a mesh edge.

    Straight edges use the segment length as Jacobian, polar arcs use
    radius * dtheta. Normals are the outward normals of the edge's first
    element.

    Args:
        edge: mesh.annulus.Edge
        n_points: Points per edge

    Returns:
        Physical QuadratureRule with normals, angles and radii filled in
    """
    reference = gauss_legendre(n_points)
    t = reference.nodes

    if edge.is_arc:
        theta0, theta1 = edge.theta_range
        theta = theta0 + (theta1 - theta0) * t
        direction = np.column_stack([np.cos(theta), np.sin(theta)])
        points = edge.radius * direction
        weights = reference.weights * edge.radius * (theta1 - theta0)
        normals = direction * edge.normal_sign
        radii = np.full(n_points, edge.radius)
        angles = np.mod(theta, 2.0 * math.pi)
    else:
        points = edge.start[None, :] + t[:, None] * (edge.end - edge.start)[None, :]
        weights = reference.weights * edge.length
        normals = np.tile(edge.normal, (n_points, 1))
        radii = np.hypot(points[:, 0], points[:, 1])
        angles = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * math.pi)

    return QuadratureRule(
        nodes=points,
        weights=weights,
        degree=reference.degree,
        normals=normals,
        angles=angles,
        radii=radii,
    )


def annulus_l2_quadrature(a: float, R: float, n_r: int, n_t: int) -> QuadratureRule:
    """
    Tensor rule on a <= r <= R: Gauss-Legendre in r, trapezoid in theta.

    The trapezoid rule is spectrally accurate for periodic integrands, so the
    rule is independent of any mesh. Weights include the polar Jacobian r.

    Args:
        a: Inner radius
        R: Outer radius
        n_r: Radial Gauss points (>= 4)
        n_t: Angular points (>= 4)

    Returns:
        Physical QuadratureRule over the annulus
    """
    if n_r < 4 or n_t < 4:
        raise ValueError(f"n_r and n_t must be >= 4, got n_r={n_r}, n_t={n_t}")
    if not 0.0 < a < R:
        raise ValueError(f"Need 0 < a < R, got a={a}, R={R}")

    radial = gauss_legendre(n_r)
    r = a + (R - a) * radial.nodes
    w_r = (R - a) * radial.weights * r
    theta = 2.0 * math.pi * np.arange(n_t) / n_t
    w_t = 2.0 * math.pi / n_t

    rr, tt = np.meshgrid(r, theta, indexing="ij")
    points = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    weights = np.repeat(w_r * w_t, n_t)

    area = float(weights.sum())
    exact = math.pi * (R * R - a * a)
    if abs(area - exact) > 1e-12 * exact:
        raise RuntimeError(f"Annulus rule area {area} differs from {exact}")

    logger.debug(f"Annulus quadrature: {n_r} x {n_t} = {weights.size} nodes")
    return QuadratureRule(
        nodes=points,
        weights=weights,
        degree=radial.degree,
        angles=tt.ravel(),
        radii=rr.ravel(),
    )
