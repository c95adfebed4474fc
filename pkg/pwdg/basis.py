"""
Propagating plane-wave Trefftz basis.
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from logging_config.logger import get_logger

logger = get_logger(__name__)


def directions(p: int) -> np.ndarray:
    """
    Equispaced unit directions d_l = (cos 2 pi l / p, sin 2 pi l / p), l = 1..p.

    Args:
        p: Number of directions (>= 3)

    Returns:
        Array of shape (p, 2)
    """
    if p < 3:
        raise ValueError(f"p must be >= 3, got {p}")
    angles = 2.0 * math.pi * np.arange(1, p + 1) / p
    return np.column_stack([np.cos(angles), np.sin(angles)])


def eval_plane_wave(k: float, d: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Plane wave exp(ik x.d) and its gradient ik d exp(ik x.d).

    Args:
        k: Wavenumber
        d: Unit direction (2,)
        x: Point (2,) or points (n, 2)

    Returns:
        (value, gradient) with shapes () / (2,) or (n,) / (n, 2)
    """
    d = np.asarray(d, dtype=float)
    x = np.asarray(x, dtype=float)
    value = np.exp(1j * k * (x @ d))
    gradient = 1j * k * np.multiply.outer(value, d)
    return value, gradient


@dataclass(frozen=True)
class PlaneWaveSpace:
    """
    Uniform-p plane-wave space over a mesh.

    Global DOF of local function l on element K is K * p + l, so every
    element owns a contiguous block of p columns.
    """
    k: float
    p: int
    n_elements: int
    directions: np.ndarray

    @classmethod
    def build(cls, mesh, k: float, p: int) -> "PlaneWaveSpace":
        space = cls(k=float(k), p=int(p), n_elements=mesh.n_elements, directions=directions(p))
        logger.debug(f"Plane-wave space: p={p}, elements={space.n_elements}, N_h={space.n_dofs}")
        return space

    @property
    def n_dofs(self) -> int:
        return self.p * self.n_elements

    def global_index(self, element: int, local: int) -> int:
        if not (0 <= element < self.n_elements and 0 <= local < self.p):
            raise IndexError(f"No DOF ({element}, {local})")
        return element * self.p + local

    def local_index(self, dof: int) -> Tuple[int, int]:
        if not 0 <= dof < self.n_dofs:
            raise IndexError(f"No DOF {dof}")
        return divmod(dof, self.p)

    def dofs(self, element: int) -> slice:
        return slice(element * self.p, (element + 1) * self.p)

    def phases(self, points: np.ndarray) -> np.ndarray:
        """exp(ik x.d_l) for all directions, shape (n, p)."""
        return np.exp(1j * self.k * (np.atleast_2d(points) @ self.directions.T))

    def traces(self, points: np.ndarray, normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Values and normal derivatives of the p local functions.

        Args:
            points: (nq, 2) trace points
            normals: (nq, 2) unit normals

        Returns:
            (values, normal_derivatives), each (p, nq)
        """
        values = self.phases(points).T
        normal_factor = 1j * self.k * (self.directions @ np.atleast_2d(normals).T)
        return values, normal_factor * values

    def evaluate(self, coefficients: np.ndarray, points: np.ndarray, element_ids: np.ndarray) -> np.ndarray:
        """Field sum_l c_{K,l} exp(ik x.d_l) with K the element of each point."""
        local = np.asarray(coefficients).reshape(self.n_elements, self.p)[element_ids]
        return np.sum(local * self.phases(points), axis=1)

    def gradient(self, coefficients: np.ndarray, points: np.ndarray, element_ids: np.ndarray) -> np.ndarray:
        """Gradient of the field, shape (n, 2)."""
        local = np.asarray(coefficients).reshape(self.n_elements, self.p)[element_ids]
        weighted = local * self.phases(points)
        return 1j * self.k * (weighted @ self.directions)
