"""
PWDG field u_h evaluated anywhere in the annulus.
"""
from dataclasses import dataclass

import numpy as np

from mesh.annulus import Mesh
from pwdg.basis import PlaneWaveSpace
from pwdg.exceptions import SystemDimensionError


@dataclass(frozen=True)
class DiscreteSolution:
    """Coefficient vector bound to its mesh and plane-wave space."""
    mesh: Mesh
    space: PlaneWaveSpace
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape != (self.space.n_dofs,):
            raise SystemDimensionError(
                f"Expected {self.space.n_dofs} coefficients, got {self.coefficients.shape}"
            )

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return self.space.evaluate(self.coefficients, points, self.mesh.locate(points))

    def gradient(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return self.space.gradient(self.coefficients, points, self.mesh.locate(points))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)
