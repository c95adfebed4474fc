"""
Relative L2 errors on the annulus.
"""
import math
from typing import Callable, Union

import numpy as np

from mesh.quadrature import QuadratureRule

Field = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


class ZeroReferenceNormError(ValueError):
    """The reference field has zero L2 norm."""


def _sample(field: Field, quad: QuadratureRule) -> np.ndarray:
    if callable(field):
        return np.asarray(field(quad.nodes), dtype=complex)
    values = np.asarray(field, dtype=complex)
    if values.shape != quad.weights.shape:
        raise ValueError(f"Expected {quad.weights.size} samples, got {values.shape}")
    return values


def l2_norm(field: Field, quad: QuadratureRule) -> float:
    """sqrt(int |f|^2) with the given rule."""
    values = _sample(field, quad)
    return math.sqrt(float(np.sum(quad.weights * np.abs(values) ** 2)))


def relative_l2_error(u_h: Field, reference: Field, quad: QuadratureRule) -> float:
    """
    ||u_h - reference|| / ||reference|| over the annulus.

    Args:
        u_h: Discrete solution (callable on points) or its samples at quad.nodes
        reference: Reference field, callable or samples
        quad: annulus_l2_quadrature rule

    Raises:
        ZeroReferenceNormError: ||reference|| = 0
    """
    ref = _sample(reference, quad)
    denominator = math.sqrt(float(np.sum(quad.weights * np.abs(ref) ** 2)))
    if denominator == 0.0:
        raise ZeroReferenceNormError("Reference field has zero L2 norm")
    difference = _sample(u_h, quad) - ref
    return math.sqrt(float(np.sum(quad.weights * np.abs(difference) ** 2))) / denominator
