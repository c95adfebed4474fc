"""
Tests for the plane-wave space and the discrete solution wrapper.

Run:
    pytest tests/test_basis.py -v
"""
import math

import numpy as np
import pytest

from mesh import AnnulusMeshSpec, build_annulus_mesh
from pwdg import DiscreteSolution, PlaneWaveSpace, SystemDimensionError, directions, eval_plane_wave


# ============================================================================
# FIXTURES
# ============================================================================

@pytest.fixture
def mesh():
    return build_annulus_mesh(AnnulusMeshSpec(a=0.5, R=1.0, n_layers=2, n_sectors=12))


@pytest.fixture
def space(mesh):
    return PlaneWaveSpace.build(mesh, k=3.0, p=5)


# ============================================================================
# DIRECTIONS AND PLANE WAVES
# ============================================================================

class TestDirections:
    """Equispaced unit directions."""

    def test_four_directions(self):
        """p=4 gives the axis directions starting at pi/2."""
        expected = np.array([[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]])
        np.testing.assert_allclose(directions(4), expected, atol=1e-15)

    @pytest.mark.parametrize("p", [3, 5, 8, 13, 32])
    def test_unit_and_balanced(self, p):
        """Unit norm, vanishing sum."""
        d = directions(p)
        assert d.shape == (p, 2)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, rtol=1e-15)
        np.testing.assert_allclose(d.sum(axis=0), 0.0, atol=1e-13)

    def test_too_few_directions(self):
        """p < 3 raises."""
        with pytest.raises(ValueError, match="p must be >= 3"):
            directions(2)


class TestPlaneWave:
    """exp(ik x.d) and its gradient."""

    def test_modulus_and_gradient(self):
        """|value| = 1 and |grad|^2 = k^2."""
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.0, 1.0, size=(20, 2))
        d = directions(7)[2]
        value, gradient = eval_plane_wave(4.0, d, x)
        np.testing.assert_allclose(np.abs(value), 1.0, rtol=1e-14)
        np.testing.assert_allclose(np.sum(np.abs(gradient) ** 2, axis=1), 16.0, rtol=1e-13)

    def test_helmholtz_by_finite_differences(self):
        """Five-point Laplacian of the wave equals -k^2 times the wave."""
        k, h = 3.0, 1e-4
        d = directions(9)[4]
        rng = np.random.default_rng(2)
        for x in rng.uniform(-1.0, 1.0, size=(10, 2)):
            shifts = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
            neighbours, _ = eval_plane_wave(k, d, x + shifts)
            centre, _ = eval_plane_wave(k, d, x)
            laplacian = (neighbours.sum() - 4.0 * centre) / h ** 2
            assert abs(laplacian + k ** 2 * centre) <= 1e-5 * k ** 2


# ============================================================================
# SPACE
# ============================================================================

class TestPlaneWaveSpace:
    """DOF numbering, traces and evaluation."""

    def test_dof_bijection(self, space):
        """global_index and local_index are inverse."""
        assert space.n_dofs == space.p * space.n_elements
        for dof in range(space.n_dofs):
            element, local = space.local_index(dof)
            assert space.global_index(element, local) == dof

    def test_dof_blocks(self, space):
        """Element blocks are contiguous slices of width p."""
        assert space.dofs(3) == slice(15, 20)

    def test_index_errors(self, space):
        """Out-of-range indices raise."""
        with pytest.raises(IndexError):
            space.global_index(space.n_elements, 0)
        with pytest.raises(IndexError):
            space.local_index(space.n_dofs)

    def test_traces_match_plane_waves(self, space):
        """Trace rows equal the plane waves and their normal derivatives."""
        points = np.array([[0.6, 0.1], [0.2, 0.7], [-0.5, 0.5]])
        normals = np.array([[1.0, 0.0], [0.0, 1.0], [math.sqrt(0.5), math.sqrt(0.5)]])
        values, derivatives = space.traces(points, normals)
        assert values.shape == derivatives.shape == (space.p, 3)
        for local, d in enumerate(space.directions):
            value, gradient = eval_plane_wave(space.k, d, points)
            np.testing.assert_allclose(values[local], value, rtol=1e-14)
            np.testing.assert_allclose(derivatives[local], np.sum(gradient * normals, axis=1), rtol=1e-13)

    def test_evaluate_single_basis_function(self, mesh, space):
        """A one-hot coefficient vector reproduces one plane wave on one element only."""
        centres = mesh.vertices[mesh.elements].mean(axis=1)
        element, local = 7, 2
        coefficients = np.zeros(space.n_dofs, dtype=complex)
        coefficients[space.global_index(element, local)] = 1.0
        values = space.evaluate(coefficients, centres, np.arange(mesh.n_elements))
        expected, gradient = eval_plane_wave(space.k, space.directions[local], centres[element])
        assert values[element] == pytest.approx(expected, rel=1e-14)
        assert np.count_nonzero(values) == 1
        grads = space.gradient(coefficients, centres, np.arange(mesh.n_elements))
        np.testing.assert_allclose(grads[element], gradient, rtol=1e-13)


class TestDiscreteSolution:
    """Coefficient vector bound to a mesh."""

    def test_evaluate_locates_points(self, mesh, space):
        """DiscreteSolution finds the element of each point by itself."""
        rng = np.random.default_rng(3)
        coefficients = rng.standard_normal(space.n_dofs) + 1j * rng.standard_normal(space.n_dofs)
        solution = DiscreteSolution(mesh, space, coefficients)
        centres = mesh.vertices[mesh.elements].mean(axis=1)
        expected = space.evaluate(coefficients, centres, np.arange(mesh.n_elements))
        np.testing.assert_allclose(solution(centres), expected, rtol=1e-14)
        assert solution.gradient(centres).shape == (mesh.n_elements, 2)

    def test_wrong_length(self, mesh, space):
        """Coefficient count must match N_h."""
        with pytest.raises(SystemDimensionError):
            DiscreteSolution(mesh, space, np.zeros(space.n_dofs - 1, dtype=complex))
