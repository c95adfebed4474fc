"""
Tests for the PWDG system: DG-norm property, skeleton structure, load vector
and consistency with an exact outgoing solution.

Run:
    pytest tests/test_assembly.py -v
"""
import math

import numpy as np
import pytest
from scipy import special

from mesh import AnnulusMeshSpec, EdgeKind, build_annulus_mesh, edge_quadrature
from pwdg import (
    DtnOperator,
    FluxParams,
    LinearSystem,
    NonNegativityViolation,
    PlaneWaveSpace,
    SystemDimensionError,
    apply_form,
    assemble_rhs,
    assemble_system,
    dg_seminorm,
    quadratic_form_terms,
)


# ============================================================================
# FIXTURES
# ============================================================================

K = 4.0
R = 1.0


@pytest.fixture(scope="module")
def mesh():
    return build_annulus_mesh(AnnulusMeshSpec(a=0.5, R=R, n_layers=2, n_sectors=12))


@pytest.fixture(scope="module")
def space(mesh):
    return PlaneWaveSpace.build(mesh, K, 5)


@pytest.fixture(scope="module")
def flux():
    return FluxParams()


@pytest.fixture(scope="module")
def dtn(mesh, space):
    return DtnOperator.build(mesh, space, K, R, 10)


@pytest.fixture(scope="module")
def system(mesh, space, flux, dtn):
    return assemble_system(mesh, space, flux, K, dtn)


@pytest.fixture(scope="module")
def impedance_system(mesh, space, flux):
    return assemble_system(mesh, space, flux, K, impedance=True)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def outgoing_mode(order: int, k: float):
    """u = H_order(kr) e^{i order theta} and its gradient, from scipy."""

    def u(x):
        r = np.hypot(x[:, 0], x[:, 1])
        theta = np.arctan2(x[:, 1], x[:, 0])
        return special.hankel2(order, k * r) * np.exp(1j * order * theta)

    def grad_u(x):
        r = np.hypot(x[:, 0], x[:, 1])
        theta = np.arctan2(x[:, 1], x[:, 0])
        phase = np.exp(1j * order * theta)
        radial = k * special.h2vp(order, k * r) * phase
        angular = 1j * order / r * special.hankel2(order, k * r) * phase
        r_hat = np.column_stack([np.cos(theta), np.sin(theta)])
        theta_hat = np.column_stack([-np.sin(theta), np.cos(theta)])
        return radial[:, None] * r_hat + angular[:, None] * theta_hat

    return u, grad_u


# ============================================================================
# DG NORM
# ============================================================================

class TestDgNorm:
    """Im(v* A v) is a squared seminorm."""

    def test_non_negative_for_random_vectors(self, system, space, rng):
        """100 random vectors give a strictly positive seminorm."""
        for _ in range(100):
            assert dg_seminorm(random_vector(rng, space.n_dofs), system) > 0.0

    def test_impedance_non_negative(self, impedance_system, space, rng):
        """The impedance variant has the same property."""
        for _ in range(20):
            assert dg_seminorm(random_vector(rng, space.n_dofs), impedance_system) > 0.0

    def test_homogeneity(self, system, space, rng):
        """|c| scaling."""
        v = random_vector(rng, space.n_dofs)
        assert dg_seminorm(3.0j * v, system) == pytest.approx(3.0 * dg_seminorm(v, system), rel=1e-12)

    def test_zero_vector(self, system, space):
        """The zero vector has zero seminorm."""
        assert dg_seminorm(np.zeros(space.n_dofs, dtype=complex), system) == 0.0

    def test_violation_raises(self):
        """A matrix with negative imaginary quadratic form is reported."""
        A = -1j * np.eye(4)
        with pytest.raises(NonNegativityViolation):
            dg_seminorm(np.ones(4, dtype=complex), A)

    def test_length_mismatch(self, system):
        """Vector and matrix sizes must agree."""
        with pytest.raises(SystemDimensionError):
            dg_seminorm(np.ones(3, dtype=complex), system)

    def test_terms_sum_to_quadratic_form(self, mesh, space, flux, dtn, system, rng):
        """The edge-by-edge pieces add up to Im(v* A v), each non-negative."""
        for _ in range(5):
            v = random_vector(rng, space.n_dofs)
            terms = quadratic_form_terms(v, mesh, space, flux, K, dtn)
            assert all(value >= -1e-12 for value in terms.values())
            total = np.vdot(v, system.A @ v).imag
            assert sum(terms.values()) == pytest.approx(total, rel=1e-9)

    def test_impedance_terms_sum(self, mesh, space, flux, impedance_system, rng):
        """Same decomposition with the impedance condition."""
        v = random_vector(rng, space.n_dofs)
        terms = quadratic_form_terms(v, mesh, space, flux, K, impedance=True)
        total = np.vdot(v, impedance_system.A @ v).imag
        assert sum(terms.values()) == pytest.approx(total, rel=1e-9)


# ============================================================================
# STRUCTURE
# ============================================================================

class TestStructure:
    """Block pattern of the stiffness matrix."""

    def test_advective_blocks_antisymmetric(self, mesh, space):
        """Without penalties and boundaries, A_KK = -A_KK* and A_KL = A_LK*."""
        flux = FluxParams.model_construct(alpha=0.0, beta=0.0, delta=0.0)
        A = assemble_system(mesh, space, flux, K, boundary_terms=False).A
        scale = np.abs(A).max()
        for edge in mesh.edges_of_kind(EdgeKind.INTERIOR):
            first, second = (space.dofs(e) for e in edge.elements)
            np.testing.assert_allclose(A[first, second], A[second, first].conj().T, atol=1e-12 * scale)
        for element in range(mesh.n_elements):
            block = A[space.dofs(element), space.dofs(element)]
            np.testing.assert_allclose(block, -block.conj().T, atol=1e-12 * scale)

    def test_sparsity_follows_neighbours(self, mesh, space, system):
        """Blocks of elements sharing no edge are zero."""
        neighbours = {e: {e} for e in range(mesh.n_elements)}
        for edge in mesh.edges_of_kind(EdgeKind.INTERIOR):
            first, second = edge.elements
            neighbours[first].add(second)
            neighbours[second].add(first)
        dtn_elements = set(mesh.boundary_elements(EdgeKind.ARTIFICIAL).tolist())
        for test in range(mesh.n_elements):
            for trial in range(mesh.n_elements):
                coupled = trial in neighbours[test] or (test in dtn_elements and trial in dtn_elements)
                if not coupled:
                    assert not np.any(system.A[space.dofs(test), space.dofs(trial)])

    def test_impedance_differs_only_on_gamma_r(self, mesh, space, flux, dtn, system, impedance_system):
        """A_imp - A_DtN + A_DtN block equals the local Gamma_R differences."""
        delta = flux.delta
        expected = np.zeros_like(system.A)
        for edge in mesh.edges_of_kind(EdgeKind.ARTIFICIAL):
            rule = edge_quadrature(edge)
            V, D = space.traces(rule.nodes, rule.normals)
            w = rule.weights

            def gram(test, trial):
                return test.conj() @ (w * trial).T

            robin = D + 1j * K * V
            local_imp = 1j * K * gram(V, V) + gram(D, V) - delta / (1j * K) * gram(robin, robin)
            local_dtn = gram(D, V) - delta / (1j * K) * gram(D, D)
            dofs = space.dofs(edge.elements[0])
            expected[dofs, dofs] += local_imp - local_dtn

        actual = impedance_system.A - system.A + dtn.block(delta)
        np.testing.assert_allclose(actual, expected, atol=1e-11 * np.abs(system.A).max())

    def test_dtn_required(self, mesh, space, flux):
        """DtN mode without an operator raises."""
        with pytest.raises(SystemDimensionError, match="DtnOperator"):
            assemble_system(mesh, space, flux, K)

    def test_space_from_other_mesh(self, space, flux):
        """Element counts must agree."""
        other = build_annulus_mesh(AnnulusMeshSpec(a=0.5, R=R, n_layers=1, n_sectors=12))
        with pytest.raises(SystemDimensionError):
            assemble_system(other, space, flux, K, impedance=True)

    def test_wavenumber_mismatch(self, mesh, space, flux):
        """The basis wavenumber must be the problem's."""
        with pytest.raises(SystemDimensionError, match="wavenumber"):
            assemble_system(mesh, space, flux, 5.0, impedance=True)

    def test_flux_coefficients_positive(self):
        """Validated flux parameters are strictly positive."""
        with pytest.raises(ValueError):
            FluxParams(alpha=0.0)


# ============================================================================
# LOAD VECTOR
# ============================================================================

class TestLoadVector:
    """F from the Dirichlet datum."""

    def test_zero_datum(self, mesh, space, flux):
        """g = 0 gives F = 0."""
        F = assemble_rhs(mesh, space, flux, K, lambda x: np.zeros(len(x)))
        assert not np.any(F)

    def test_linear_in_datum(self, mesh, space, flux):
        """F(2 g1 - i g2) = 2 F(g1) - i F(g2)."""
        g1 = lambda x: np.exp(1j * K * x[:, 0])
        g2 = lambda x: x[:, 1] ** 2
        combined = assemble_rhs(mesh, space, flux, K, lambda x: 2.0 * g1(x) - 1j * g2(x))
        separate = 2.0 * assemble_rhs(mesh, space, flux, K, g1) - 1j * assemble_rhs(mesh, space, flux, K, g2)
        np.testing.assert_allclose(combined, separate, rtol=1e-13, atol=1e-14)

    def test_support_on_gamma_d(self, mesh, space, flux):
        """Only elements with a Dirichlet edge receive load."""
        F = assemble_rhs(mesh, space, flux, K, lambda x: -np.exp(1j * K * x[:, 0]))
        owners = set(mesh.boundary_elements(EdgeKind.DIRICHLET).tolist())
        for element in range(mesh.n_elements):
            block = F[space.dofs(element)]
            assert np.any(block) == (element in owners)

    def test_system_with_datum(self, mesh, space, flux, dtn):
        """assemble_system fills F from g."""
        g = lambda x: -np.exp(1j * K * x[:, 0])
        system = assemble_system(mesh, space, flux, K, dtn, g=g)
        np.testing.assert_allclose(system.F, assemble_rhs(mesh, space, flux, K, g), rtol=1e-15)


# ============================================================================
# CONSISTENCY
# ============================================================================

class TestConsistency:
    """An exact outgoing solution satisfies the discrete equations."""

    @pytest.mark.parametrize("n_order", [2, 4, 10])
    def test_outgoing_mode_dtn(self, mesh, space, flux, dtn, n_order):
        """a(u, v) = l(v) for u = H_2(kr) e^{2i theta} once N >= 2."""
        u, grad_u = outgoing_mode(2, K)
        operator = dtn.with_order(n_order)
        applied = apply_form(mesh, space, flux, K, u, grad_u, operator)
        F = assemble_rhs(mesh, space, flux, K, u)
        assert np.linalg.norm(applied - F) <= 1e-7 * np.linalg.norm(F)

    def test_residual_under_quadrature_refinement(self, mesh, space, flux):
        """The relative residual stays below 1e-7 and does not grow from 20 to 40 points per edge."""
        u, grad_u = outgoing_mode(2, K)
        residuals = []
        for n_points in (20, 30, 40):
            operator = DtnOperator.build(mesh, space, K, R, 10, n_points=n_points)
            applied = apply_form(mesh, space, flux, K, u, grad_u, operator, n_points=n_points)
            F = assemble_rhs(mesh, space, flux, K, u, n_points=n_points)
            residuals.append(np.linalg.norm(applied - F) / np.linalg.norm(F))
        # rounding-level noise once the rule is exact enough
        assert all(later <= earlier + 1e-12 for earlier, later in zip(residuals, residuals[1:]))
        assert residuals[-1] <= 1e-7

    def test_truncation_below_mode_is_inconsistent(self, mesh, space, flux, dtn):
        """With N < 2 the mode is cut off and the residual is visible."""
        u, grad_u = outgoing_mode(2, K)
        applied = apply_form(mesh, space, flux, K, u, grad_u, dtn.with_order(1))
        F = assemble_rhs(mesh, space, flux, K, u)
        assert np.linalg.norm(applied - F) > 1e-3 * np.linalg.norm(F)

    def test_apply_form_matches_matrix(self, mesh, space, flux, dtn, system):
        """For a discrete trial field, apply_form reproduces A applied to its coefficients."""
        # a global plane wave is continuous, so it is a valid trial field
        d = space.directions[1]
        coefficients = np.zeros(space.n_dofs, dtype=complex)
        coefficients[1 :: space.p] = 1.0
        u = lambda x: np.exp(1j * K * x @ d)
        grad_u = lambda x: 1j * K * np.exp(1j * K * x @ d)[:, None] * d[None, :]
        applied = apply_form(mesh, space, flux, K, u, grad_u, dtn)
        np.testing.assert_allclose(applied, system.A @ coefficients, atol=1e-10 * np.linalg.norm(applied))


class TestLinearSystem:
    """Dense system container."""

    def test_shape_validation(self):
        """A square, F matching."""
        with pytest.raises(SystemDimensionError):
            LinearSystem(A=np.zeros((2, 3), dtype=complex), F=np.zeros(2, dtype=complex))
        with pytest.raises(SystemDimensionError):
            LinearSystem(A=np.eye(3, dtype=complex), F=np.zeros(2, dtype=complex))

    def test_residual(self):
        """Exact solutions have zero residual."""
        system = LinearSystem(A=np.diag([1.0, 2.0j]), F=np.array([1.0, 2.0j]))
        assert system.residual(np.array([1.0, 1.0])) == 0.0
        assert system.with_rhs(np.zeros(2)).residual(np.zeros(2)) == 0.0
