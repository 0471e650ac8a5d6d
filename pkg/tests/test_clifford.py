"""Tests for Clifford algebras over F_p, Pin, Spin and the spinor module."""

import numpy as np
import pytest

from src.clifford import (
    CliffordAlgebra, QuadraticSpace, exterior_operators, lipschitz_group, orthogonal_group_of_space,
    pin_spin_report, reflection_generated_group, reflection_matrix, spinor_module, spinor_norm,
    square_class, twisted_conjugation_matrix,
)
from src.exceptions import CapExceeded, EvenPrime, InvalidForm, NotPrime, ParentMismatch
from src.linalg import determinant_mod_p


@pytest.fixture
def plane():
    """The split plane over F_3: q(l, phi) = phi(l)."""
    return QuadraticSpace.split(1, 3)


@pytest.fixture
def algebra(plane):
    return CliffordAlgebra(plane)


def test_space_checks_prime():
    """Test p must be an odd prime."""
    with pytest.raises(EvenPrime):
        QuadraticSpace.from_diagonal((1,), 2)
    with pytest.raises(NotPrime):
        QuadraticSpace.from_diagonal((1,), 9)


def test_space_rejects_asymmetric_gram():
    """Test b must be symmetric."""
    with pytest.raises(InvalidForm):
        QuadraticSpace(3, (0, 0), ((0, 1), (0, 0)))


def test_split_space_values(plane):
    """Test q(x, y) = xy and the Gram matrix."""
    assert plane.gram_matrix.tolist() == [[0, 1], [1, 0]]
    assert int(plane.q(np.array([2, 2]))) == 1
    assert plane.is_nondegenerate()
    assert not QuadraticSpace.from_diagonal((1, 0), 3).is_nondegenerate()
    assert QuadraticSpace.hyperbolic_plane(5).diagonal == (1, 4)


def test_generator_relations(algebra, plane):
    """Test e_i^2 = q(e_i) and e_1 e_2 + e_2 e_1 = b(e_1, e_2)."""
    e1, e2 = algebra.generator(0), algebra.generator(1)
    assert e1 * e1 == algebra.scalar(0)
    assert e2 * e2 == algebra.scalar(0)
    assert e1 * e2 + e2 * e1 == algebra.scalar(1)
    assert algebra.dim == 4


def test_every_vector_squares_to_q(algebra, plane):
    """Test v^2 = q(v) for all 9 vectors."""
    for v in plane.vectors():
        x = algebra.vector(v.tolist())
        assert x * x == algebra.scalar(int(plane.q(v)))


@pytest.fixture(scope="module")
def split_three_over_f3():
    """Cl of the split form on F_3^6, a 64-dimensional algebra."""
    return CliffordAlgebra(QuadraticSpace.split(3, 3))


def test_multiplication_is_associative(split_three_over_f3):
    """Test (xy)z = x(yz) on 500 random triples in Cl(split(3, 3))."""
    algebra = split_three_over_f3
    rng = np.random.default_rng(0)
    for _ in range(500):
        x, y, z = (algebra.random_element(rng) for _ in range(3))
        assert (x * y) * z == x * (y * z)


def test_transpose_reverses_products(split_three_over_f3):
    """Test (xy)^T = y^T x^T on 500 random pairs and that vectors are fixed."""
    algebra = split_three_over_f3
    rng = np.random.default_rng(1)
    for _ in range(500):
        x, y = algebra.random_element(rng), algebra.random_element(rng)
        assert (x * y).transpose() == y.transpose() * x.transpose()
    v = algebra.vector([1, 2, 0, 2, 1, 0])
    assert v.transpose() == v


def test_inverse_and_parity(algebra):
    """Test an anisotropic vector is invertible and an isotropic one is not."""
    v = algebra.vector([1, 1])
    assert v.inverse() == v
    assert algebra.generator(0).inverse() is None
    assert v.parity() == 1
    assert algebra.one().parity() == 0
    assert (algebra.one() + v).parity() is None


def test_elements_of_different_algebras_do_not_mix(algebra):
    """Test ParentMismatch across algebras."""
    other = CliffordAlgebra(QuadraticSpace.split(1, 3))
    with pytest.raises(ParentMismatch):
        algebra.one() + other.one()


def test_algebra_cap(plane):
    """Test the structure tensor cap."""
    with pytest.raises(CapExceeded):
        CliffordAlgebra(plane, cap=10)


def test_twisted_conjugation_of_vector_is_reflection(algebra, plane):
    """Test -v x v^-1 is the reflection in v."""
    v = algebra.vector([1, 1])
    assert np.array_equal(twisted_conjugation_matrix(v) % 3, reflection_matrix(plane, [1, 1]))
    assert np.array_equal(twisted_conjugation_matrix(algebra.scalar(2)), np.eye(2, dtype=np.int64))


def test_reflection_matrix(plane):
    """Test reflections preserve q, have determinant -1 and refuse isotropic vectors."""
    r = reflection_matrix(plane, [1, 2])
    vectors = plane.vectors()
    assert np.array_equal(plane.q((vectors @ r.T) % 3), plane.q(vectors))
    assert determinant_mod_p(r, 3) == 2
    with pytest.raises(ValueError):
        reflection_matrix(plane, [1, 0])


def test_orthogonal_group_of_space(plane):
    """Test |O| = 4 on the split plane and a degenerate space is refused."""
    assert len(orthogonal_group_of_space(plane)) == 4
    assert len(reflection_generated_group(plane)) == 4
    with pytest.raises(InvalidForm):
        orthogonal_group_of_space(QuadraticSpace.from_diagonal((1, 0), 3))


def test_spinor_norm_of_vector(algebra, plane):
    """Test N(v) = q(v)."""
    for v in ([1, 1], [1, 2], [2, 2]):
        assert spinor_norm(algebra.vector(v)) == int(plane.q(np.array(v)))


def test_square_class():
    """Test the Legendre symbol wrapper."""
    assert square_class(1, 3) == 1
    assert square_class(2, 3) == -1
    assert square_class(4, 5) == 1


def test_lipschitz_group_of_split_plane(plane):
    """Test |Gamma| = |O| |F_3^x| with scalar kernel."""
    report = lipschitz_group(plane)
    assert len(report.elements) == 8
    assert len(report.orthogonal) == 4
    assert report.kernel_is_scalars
    assert report.surjective


def test_lipschitz_cap(plane):
    """Test the candidate cap."""
    with pytest.raises(CapExceeded):
        lipschitz_group(plane, cap=5)


def test_pin_spin_report_on_split_plane(plane):
    """Test |Pin| = 4 and |Spin| = 2 with every consistency flag set."""
    report = pin_spin_report(plane)
    data = report.to_json()
    assert data["gamma_order"] == 8
    assert data["orthogonal_order"] == 4
    assert data["pin_order"] == 4
    assert data["spin_order"] == 2
    assert data["norm_kernel_order"] == 2
    for flag in ("kernel_is_scalars", "surjective", "pin_onto_norm_kernel",
                 "reflections_generate_orthogonal", "pin_kernel_is_plus_minus_one",
                 "diagram_commutes", "determinant_matches_parity"):
        assert data[flag] is True, flag


def test_pin_spin_report_on_anisotropic_plane():
    """Test x^2 + y^2 over F_3, where -1 is not a square."""
    space = QuadraticSpace.from_diagonal((1, 1), 3)
    report = pin_spin_report(space)
    assert report.gamma_order == report.orthogonal_order * 2
    assert report.orthogonal_order == 8
    assert report.reflection_group_order == 8
    assert report.reflections_generate_orthogonal
    assert report.surjective
    assert report.diagram_commutes
    assert report.determinant_matches_parity


def test_exterior_operators_square_to_zero():
    """Test wedge and contraction are nilpotent."""
    wedges, contractions = exterior_operators(2, 3)
    for op in wedges + contractions:
        assert not ((op @ op) % 3).any()


@pytest.mark.parametrize("n,p", [(1, 3), (2, 3), (1, 5)])
def test_spinor_module_is_bijective(n, p):
    """Test Cl(L + L*) = End(exterior algebra)."""
    report = spinor_module(n, p)
    assert report.clifford_dimension == 4 ** n
    assert report.module_dimension == 2 ** n
    assert report.rank == 4 ** n
    assert report.bijective
    assert report.to_json()["bijective"] is True
