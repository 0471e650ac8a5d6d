"""Tests for finite abelian groups, homomorphisms and duality."""

import pytest

from src.abelian import (
    FiniteAbelianGroup, Homomorphism, abstract_abelian_structure, characters, compose, dual,
    enumerate_automorphisms, enumerate_elements, enumerate_homomorphisms, identity,
    is_perfect_pairing, pairing_matrix,
)
from src.exceptions import CapExceeded, InvalidHomomorphism, ParentMismatch, ShapeMismatch
from src.scalars import RootOfUnity


@pytest.fixture
def z2_z4():
    return FiniteAbelianGroup((2, 4))


def test_group_basics(z2_z4):
    """Test order, exponent and lexicographic indexing."""
    assert z2_z4.order == 8
    assert z2_z4.exponent == 4
    assert z2_z4.rank == 2
    assert z2_z4.index_of((1, 3)) == 7
    assert z2_z4.coords_at(5) == (1, 1)
    assert [e.coords for e in enumerate_elements(z2_z4)][:3] == [(0, 0), (0, 1), (0, 2)]


def test_trivial_group():
    """Test the group with no factors."""
    trivial = FiniteAbelianGroup.trivial()
    assert trivial.order == 1
    assert trivial.exponent == 1
    assert len(trivial.elements()) == 1


def test_invalid_orders_rejected():
    """Test that non-positive cyclic orders are refused."""
    with pytest.raises(ValueError):
        FiniteAbelianGroup((2, 0))


def test_element_arithmetic(z2_z4):
    """Test addition, negation and scalar multiples."""
    a = z2_z4.element((1, 3))
    b = z2_z4.element((1, 2))
    assert (a + b).coords == (0, 1)
    assert (-a).coords == (1, 1)
    assert (3 * a).coords == (1, 1)
    assert z2_z4.element_order(a) == 4
    assert (a - a).is_zero()


def test_elements_of_different_groups_do_not_mix(z2_z4):
    """Test ParentMismatch on mixed operands."""
    other = FiniteAbelianGroup((4, 2))
    with pytest.raises(ParentMismatch):
        z2_z4.element((1, 1)) + other.element((1, 1))


def test_addition_table_matches_elements(z2_z4):
    """Test the vectorized addition table."""
    elements = z2_z4.elements()
    table = z2_z4.addition_table
    for a in elements:
        for b in elements:
            assert table[a.index, b.index] == (a + b).index


def test_direct_sum_and_json(z2_z4):
    """Test direct sums and the group JSON format."""
    assert z2_z4.direct_sum(FiniteAbelianGroup((3,))).cyclic_orders == (2, 4, 3)
    assert z2_z4.to_json() == {"orders": [2, 4]}
    assert FiniteAbelianGroup.from_json({"orders": [2, 4]}) == z2_z4


def test_homomorphism_well_definedness():
    """Test that an entry not killed by the source order is rejected."""
    z2, z4 = FiniteAbelianGroup((2,)), FiniteAbelianGroup((4,))
    with pytest.raises(InvalidHomomorphism):
        Homomorphism(z2, z4, ((1,),))
    f = Homomorphism(z2, z4, ((2,),))
    assert f.apply(z2.element(1)).coords == (2,)
    assert f.kernel_size() == 1
    with pytest.raises(ShapeMismatch):
        Homomorphism(z2, z4, ((1, 0),))


def test_compose_and_inverse(z2_z4):
    """Test composition and the brute-force inverse."""
    f = Homomorphism(z2_z4, z2_z4, ((1, 0), (2, 1)))
    g = f.inverse()
    assert compose(f, g).is_identity()
    assert compose(g, f).is_identity()
    assert identity(z2_z4).is_identity()


@pytest.mark.parametrize("orders,count", [
    ((2,), 1), ((4,), 2), ((2, 2), 6), ((2, 4), 8), ((3, 3), 48),
])
def test_automorphism_counts(orders, count):
    """Test |Aut(A)| against the known values."""
    group = FiniteAbelianGroup(orders)
    automorphisms = enumerate_automorphisms(group)
    assert len(automorphisms) == count
    assert all(f.is_isomorphism() for f in automorphisms)


def test_automorphism_cap():
    """Test the enumeration cap."""
    with pytest.raises(CapExceeded):
        enumerate_automorphisms(FiniteAbelianGroup((2, 2, 2)), cap=4)


@pytest.mark.parametrize("source,target,count", [
    ((2,), (4,), 2), ((4,), (2,), 2), ((2, 2), (2,), 4), ((3,), (2,), 1),
])
def test_homomorphism_counts(source, target, count):
    """Test |Hom(A, B)| = prod gcd(n_i, m_j)."""
    homs = list(enumerate_homomorphisms(FiniteAbelianGroup(source), FiniteAbelianGroup(target)))
    assert len(homs) == count


def test_duality(z2_z4):
    """Test the character pairing."""
    duality = dual(z2_z4)
    assert duality.group == z2_z4
    assert duality.pairing((0, 1), (0, 1)) == RootOfUnity.of(4, 1)
    assert duality.pairing((1, 0), (1, 0)) == RootOfUnity.of(2, 1)
    assert duality.pairing((1, 0), (0, 1)).is_one()
    assert len(characters(z2_z4)) == 8
    assert pairing_matrix(z2_z4).shape == (8, 8)
    assert is_perfect_pairing(z2_z4)


def test_abstract_structure_of_a_subgroup():
    """Test decomposing the subgroup of Z/12 generated by 4 and 6."""
    decomposition = abstract_abelian_structure([4, 6], lambda a, b: (a + b) % 12, 0)
    assert decomposition.group.cyclic_orders == (6,)
    assert sorted(decomposition.items) == [0, 2, 4, 6, 8, 10]
    for element in decomposition.group.elements():
        assert decomposition.element_of(decomposition.item_at(element)) == element


def test_abstract_structure_respects_operation():
    """Test that the coordinate map is a homomorphism."""
    decomposition = abstract_abelian_structure([(1, 0), (0, 1)],
                                               lambda a, b: ((a[0] + b[0]) % 2, (a[1] + b[1]) % 4),
                                               (0, 0))
    group = decomposition.group
    assert group.order == 8
    for x in group.elements():
        for y in group.elements():
            u, v = decomposition.item_at(x), decomposition.item_at(y)
            product = ((u[0] + v[0]) % 2, (u[1] + v[1]) % 4)
            assert decomposition.element_of(product) == x + y
