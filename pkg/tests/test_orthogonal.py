"""Tests for orthogonal groups and determinants."""

import pytest

from src.abelian import FiniteAbelianGroup, identity
from src.exceptions import CapExceeded, ParentMismatch
from src.orthogonal import (
    det_spectrum, determinant, determinant_is_multiplicative, is_isometric, is_normal,
    is_subgroup, map_key, minus_identity, orthogonal_group, orthogonal_group_by_filter,
    preserves_form, special_orthogonal_group, split_orthogonal_check, split_orthogonal_order,
    squarefree_part, subgroup_generated_by,
)
from src.quadratic import MetricGroup, QuadraticForm, evaluation_form, split_form, square_form


@pytest.fixture
def split_1_3():
    return split_form(1, 3)


def test_orthogonal_group_of_split_plane(split_1_3):
    """Test |O| = 4 and the determinant classes on (Z/3)^2."""
    group = orthogonal_group(split_1_3)
    assert group.order == 4
    assert minus_identity(split_1_3.group) in group
    assert det_spectrum(group) == {1: 2, 3: 2}
    assert special_orthogonal_group(group).order == 2


def test_orthogonal_group_of_evaluation_form_on_z2():
    """Test only the swap of the two axes preserves q on (Z/2)^2."""
    metric = evaluation_form(FiniteAbelianGroup((2,)))
    group = orthogonal_group(metric)
    assert group.order == 2
    assert det_spectrum(group) == {1: 1, 2: 1}


@pytest.mark.parametrize("lattice", [(2,), (3,), (4,)])
def test_generator_search_matches_filter(lattice):
    """Test the isometry search against filtering all automorphisms."""
    metric = evaluation_form(FiniteAbelianGroup(lattice))
    assert orthogonal_group(metric).keys() == orthogonal_group_by_filter(metric).keys()


def test_every_element_preserves_form(split_1_3):
    """Test q(f(a)) = q(a) for the computed group."""
    for f in orthogonal_group(split_1_3):
        assert preserves_form(f, split_1_3.form)


def test_preserves_form_checks_parent(split_1_3):
    """Test a map on a different group is refused."""
    with pytest.raises(ParentMismatch):
        preserves_form(identity(FiniteAbelianGroup((3,))), split_1_3.form)


def test_orthogonal_group_cap(split_1_3):
    """Test the automorphism cap applies to |A|."""
    with pytest.raises(CapExceeded):
        orthogonal_group(split_1_3, cap=4)


def test_special_orthogonal_is_normal_subgroup(split_1_3):
    """Test SO is a normal subgroup and det is multiplicative."""
    group = orthogonal_group(split_1_3)
    special = special_orthogonal_group(group)
    assert is_subgroup(list(special))
    assert is_normal(list(special), list(group))
    assert determinant_is_multiplicative(group)


def test_is_subgroup_needs_identity(split_1_3):
    """Test a set without the identity is not a subgroup."""
    assert not is_subgroup([minus_identity(split_1_3.group)])
    assert not is_subgroup([])


def test_determinant_values(split_1_3):
    """Test det(1) = 1 and det(-1) = squarefree part of |A|."""
    assert determinant(identity(split_1_3.group)) == 1
    assert determinant(minus_identity(split_1_3.group)) == 1
    assert determinant(minus_identity(FiniteAbelianGroup((3,)))) == 3


def test_squarefree_part():
    """Test representatives in Q+/(Q+)^2."""
    assert squarefree_part(1) == 1
    assert squarefree_part(12) == 3
    assert squarefree_part(81) == 1
    assert squarefree_part(18) == 2


def test_subgroup_generated_by(split_1_3):
    """Test <-1> has two elements, identity first."""
    closure = subgroup_generated_by([minus_identity(split_1_3.group)], split_1_3.group)
    assert len(closure) == 2
    assert closure[0].is_identity()
    assert len({map_key(f) for f in closure}) == 2


def test_isometry_detection():
    """Test a^2 and 2a^2 on Z/3 are not isometric, since 2 is not a square mod 3."""
    q1 = MetricGroup(square_form(3))
    q2 = MetricGroup(QuadraticForm(FiniteAbelianGroup((3,)), 3, (0, 2, 2)))
    assert is_isometric(q1, q1)
    assert not is_isometric(q1, q2)


@pytest.mark.parametrize("n,p,order", [(1, 3, 4), (1, 5, 8), (2, 3, 1152), (1, 7, 12)])
def test_split_orthogonal_order_formula(n, p, order):
    """Test 2 p^(n(n-1)) (p^n - 1) prod (p^(2i) - 1)."""
    assert split_orthogonal_order(n, p) == order


def test_split_orthogonal_order_rejects_rank_zero():
    """Test the formula needs n >= 1."""
    with pytest.raises(ValueError):
        split_orthogonal_order(0, 3)


@pytest.mark.parametrize("n,p", [(1, 3), (1, 5)])
def test_split_orthogonal_check(n, p):
    """Test brute force matches the formula with SO of index 2."""
    report = split_orthogonal_check(n, p)
    assert report.matches
    assert report.index == 2
    data = report.to_json()
    assert data["brute_force_order"] == split_orthogonal_order(n, p)
    assert sum(data["det_spectrum"].values()) == data["brute_force_order"]
