"""Tests for quadratic forms, bicharacters and metric groups."""

import pytest

from src.abelian import FiniteAbelianGroup
from src.exceptions import EvenPrime, InvalidForm, NotPrime
from src.quadratic import (
    Bicharacter, MetricGroup, QuadraticForm, enumerate_bicharacters, enumerate_quadratic_forms,
    evaluation_form, form_from_values, is_nondegenerate, isotropic_vectors, polarize, split_form,
    square_form,
)
from src.scalars import RootOfUnity


@pytest.fixture
def z2():
    return FiniteAbelianGroup((2,))


@pytest.fixture
def z3():
    return FiniteAbelianGroup((3,))


def test_modulus_is_canonical(z2):
    """Test that equal value tables give equal forms."""
    assert QuadraticForm(z2, 8, (0, 4)) == QuadraticForm(z2, 2, (0, 1))
    assert QuadraticForm(z2, 8, (0, 4)).modulus == 2


def test_table_size_checked(z2):
    """Test a table of the wrong length."""
    with pytest.raises(InvalidForm):
        QuadraticForm(z2, 2, (0, 1, 0))


def test_axiom_witnesses(z2, z3):
    """Test the first failing axiom is named."""
    assert QuadraticForm(z2, 2, (1, 0)).check_axioms()["axiom"] == "q(0) = 1"
    assert QuadraticForm(z3, 3, (0, 1, 2)).check_axioms()["axiom"] == "q(-a) = q(a)"
    with pytest.raises(InvalidForm):
        polarize(QuadraticForm(z3, 3, (0, 1, 2)))


def test_square_form_values(z3):
    """Test q(a) = zeta_3^(a^2)."""
    q = square_form(3)
    assert q.exponents == (0, 1, 1)
    assert q.value(z3.element(2)) == RootOfUnity.of(3, 1)
    assert is_nondegenerate(q)


def test_square_form_on_z2_is_degenerate():
    """Test that q(a) = (-1)^(a^2) has trivial polarization."""
    q = square_form(2)
    assert q.is_valid()
    assert not is_nondegenerate(q)
    with pytest.raises(InvalidForm):
        MetricGroup(q)


def test_polarization_is_symmetric_bicharacter(z3):
    """Test <a, b> for the square form on Z/3."""
    b = polarize(square_form(3))
    assert b.check_axioms() is None
    assert b.value(z3.element(1), z3.element(1)) == RootOfUnity.of(3, 2)
    assert b.is_nondegenerate()


def test_evaluation_form_on_z2():
    """Test ev on Z/2 + Z/2^."""
    metric = evaluation_form(FiniteAbelianGroup((2,)))
    assert metric.group.cyclic_orders == (2, 2)
    assert metric.form.exponents == (0, 0, 0, 1)
    assert len(isotropic_vectors(metric.form)) == 3


def test_evaluation_form_mixed_orders():
    """Test ev on L = Z/2 + Z/4 is nondegenerate of order 64."""
    metric = evaluation_form(FiniteAbelianGroup((2, 4)))
    assert metric.group.order == 64
    assert metric.form.check_axioms() is None


def test_split_form_checks_prime():
    """Test the split form is only built over odd primes."""
    assert split_form(1, 3).group.cyclic_orders == (3, 3)
    with pytest.raises(EvenPrime):
        split_form(1, 2)
    with pytest.raises(NotPrime):
        split_form(1, 9)


def test_form_from_values_propagates(z2):
    """Test generator data on Z/2 + Z/2."""
    group = FiniteAbelianGroup((2, 2))
    i = RootOfUnity.of(4, 1)
    q = form_from_values(group, [i, i], {(0, 1): RootOfUnity.of(2, 1)})
    assert q.value(group.element((1, 1))) == i * i * RootOfUnity.of(2, 1)
    assert q.check_axioms() is None


def test_form_from_values_rejects_bad_data(z2):
    """Test q(1) = zeta_8 on Z/2 is not a quadratic form."""
    with pytest.raises(InvalidForm):
        form_from_values(z2, [RootOfUnity.of(8, 1)], {})


@pytest.mark.parametrize("orders,count,nondegenerate", [
    ((), 1, 1),
    ((2,), 4, 2),
    ((3,), 3, 2),
    ((4,), 8, 4),
    ((2, 2), 32, None),
])
def test_quadratic_form_counts(orders, count, nondegenerate):
    """Test |Quad(A)| and the nondegenerate subset."""
    group = FiniteAbelianGroup(orders)
    assert len(enumerate_quadratic_forms(group)) == count
    if nondegenerate is not None:
        assert len(enumerate_quadratic_forms(group, nondegenerate_only=True)) == nondegenerate


@pytest.mark.parametrize("orders", [(3,), (5,), (3, 3)])
def test_odd_order_forms_match_bicharacters(orders):
    """Test |Quad(A)| = |symmetric bicharacters| for odd |A|."""
    group = FiniteAbelianGroup(orders)
    assert len(enumerate_quadratic_forms(group)) == len(enumerate_bicharacters(group))


def test_bicharacter_table_checked(z2):
    """Test table size validation."""
    with pytest.raises(InvalidForm):
        Bicharacter(z2, 2, ((0, 0, 0),))


def test_json_round_trip():
    """Test the form JSON format is read back."""
    metric = evaluation_form(FiniteAbelianGroup((3,)))
    data = metric.to_json()
    assert data["group"] == {"orders": [3, 3]}
    assert {"elem", "order", "exp"} <= set(data["values"][0])
    assert MetricGroup.from_json(data) == metric


def test_form_file_must_list_every_element(z2):
    """Test a partial form file is rejected."""
    data = QuadraticForm(z2, 2, (0, 1)).to_json()
    data["values"] = data["values"][:1]
    with pytest.raises(InvalidForm):
        QuadraticForm.from_json(data)
