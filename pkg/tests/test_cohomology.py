"""Tests for group cohomology, abelian cocycles and the degree-4 torsor report."""

import numpy as np
import pytest

from src.abelian import FiniteAbelianGroup, Homomorphism, identity
from src.cohomology import (
    AbelianThreeCocycle, Coefficients, Cochain, abelian_cohomology, abelian_cocycle_witness,
    carry_cocycle, cocycle_count_brute_force, cocycle_witness, cohomology, differential,
    em_correspondence, is_abelian_3cocycle, is_coboundary, is_cocycle, normalize,
    product_cocycle, pullback, quadratic_form_of, standard_carry_cocycle, t_tensor,
    torsor_and_coefficient_report,
)
from src.exceptions import (
    CapExceeded, InvalidCocycle, NotSquareOrder, ShapeMismatch, VerificationFailure,
)
from src.orthogonal import minus_identity
from src.quadratic import MetricGroup, evaluation_form, split_form, square_form


@pytest.fixture
def z3():
    return FiniteAbelianGroup((3,))


def test_cochain_shape_checked(z3):
    """Test the table shape must be (|G|,) * degree."""
    with pytest.raises(ShapeMismatch):
        Cochain(z3, 2, 3, np.zeros((3,), dtype=int))
    with pytest.raises(ValueError):
        Cochain(z3, -1, 3, np.zeros(()))


def test_differential_squares_to_zero(z3):
    """Test d(d(f)) = 0 for an arbitrary 1-cochain and 2-cochain."""
    f = Cochain(z3, 1, 5, [0, 2, 4])
    assert differential(differential(f)).is_zero()
    g = Cochain(z3, 2, 7, np.arange(9).reshape(3, 3))
    assert differential(differential(g)).is_zero()


def test_cocycle_witness_names_arguments(z3):
    """Test f(1) = 1, f(2) = 0 fails additivity at (1, 1)."""
    f = Cochain(z3, 1, 3, [0, 1, 0])
    witness = cocycle_witness(f)
    assert witness["relation"] == "cocycle"
    assert witness["arguments"] == [[1], [1]]
    assert not is_cocycle(f)


def test_carry_cocycle_is_normalized_cocycle(z3):
    """Test the carry 3-cocycle on Z/3."""
    tau = standard_carry_cocycle(3)
    assert tau.modulus == 3
    assert is_cocycle(tau)
    assert tau.is_normalized()
    assert tau(z3.element(1), z3.element(1), z3.element(2)) == tau(z3.element(1), z3.element(2),
                                                                   z3.element(1))


def test_carry_cocycle_embedding(z3):
    """Test the modulus must be a multiple of n_i."""
    assert carry_cocycle(z3, modulus=9).modulus == 9
    with pytest.raises(ValueError):
        carry_cocycle(z3, modulus=4)


def test_product_cocycle_is_cocycle():
    """Test a_0 b_1 c_2 on (Z/3)^3 satisfies the cocycle condition."""
    group = FiniteAbelianGroup((3, 3, 3))
    tau = product_cocycle(group, 0, 1, 2)
    assert tau.modulus == 3
    assert is_cocycle(tau)


@pytest.mark.parametrize("orders,degree,factors", [
    ((2,), 2, []),
    ((2,), 3, [2]),
    ((3,), 3, [3]),
    ((4,), 3, [4]),
    ((2, 2), 2, [2]),
])
def test_cohomology_with_scalar_coefficients(orders, degree, factors):
    """Test H^n(G, k^x) = H^(n+1)(G, Z) on small groups."""
    h = cohomology(FiniteAbelianGroup(orders), degree, Coefficients.scalars())
    assert h.invariant_factors == factors
    h.verify()


@pytest.mark.parametrize("orders,degree,modulus,factors", [
    ((4,), 1, 2, [2]),
    ((2,), 2, 2, [2]),
    ((3,), 2, 3, [3]),
    ((2,), 4, 16, [2]),
    ((2,), 4, 81, []),
])
def test_cohomology_with_finite_coefficients(orders, degree, modulus, factors):
    """Test H^n(Z/n, mu_N) = Z/gcd(n, N) for cyclic groups."""
    h = cohomology(FiniteAbelianGroup(orders), degree, Coefficients.mu(modulus))
    assert h.invariant_factors == factors
    h.verify()


def test_cohomology_scalars_degree_zero_rejected(z3):
    """Test H^0 with divisible coefficients is refused."""
    with pytest.raises(ValueError):
        cohomology(z3, 0, Coefficients.scalars())


def test_cohomology_matrix_cap(z3):
    """Test the differential matrix entry cap."""
    with pytest.raises(CapExceeded):
        cohomology(FiniteAbelianGroup((2, 2)), 3, Coefficients.scalars(), cap=10)


def test_carry_generates_h3(z3):
    """Test [tau] has coordinate 1 or 2 in H^3(Z/3, k^x)."""
    h = cohomology(z3, 3, Coefficients.scalars())
    tau = standard_carry_cocycle(3)
    assert not h.is_coboundary(tau)
    assert h.class_coordinates(tau)[0] in (1, 2)
    assert h.is_coboundary(Cochain.zero(z3, 3, 3))
    data = h.to_json()
    assert data["coefficients"] == "scalars"
    assert data["order"] == 3


def test_coboundary_over_scalars_but_not_mu2():
    """Test the 2-cocycle c(1, 1) = -1 on Z/2 trivializes only after adjoining i."""
    z2 = FiniteAbelianGroup((2,))
    c = Cochain(z2, 2, 2, [[0, 0], [0, 1]])
    assert is_cocycle(c)
    assert is_coboundary(c) is None
    s = is_coboundary(c, full_scalars=True)
    assert s is not None
    assert differential(s) == c.embed(s.modulus)


@pytest.mark.parametrize("orders,degree,modulus", [((2,), 2, 2), ((3,), 2, 3), ((2,), 3, 2)])
def test_brute_force_counts_match(orders, degree, modulus):
    """Test |Z^n| / |B^n| against the linear-algebra answer."""
    group = FiniteAbelianGroup(orders)
    cocycles, coboundaries = cocycle_count_brute_force(group, degree, modulus)
    assert cocycles // coboundaries == cohomology(group, degree, Coefficients.mu(modulus)).order


def test_normalize_keeps_class(z3):
    """Test normalize returns c - ds with a normalized cocycle."""
    tau = standard_carry_cocycle(3)
    s = Cochain(z3, 2, 3, [[1, 0, 2], [0, 1, 0], [2, 0, 0]])
    shifted = tau + differential(s)
    assert not shifted.is_normalized()
    normalized, shift = normalize(shifted)
    assert normalized.is_normalized()
    assert is_cocycle(normalized)
    assert normalized == shifted - differential(shift)


def test_pullback(z3):
    """Test pulling back along the identity and along negation."""
    tau = standard_carry_cocycle(3)
    assert pullback(tau, identity(z3)) == tau
    assert is_cocycle(pullback(tau, minus_identity(z3)))


def test_t_tensor_needs_degree_three(z3):
    """Test T is only defined for 3-cochains."""
    with pytest.raises(ShapeMismatch):
        t_tensor(Cochain.zero(z3, 2, 3))
    assert not t_tensor(Cochain.zero(z3, 3, 3)).any()


def test_bilinear_pair_gives_its_diagonal(z3):
    """Test (0, b) with b(x, y) = xy gives q(a) = zeta_3^(a^2)."""
    b = np.outer(np.arange(3), np.arange(3))
    x = AbelianThreeCocycle(z3, 3, Cochain.zero(z3, 3, 3), b)
    assert is_abelian_3cocycle(x) == (True, None)
    assert quadratic_form_of(x) == square_form(3)


def test_non_bilinear_pair_rejected(z3):
    """Test a b with a single non-zero entry fails a hexagon."""
    b = np.zeros((3, 3), dtype=int)
    b[1, 1] = 1
    x = AbelianThreeCocycle(z3, 3, Cochain.zero(z3, 3, 3), b)
    ok, witness = is_abelian_3cocycle(x)
    assert not ok
    assert witness["relation"].startswith("hexagon")
    with pytest.raises(InvalidCocycle):
        quadratic_form_of(x)


def test_non_cocycle_tau_fails_pentagon(z3):
    """Test the pentagon is checked first."""
    tau = Cochain.zero(z3, 3, 3)
    tau.table[1, 1, 1] = 1
    x = AbelianThreeCocycle(z3, 3, tau, np.zeros((3, 3), dtype=int))
    assert abelian_cocycle_witness(x)["relation"] == "pentagon"


def test_abelian_cohomology_cap():
    """Test groups above the supported order are refused."""
    with pytest.raises(CapExceeded):
        abelian_cohomology(FiniteAbelianGroup((5,)), 10)


@pytest.mark.parametrize("orders,count", [((), 1), ((2,), 4), ((3,), 3), ((2, 2), 32)])
def test_em_correspondence(orders, count):
    """Test abelian cohomology classes biject with quadratic forms."""
    report = em_correspondence(FiniteAbelianGroup(orders))
    assert report.class_count == count
    assert report.form_count == count
    assert report.bijective
    assert report.to_json()["bijective"] is True


def test_abelian_classes_are_cocycles():
    """Test every class representative on Z/2 passes the hexagons."""
    h = abelian_cohomology(FiniteAbelianGroup((2,)), 4)
    classes = h.classes()
    assert len(classes) == h.order == 4
    assert all(abelian_cocycle_witness(x) is None for x in classes)


def test_torsor_report_for_swap_on_z2():
    """Test G = <swap> inside O(ev on Z/2)."""
    metric = evaluation_form(FiniteAbelianGroup((2,)))
    swap = Homomorphism(metric.group, metric.group, ((0, 1), (1, 0)))
    report = torsor_and_coefficient_report(metric, [swap])
    data = report.to_json()
    assert data["l"] == 2
    assert data["coefficient"] == "mu16"
    assert data["subgroup_order"] == 2
    assert data["h4_invariant_factors"] == [2]
    assert data["torsor_size"] == 2


def test_torsor_report_for_minus_identity_on_z3():
    """Test G = <-1> on the split plane over F_3."""
    metric = split_form(1, 3)
    report = torsor_and_coefficient_report(metric, [minus_identity(metric.group)])
    data = report.to_json()
    assert data["coefficient"] == "mu81"
    assert data["subgroup_structure"] == {"orders": [2]}
    assert data["h4_order"] == 1
    assert data["torsor_size"] == 2


def test_torsor_report_rejects_non_square_order():
    """Test |A| = 3 is not a square."""
    with pytest.raises(NotSquareOrder):
        torsor_and_coefficient_report(MetricGroup(square_form(3)), [])


def test_torsor_report_rejects_non_isometry():
    """Test (a, b) -> (a, 2b) does not preserve ab."""
    metric = split_form(1, 3)
    scale = Homomorphism(metric.group, metric.group, ((1, 0), (0, 2)))
    with pytest.raises(VerificationFailure):
        torsor_and_coefficient_report(metric, [scale])


def shear(metric, a, b):
    """(l, f) -> (l, f + phi(l)) for the alternating phi with phi(e_b) = e_a^."""
    rank = metric.group.rank
    k = rank // 2
    rows = [[int(i == j) for j in range(rank)] for i in range(rank)]
    rows[k + a][b] += 1
    rows[k + b][a] -= 1
    return Homomorphism(metric.group, metric.group, tuple(tuple(r) for r in rows))


def test_torsor_report_for_shear_on_ev_of_z3_squared():
    """Test a Z/3 of shears inside O(ev on (Z/3)^2)."""
    metric = evaluation_form(FiniteAbelianGroup((3, 3)))
    report = torsor_and_coefficient_report(metric, [shear(metric, 0, 1)])
    data = report.to_json()
    assert data["coefficient"] == "mu6561"
    assert data["subgroup_structure"] == {"orders": [3]}
    assert data["h3_invariant_factors"] == [3]


def test_torsor_report_forwards_matrix_cap():
    """Test the matrix cap reaches the cohomology computation."""
    metric = evaluation_form(FiniteAbelianGroup((3, 3)))
    with pytest.raises(CapExceeded):
        torsor_and_coefficient_report(metric, [shear(metric, 0, 1)], cap=100)


def test_torsor_report_order_nine_needs_raised_cap():
    """Test |G| = 9 stops at the default matrix cap with the matrix shape as witness."""
    metric = evaluation_form(FiniteAbelianGroup((3, 3, 3)))
    generators = [shear(metric, 0, 1), shear(metric, 0, 2)]
    with pytest.raises(CapExceeded) as exc_info:
        torsor_and_coefficient_report(metric, generators)
    assert exc_info.value.witness["rows"] == 4096
    assert exc_info.value.witness["cols"] == 512


@pytest.mark.slow
def test_torsor_report_order_nine_with_raised_cap():
    """Test H^3((Z/3)^2, k^x) = (Z/3)^3 once the cap allows it."""
    metric = evaluation_form(FiniteAbelianGroup((3, 3, 3)))
    generators = [shear(metric, 0, 1), shear(metric, 0, 2)]
    report = torsor_and_coefficient_report(metric, generators, cap=5_000_000)
    data = report.to_json()
    assert data["subgroup_order"] == 9
    assert data["h4_order"] is None
    assert data["h3_invariant_factors"] == [3, 3, 3]
