"""Cross-module regression values at desk scale."""

import itertools
import pytest

from src.abelian import FiniteAbelianGroup, Homomorphism, identity
from src.center import (
    PointedFusionData, center_metric_group, classify_center, is_center_pointed,
    pointwise_trivializations, solve_trivialization,
)
from src.clifford import (
    CliffordAlgebra, QuadraticSpace, pin_spin_report, spinor_module, spinor_norm, square_class,
)
from src.cohomology import (
    Cochain, Coefficients, carry_cocycle, cohomology, em_correspondence, is_abelian_3cocycle,
    product_cocycle, quadratic_form_of, standard_carry_cocycle, torsor_and_coefficient_report,
)
from src.exceptions import NoSolution, NotSquareOrder
from src.orthogonal import (
    determinant, is_isometric, is_subgroup, orthogonal_group, special_orthogonal_group,
    split_orthogonal_check,
)
from src.quadratic import MetricGroup, enumerate_quadratic_forms, evaluation_form, split_form, square_form
from src.subgroups import count_isotropic_cyclic_subgroups, lagrangian_subgroups

SMALL_LATTICES = [(2,), (3,), (4,), (2, 2), (5,), (6,), (7,), (8,), (2, 4), (2, 2, 2)]


@pytest.mark.parametrize("orders", [(), (2,), (3,), (2, 2)])
def test_abelian_cohomology_matches_quadratic_forms(orders):
    """Test |H^3_ab(A)| = |Quad(A)| with the form count taken independently."""
    group = FiniteAbelianGroup(orders)
    report = em_correspondence(group)
    assert report.class_count == len(enumerate_quadratic_forms(group))
    assert report.bijective


def test_z2_has_four_abelian_classes():
    """Test both sides are 4 on Z/2."""
    report = em_correspondence(FiniteAbelianGroup((2,)))
    assert report.class_count == report.form_count == 4


def test_scalar_cohomology_of_z2():
    """Test H^2(Z/2, k^x) = 0 and H^3(Z/2, k^x) = Z/2."""
    z2 = FiniteAbelianGroup((2,))
    assert cohomology(z2, 2, Coefficients.scalars()).order == 1
    assert cohomology(z2, 3, Coefficients.scalars()).invariant_factors == [2]


@pytest.mark.parametrize("orders", SMALL_LATTICES)
def test_untwisted_center_is_ev(orders):
    """Test tau = 0 recovers ev and b agrees with q on the diagonal."""
    lattice = FiniteAbelianGroup(orders)
    d = PointedFusionData(lattice, Cochain.zero(lattice, 3, lattice.exponent))
    classification = classify_center(d, solve_trivialization(d))
    assert classification.metric == evaluation_form(lattice)
    assert quadratic_form_of(classification.cocycle_pair) == classification.metric.form


def _cocycle_classes(lattice):
    """One representative per class of H^3(L, k^x) for L = Z/3 or (Z/2)^2."""
    if lattice.rank == 1:
        carry = carry_cocycle(lattice)
        return [k * carry for k in range(lattice.order)]
    generators = [carry_cocycle(lattice, 0, 0), carry_cocycle(lattice, 1, 1), carry_cocycle(lattice, 0, 1)]
    classes = []
    for mask in itertools.product((0, 1), repeat=3):
        tau = Cochain.zero(lattice, 3, 2)
        for bit, g in zip(mask, generators):
            if bit:
                tau = tau + g
        classes.append(tau)
    return classes


@pytest.mark.parametrize("orders", [(3,), (2, 2)])
def test_pointed_centers_classify(orders):
    """Test every pointed class gives a double of order |L|^2 and every solvable one classifies to it."""
    lattice = FiniteAbelianGroup(orders)
    solved = 0
    for tau in _cocycle_classes(lattice):
        d = PointedFusionData(lattice, tau)
        if not is_center_pointed(d):
            with pytest.raises(NoSolution):
                center_metric_group(d)
            continue
        assert center_metric_group(d).metric.group.order == lattice.order ** 2
        try:
            t = solve_trivialization(d)
        except NoSolution:
            continue
        classification = classify_center(d, t)
        ok, witness = is_abelian_3cocycle(classification.cocycle_pair)
        assert ok, witness
        assert is_isometric(classification.metric, center_metric_group(d).metric)
        solved += 1
    assert solved >= 1


def test_cubic_coboundary_on_z3_classifies():
    """Test abc on Z/3 admits an additive trivialization that classifies."""
    z3 = FiniteAbelianGroup((3,))
    d = PointedFusionData(z3, product_cocycle(z3, 0, 0, 0))
    assert is_abelian_3cocycle(classify_center(d, solve_trivialization(d)).cocycle_pair)[0]


def test_pointedness_on_z3_cubed_against_h2_oracle():
    """Test symmetric and alternating classes on (Z/3)^3 against the pointwise solver."""
    group = FiniteAbelianGroup((3, 3, 3))
    symmetric = PointedFusionData(group, carry_cocycle(group, 0, 0))
    alternating = PointedFusionData(group, product_cocycle(group, 0, 1, 2))
    assert is_center_pointed(symmetric)
    assert all(t is not None for t in pointwise_trivializations(symmetric))
    assert not is_center_pointed(alternating)
    assert any(t is None for t in pointwise_trivializations(alternating))


@pytest.mark.parametrize("n,p,order", [(1, 3, 4), (1, 5, 8), (2, 3, 1152)])
def test_split_orthogonal_orders(n, p, order):
    """Test brute force against the split order formula with SO of index at most 2."""
    report = split_orthogonal_check(n, p)
    assert report.brute_force_order == order
    assert report.matches
    assert report.index in (1, 2)


def test_special_orthogonal_is_kernel_of_det():
    """Test det(id) = 1 and SO is a subgroup."""
    metric = split_form(1, 3)
    assert determinant(identity(metric.group)) == 1
    group = orthogonal_group(metric)
    special = special_orthogonal_group(group)
    assert is_subgroup(special.elements)
    assert group.order // special.order == 2


def test_clifford_of_split_plane_over_f3():
    """Test Cl, Gamma, Pin and the spinor module of the split plane over F_3."""
    space = QuadraticSpace.split(1, 3)
    algebra = CliffordAlgebra(space)
    assert algebra.dim == 4
    report = pin_spin_report(space)
    assert report.surjective
    assert report.kernel_is_scalars
    assert report.pin_kernel_is_plus_minus_one
    assert report.diagram_commutes
    for v in space.vectors():
        value = int(space.q(v))
        if value:
            assert square_class(spinor_norm(algebra.vector(v.tolist())), 3) == square_class(value, 3)
    assert spinor_module(1, 3).bijective


def test_extension_bookkeeping():
    """Test mu_16 and a Z/2 torsor for the swap on ev of Z/2."""
    metric = evaluation_form(FiniteAbelianGroup((2,)))
    swap = Homomorphism(metric.group, metric.group, ((0, 1), (1, 0)))
    data = torsor_and_coefficient_report(metric, [swap]).to_json()
    assert data["coefficient"] == "mu16"
    assert data["h3_invariant_factors"] == [2]
    with pytest.raises(NotSquareOrder):
        torsor_and_coefficient_report(MetricGroup(square_form(3)), [])


def test_lagrangians_against_direct_scan():
    """Test Lagrangians of ev on Z/3 against isotropic lines of the split form."""
    lagrangians = lagrangian_subgroups(evaluation_form(FiniteAbelianGroup((3,))))
    assert len(lagrangians) == count_isotropic_cyclic_subgroups(split_form(1, 3).form, 3) == 2


def test_carry_class_is_nontrivial():
    """Test the carry representative used above generates H^3(Z/3)."""
    z3 = FiniteAbelianGroup((3,))
    h = cohomology(z3, 3, Coefficients.scalars())
    assert not h.is_coboundary(standard_carry_cocycle(3))
    assert h.is_coboundary(0 * standard_carry_cocycle(3))
