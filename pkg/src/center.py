"""Pointed Drinfeld centers of Vect[L] twisted by a 3-cocycle tau.

Every computation runs in mu_M with M = N * exp(L)^2, N the modulus of tau.
Scalars are divisible, so a 2-cocycle that is a coboundary over all roots of
unity already has a primitive with values in mu_M.
"""

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from agentstr.logger import get_logger

from .abelian import AbstractDecomposition, Element, FiniteAbelianGroup, Homomorphism, abstract_abelian_structure
from .cohomology import (
    AbelianThreeCocycle, Cochain, abelian_cocycle_witness, cocycle_witness, differential,
    is_coboundary, normalize, pullback, quadratic_form_of, t_tensor,
)
from .constants import DEFAULT_AUTOMORPHISM_CAP, DEFAULT_MATRIX_ENTRY_CAP
from .exceptions import (
    CapExceeded, HexagonViolation, InvalidCocycle, NoSolution, ParentMismatch, ShapeMismatch,
    VerificationFailure,
)
from .linalg import int_matrix, kernel_size_mod, solve_mod
from .orthogonal import is_isometric
from .quadratic import MetricGroup, QuadraticForm

logger = get_logger(__name__)

CORRECTIONS = ("antisymmetric", "symmetric")


@dataclass(eq=False)
class PointedFusionData:
    """A finite abelian group L with a normalized 3-cocycle tau.

    A cocycle that is not normalized is replaced by tau - d(shift); the shift
    is kept in ``shift``.
    """

    lattice: FiniteAbelianGroup
    tau: Cochain
    shift: Optional[Cochain] = None

    def __post_init__(self):
        if self.tau.group != self.lattice or self.tau.degree != 3:
            raise ShapeMismatch(f"tau must be a 3-cochain on {self.lattice}")
        witness = cocycle_witness(self.tau)
        if witness is not None:
            raise InvalidCocycle("tau is not a 3-cocycle", witness=witness)
        if not self.tau.is_normalized():
            self.tau, self.shift = normalize(self.tau)
            logger.info(f"tau on {self.lattice} normalized by a coboundary shift")

    @property
    def modulus(self) -> int:
        return self.tau.modulus

    @property
    def working_modulus(self) -> int:
        return self.modulus * self.lattice.exponent ** 2

    @cached_property
    def T(self) -> np.ndarray:
        """T[l, x, y] in mu_working_modulus."""
        return t_tensor(self.tau) * (self.working_modulus // self.modulus)

    def to_json(self) -> Dict[str, Any]:
        return {
            "lattice": self.lattice.to_json(),
            "tau": self.tau.to_json(),
            "normalization_shift": self.shift.to_json() if self.shift is not None else None,
        }


def _check_element(d: PointedFusionData, l: Element) -> None:
    if l.parent != d.lattice:
        raise ParentMismatch(f"element of {l.parent} used with L = {d.lattice}")


def t_two_cocycle(d: PointedFusionData, l: Element) -> Cochain:
    """T_l(x, y) = tau(l, x, y) + tau(x, y, l) - tau(x, l, y), valued in mu_N."""
    _check_element(d, l)
    c = Cochain(d.lattice, 2, d.modulus, t_tensor(d.tau)[l.index])
    witness = cocycle_witness(c)
    if witness is not None:
        raise VerificationFailure(f"T_{l.coords} is not a 2-cocycle", witness=witness)
    return c


def commutator_form(c: Cochain) -> np.ndarray:
    """c(x, y) - c(y, x); a 2-cocycle on an abelian group is a coboundary over all scalars iff this vanishes."""
    if c.degree != 2:
        raise ShapeMismatch(f"commutator needs a 2-cochain, got degree {c.degree}")
    return np.mod(c.table - c.table.T, c.modulus)


def pointwise_trivializations(d: PointedFusionData) -> List[Optional[Cochain]]:
    """For each l, in element order, a 1-cochain t with dt = T_l, or None."""
    M = d.working_modulus
    return [is_coboundary(Cochain(d.lattice, 2, M, d.T[i])) for i in range(d.lattice.order)]


def is_center_pointed(d: PointedFusionData) -> bool:
    """Every T_l, for l a generator of L, is a coboundary."""
    M = d.working_modulus
    for g in d.lattice.generators():
        if is_coboundary(Cochain(d.lattice, 2, M, d.T[g.index])) is None:
            logger.info(f"T_{g.coords} is not a coboundary; the center is not pointed")
            return False
    return True


def additivity_witness(d: PointedFusionData) -> Optional[Dict[str, Any]]:
    """A pair of generators l, l' with T_(l+l') - T_l - T_l' not a coboundary, or None."""
    M = d.working_modulus
    gens = d.lattice.generators()
    for g, h in itertools.combinations_with_replacement(gens, 2):
        s = (g + h).index
        c = Cochain(d.lattice, 2, M, d.T[s] - d.T[g.index] - d.T[h.index])
        if is_coboundary(c) is None:
            return {"generators": [list(g.coords), list(h.coords)]}
    return None


@dataclass(eq=False)
class CenterTrivialization:
    """t[l, x] = t_l(x) in mu_modulus, additive in l, with d(t_l) = T_l."""

    data: PointedFusionData
    modulus: int
    table: np.ndarray

    def cochain(self, l: Element) -> Cochain:
        _check_element(self.data, l)
        return Cochain(self.data.lattice, 1, self.modulus, self.table[l.index])

    def witness(self) -> Optional[Dict[str, Any]]:
        """First violation of additivity or of d(t_l) = T_l."""
        L = self.data.lattice
        add = L.addition_table
        t = np.mod(self.table, self.modulus)
        additive = np.mod(t[add] - t[:, None, :] - t[None, :, :], self.modulus)
        bad = np.argwhere(additive != 0)
        if len(bad):
            l1, l2, x = (L.coords_at(int(i)) for i in bad[0])
            return {"relation": "homomorphism", "arguments": [list(l1), list(l2), list(x)]}
        scale = self.modulus // self.data.working_modulus
        for l in L.elements():
            defect = differential(self.cochain(l)).table - self.data.T[l.index] * scale
            bad = np.argwhere(np.mod(defect, self.modulus) != 0)
            if len(bad):
                x, y = (L.coords_at(int(i)) for i in bad[0])
                return {"relation": "coboundary", "arguments": [list(l.coords), list(x), list(y)]}
        return None

    def to_json(self) -> Dict[str, Any]:
        return {"modulus": self.modulus, "table": [[int(v) for v in row] for row in self.table]}


def _trivialization_system(d: PointedFusionData, cap: int) -> Tuple[np.ndarray, List[int]]:
    """Unknowns t_l(x) for l, x != 0; rows for d(t_l) = T_l and for additivity in l."""
    L = d.lattice
    m = L.order
    base = m - 1
    width = base * base
    if 2 * base ** 3 * width > cap:
        raise CapExceeded(f"trivialization system for |L| = {m} exceeds the entry cap {cap}",
                          witness={"order": m, "cap": cap})
    add = L.addition_table

    def var(l: int, x: int) -> Optional[int]:
        return (l - 1) * base + (x - 1) if l and x else None

    rows, rhs = [], []
    for l, x, y in itertools.product(range(1, m), repeat=3):
        row = [0] * width
        # t_l(y) - t_l(x + y) + t_l(x) = T_l(x, y)
        for sign, arg in ((1, y), (-1, int(add[x, y])), (1, x)):
            col = var(l, arg)
            if col is not None:
                row[col] += sign
        rows.append(row)
        rhs.append(int(d.T[l, x, y]))
    for l1, l2, x in itertools.product(range(1, m), repeat=3):
        row = [0] * width
        # t_(l1 + l2)(x) - t_l1(x) - t_l2(x) = 0
        for sign, l in ((1, int(add[l1, l2])), (-1, l1), (-1, l2)):
            col = var(l, x)
            if col is not None:
                row[col] += sign
        rows.append(row)
        rhs.append(0)
    return int_matrix(rows, width=width), rhs


def solve_trivialization(d: PointedFusionData, cap: int = DEFAULT_MATRIX_ENTRY_CAP
                         ) -> CenterTrivialization:
    """The lexicographically least additive trivialization.

    Raises:
        NoSolution: If some T_l is not a coboundary, or if the T_l are
            coboundaries but no choice of primitives is additive in l.
        CapExceeded: If the linear system is too large.
    """
    M = d.working_modulus
    matrix, rhs = _trivialization_system(d, cap)
    solution = solve_mod(matrix, rhs, M)
    if solution is None:
        if not is_center_pointed(d):
            raise NoSolution("some T_l is not a coboundary, so the center is not pointed")
        raise NoSolution(
            "every T_l is a coboundary but no additive choice l -> t_l exists; "
            "use the twisted double to classify this center",
            witness={"lattice": d.lattice.to_json()},
        )
    m = d.lattice.order
    table = np.zeros((m, m), dtype=np.int64)
    table[1:, 1:] = np.array([int(v) for v in solution], dtype=np.int64).reshape(m - 1, m - 1)
    t = CenterTrivialization(d, M, table)
    witness = t.witness()
    if witness is not None:
        raise VerificationFailure("solver returned an invalid trivialization", witness=witness)
    return t


def trivialization_solution_count(d: PointedFusionData, cap: int = DEFAULT_MATRIX_ENTRY_CAP) -> int:
    """Number of additive trivializations, 0 if none; solutions differ by Hom(L, L^)."""
    M = d.working_modulus
    matrix, rhs = _trivialization_system(d, cap)
    if solve_mod(matrix, rhs, M, lexmin=False) is None:
        return 0
    return kernel_size_mod(matrix, M)


def shift_trivialization(t: CenterTrivialization, pairing: np.ndarray) -> CenterTrivialization:
    """t + pairing, with pairing[l, x] a bihomomorphism L x L -> mu_modulus.

    Raises:
        VerificationFailure: If the shifted table is not a trivialization.
    """
    shifted = CenterTrivialization(t.data, t.modulus, np.mod(t.table + pairing, t.modulus))
    witness = shifted.witness()
    if witness is not None:
        raise VerificationFailure("shift is not a bihomomorphism", witness=witness)
    return shifted


@dataclass(eq=False)
class CenterClassification:
    data: PointedFusionData
    trivialization: CenterTrivialization
    correction: str
    cocycle_pair: AbelianThreeCocycle
    metric: MetricGroup

    def to_json(self) -> Dict[str, Any]:
        return {
            "lattice": self.data.lattice.to_json(),
            "correction": self.correction,
            "modulus": self.cocycle_pair.modulus,
            "trivialization": self.trivialization.to_json(),
            "metric": self.metric.to_json(),
        }


def _projection(L: FiniteAbelianGroup, A: FiniteAbelianGroup) -> Homomorphism:
    k = L.rank
    return Homomorphism(A, L, tuple(
        tuple(1 if i == j else 0 for i in range(2 * k)) for j in range(k)
    ))


def classify_center(d: PointedFusionData, t: CenterTrivialization, correction: str = "antisymmetric",
                    cap: int = DEFAULT_MATRIX_ENTRY_CAP) -> CenterClassification:
    """The abelian 3-cocycle (a, b) on A = L + L^ and its metric group.

    a pulls tau back along the projection to L and
    b((l1, c1), (l2, c2)) = c1(l2) + t_l1(l2) -/+ t_l2(l1),
    with the sign set by ``correction``. Both hexagon families are checked
    on every triple of A.

    Raises:
        HexagonViolation: If (a, b) fails a pentagon or hexagon relation.
        CapExceeded: If |A|^3 exceeds ``cap``.
    """
    if correction not in CORRECTIONS:
        raise ValueError(f"correction must be one of {CORRECTIONS}, got {correction!r}")
    if t.data is not d:
        raise ParentMismatch("trivialization belongs to different fusion data")
    L = d.lattice
    A = L.direct_sum(L)
    if A.order ** 3 > cap:
        raise CapExceeded(f"|A|^3 = {A.order ** 3} exceeds the entry cap {cap}",
                          witness={"order": A.order, "cap": cap})
    M = t.modulus
    k = L.rank
    e = L.exponent
    a = pullback(d.tau.embed(M), _projection(L, A))
    coords = A.coordinate_table
    weights = np.array([e // n for n in L.cyclic_orders], dtype=np.int64)
    b0 = np.mod((coords[:, None, k:] * coords[None, :, :k] * weights).sum(axis=2), e) * (M // e)
    lidx = L.indices_of(coords[:, :k])
    tt = t.table[lidx[:, None], lidx[None, :]]
    b = b0 + tt - tt.T if correction == "antisymmetric" else b0 + tt + tt.T
    pair = AbelianThreeCocycle(A, M, a, b)
    witness = abelian_cocycle_witness(pair)
    if witness is not None:
        raise HexagonViolation(f"{correction} correction fails {witness['relation']}", witness=witness)
    metric = MetricGroup(quadratic_form_of(pair))
    logger.info(f"center of Vect[{L}]^tau classified with the {correction} correction")
    return CenterClassification(d, t, correction, pair, metric)


@dataclass(eq=False)
class CenterDouble:
    """Simple objects (l, beta) of the twisted double with their twists."""

    data: PointedFusionData
    modulus: int
    decomposition: AbstractDecomposition = field(repr=False)
    metric: MetricGroup

    def objects(self) -> List[Tuple[Tuple[int, ...], List[int]]]:
        L = self.data.lattice
        return [(L.coords_at(l), list(beta)) for l, beta in self.decomposition.items]

    def to_json(self) -> Dict[str, Any]:
        return {
            "lattice": self.data.lattice.to_json(),
            "modulus": self.modulus,
            "structure": self.metric.group.to_json(),
            "metric": self.metric.to_json(),
        }


def center_metric_group(d: PointedFusionData, cap: int = DEFAULT_AUTOMORPHISM_CAP) -> CenterDouble:
    """The center's metric group read off the twisted Drinfeld double.

    Objects are pairs (l, beta) with d(beta) = T_l. The product is
    (l + l', beta + beta' + gamma) with gamma(x) = T_x(l, l') and the twist is
    beta(l). Generators are (g, t_g) for a pointwise primitive t_g of each
    generator g of L, together with (0, chi) for the generators of L^.

    Raises:
        NoSolution: If some T_g is not a coboundary.
        VerificationFailure: If the resulting group has the wrong order or
            the twist is not a nondegenerate quadratic form.
    """
    L = d.lattice
    M = d.working_modulus
    T = d.T
    zero_beta = (0,) * L.order

    def op(u, v):
        (l1, beta1), (l2, beta2) = u, v
        gamma = T[:, l1, l2]
        beta = np.mod(np.array(beta1) + np.array(beta2) + gamma, M)
        return int(L.addition_table[l1, l2]), tuple(int(x) for x in beta)

    generators = []
    for g in L.generators():
        primitive = is_coboundary(Cochain(L, 2, M, T[g.index]))
        if primitive is None:
            raise NoSolution(f"T_{g.coords} is not a coboundary; the center is not pointed")
        generators.append((g.index, tuple(int(x) for x in primitive.table)))
    coords = L.coordinate_table
    for j, n in enumerate(L.cyclic_orders):
        generators.append((0, tuple(int(x) for x in coords[:, j] * (M // n) % M)))
    decomposition = abstract_abelian_structure(generators, op, (0, zero_beta), cap=cap)
    group = decomposition.group
    if group.order != L.order ** 2:
        raise VerificationFailure(f"twisted double has {group.order} simple objects, expected {L.order ** 2}")
    twist = QuadraticForm(group, M, tuple(beta[l] for l, beta in decomposition.items))
    witness = twist.check_axioms()
    if witness is not None:
        raise VerificationFailure("twist is not a quadratic form", witness=witness)
    metric = MetricGroup(twist)
    logger.info(f"twisted double of {L} has metric group on {group}")
    return CenterDouble(d, M, decomposition, metric)


def trivialization_independence(d: PointedFusionData, t1: CenterTrivialization, t2: CenterTrivialization,
                                correction: str = "antisymmetric") -> bool:
    """Whether the metric groups classified from t1 and t2 are isometric."""
    m1 = classify_center(d, t1, correction).metric
    m2 = classify_center(d, t2, correction).metric
    return is_isometric(m1, m2)
