"""Quadratic forms, symmetric bicharacters and metric groups.

Forms are stored as full tables of exponents: the value at the element with
index i is zeta_modulus ** exponents[i]. The constructor shrinks the modulus
to the smallest common order of the values, so two forms are equal exactly
when their values agree.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from agentstr.logger import get_logger
from sympy import isprime

from .abelian import Element, FiniteAbelianGroup
from .constants import DEFAULT_AUTOMORPHISM_CAP
from .exceptions import CapExceeded, EvenPrime, InvalidForm, NotPrime, ParentMismatch
from .scalars import RootOfUnity

logger = get_logger(__name__)


def _canonical(modulus: int, exponents) -> Tuple[int, Tuple[int, ...]]:
    modulus = int(modulus)
    if modulus < 1:
        raise ValueError(f"modulus must be positive, got {modulus}")
    reduced = [int(e) % modulus for e in np.asarray(exponents).ravel().tolist()]
    g = math.gcd(modulus, *reduced)
    return modulus // g, tuple(e // g for e in reduced)


def _check_element(group: FiniteAbelianGroup, a: Element) -> None:
    if a.parent != group:
        raise ParentMismatch(f"element of {a.parent} used with a form on {group}")


@dataclass(frozen=True)
class QuadraticForm:
    """A function q: A -> mu_modulus given by its exponent table.

    The table is not required to satisfy the axioms; ``check_axioms`` and
    ``polarize`` validate it.
    """

    group: FiniteAbelianGroup
    modulus: int
    exponents: Tuple[int, ...]

    def __post_init__(self):
        if len(self.exponents) != self.group.order:
            raise InvalidForm(
                f"form table has {len(self.exponents)} entries, |A| = {self.group.order}"
            )
        modulus, exponents = _canonical(self.modulus, self.exponents)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "exponents", exponents)

    @classmethod
    def from_values(cls, group: FiniteAbelianGroup, values: Sequence[RootOfUnity]) -> "QuadraticForm":
        modulus = math.lcm(*(v.order for v in values)) if values else 1
        return cls(group, modulus, tuple(v.embed(modulus) for v in values))

    @classmethod
    def from_function(cls, group: FiniteAbelianGroup,
                      fn: Callable[[Element], RootOfUnity]) -> "QuadraticForm":
        return cls.from_values(group, [fn(a) for a in group.elements()])

    @classmethod
    def trivial(cls, group: FiniteAbelianGroup) -> "QuadraticForm":
        return cls(group, 1, (0,) * group.order)

    @cached_property
    def table(self) -> np.ndarray:
        return np.array(self.exponents, dtype=np.int64)

    def exponent_at(self, a: Element) -> int:
        _check_element(self.group, a)
        return self.exponents[a.index]

    def value(self, a: Element) -> RootOfUnity:
        return RootOfUnity.of(self.modulus, self.exponent_at(a))

    __call__ = value

    def embedded(self, modulus: int) -> np.ndarray:
        """Exponent table rescaled to a multiple of the form's modulus."""
        if modulus % self.modulus:
            raise ValueError(f"modulus {modulus} is not a multiple of {self.modulus}")
        return self.table * (modulus // self.modulus) % modulus

    @cached_property
    def polarization_table(self) -> np.ndarray:
        """Exponents of q(a+b) / (q(a) q(b)) at [index(a), index(b)]."""
        q = self.table
        return np.mod(q[self.group.addition_table] - q[:, None] - q[None, :], self.modulus)

    def check_axioms(self) -> Optional[Dict[str, Any]]:
        """Witness of the first failed axiom, or None for a valid form."""
        if self.exponents[0] != 0:
            return {"axiom": "q(0) = 1", "elements": [list(self.group.zero.coords)]}
        negated = self.table[self.group.negation_table]
        bad = np.nonzero(negated != self.table)[0]
        if len(bad):
            a = self.group.coords_at(int(bad[0]))
            return {"axiom": "q(-a) = q(a)", "elements": [list(a)]}
        return _biadditivity_witness(self.group, self.polarization_table, self.modulus)

    def is_valid(self) -> bool:
        return self.check_axioms() is None

    def values(self) -> List[RootOfUnity]:
        return [RootOfUnity.of(self.modulus, e) for e in self.exponents]

    def to_json(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_json(),
            "values": [
                {"elem": list(self.group.coords_at(i)), **RootOfUnity.of(self.modulus, e).to_json()}
                for i, e in enumerate(self.exponents)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "QuadraticForm":
        group = FiniteAbelianGroup.from_json(data["group"])
        values = [RootOfUnity.one()] * group.order
        seen = set()
        for entry in data["values"]:
            index = group.index_of(entry["elem"])
            values[index] = RootOfUnity.of(int(entry["order"]), int(entry["exp"]))
            seen.add(index)
        if len(seen) != group.order:
            raise InvalidForm(f"form file lists {len(seen)} of {group.order} elements")
        return cls.from_values(group, values)


def _biadditivity_witness(group: FiniteAbelianGroup, table: np.ndarray, modulus: int
                          ) -> Optional[Dict[str, Any]]:
    asymmetric = np.argwhere(table != table.T)
    if len(asymmetric):
        a, b = (group.coords_at(int(i)) for i in asymmetric[0])
        return {"axiom": "symmetry", "elements": [list(a), list(b)]}
    for g in group.generators():
        shifted = table[group.translation(g.coords)]
        defect = np.mod(shifted - table - table[g.index][None, :], modulus)
        bad = np.argwhere(defect != 0)
        if len(bad):
            a, b = (group.coords_at(int(i)) for i in bad[0])
            return {"axiom": "biadditivity", "elements": [list(a), list(g.coords), list(b)]}
    return None


@dataclass(frozen=True)
class Bicharacter:
    """A pairing A x A -> mu_modulus given by its exponent table."""

    group: FiniteAbelianGroup
    modulus: int
    exponents: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = self.group.order
        flat = np.asarray(self.exponents, dtype=np.int64).reshape(-1)
        if flat.size != n * n:
            raise InvalidForm(f"bicharacter table has {flat.size} entries, expected {n * n}")
        modulus, reduced = _canonical(self.modulus, flat)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "exponents", tuple(
            tuple(reduced[i * n:(i + 1) * n]) for i in range(n)
        ))

    @cached_property
    def table(self) -> np.ndarray:
        return np.array(self.exponents, dtype=np.int64).reshape(self.group.order, self.group.order)

    def value(self, a: Element, b: Element) -> RootOfUnity:
        _check_element(self.group, a)
        _check_element(self.group, b)
        return RootOfUnity.of(self.modulus, self.exponents[a.index][b.index])

    __call__ = value

    def check_axioms(self) -> Optional[Dict[str, Any]]:
        return _biadditivity_witness(self.group, self.table, self.modulus)

    def radical(self) -> List[Element]:
        """Elements a with <a, -> trivial."""
        zero_rows = np.nonzero(~self.table.any(axis=1))[0]
        return [self.group.elements()[int(i)] for i in zero_rows]

    def is_nondegenerate(self) -> bool:
        return len(self.radical()) == 1

    def to_json(self) -> Dict[str, Any]:
        return {"group": self.group.to_json(), "modulus": self.modulus,
                "exponents": [list(row) for row in self.exponents]}


def polarize(q: QuadraticForm) -> Bicharacter:
    """The symmetric bicharacter <a,b>_q = q(a+b) / (q(a) q(b)).

    Raises:
        InvalidForm: If q violates an axiom; the witness names the axiom and
            the offending elements.
    """
    witness = q.check_axioms()
    if witness is not None:
        raise InvalidForm(f"not a quadratic form: {witness['axiom']} fails", witness=witness)
    return Bicharacter(q.group, q.modulus, tuple(map(tuple, q.polarization_table.tolist())))


def is_nondegenerate(q: QuadraticForm) -> bool:
    return polarize(q).is_nondegenerate()


def isotropic_vectors(q: QuadraticForm) -> List[Element]:
    return [a for a, e in zip(q.group.elements(), q.exponents) if e == 0]


@dataclass(frozen=True)
class MetricGroup:
    """A finite abelian group with a nondegenerate quadratic form."""

    form: QuadraticForm

    def __post_init__(self):
        if not is_nondegenerate(self.form):
            radical = polarize(self.form).radical()
            raise InvalidForm(
                f"form on {self.form.group} is degenerate",
                witness={"radical": [a.to_json() for a in radical[:8]]},
            )

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.form.group

    def value(self, a: Element) -> RootOfUnity:
        return self.form.value(a)

    def to_json(self) -> Dict[str, Any]:
        return self.form.to_json()

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "MetricGroup":
        return cls(QuadraticForm.from_json(data))


def evaluation_form(lattice: FiniteAbelianGroup) -> MetricGroup:
    """q(l, chi) = chi(l) on L + L^, coordinates concatenated."""
    group = lattice.direct_sum(lattice)
    k = lattice.rank
    e = lattice.exponent
    table = group.coordinate_table
    weights = np.array([e // n for n in lattice.cyclic_orders], dtype=np.int64)
    exponents = np.mod((table[:, :k] * table[:, k:] * weights).sum(axis=1), e)
    return MetricGroup(QuadraticForm(group, e, tuple(exponents.tolist())))


def split_form(n: int, p: int) -> MetricGroup:
    """The split form of signature (n, n) on (Z/p)^(2n).

    Raises:
        EvenPrime: If p == 2.
        NotPrime: If p is not prime.
    """
    if p == 2:
        raise EvenPrime("the split form needs an odd prime", witness={"p": p})
    if not isprime(p):
        raise NotPrime(f"{p} is not prime", witness={"p": p})
    if n < 0:
        raise ValueError(f"rank must be non-negative, got {n}")
    return evaluation_form(FiniteAbelianGroup((p,) * n))


def square_form(n: int) -> QuadraticForm:
    """q(a) = zeta_n ** (a^2) on Z/n."""
    group = FiniteAbelianGroup((n,))
    return QuadraticForm(group, n, tuple(a * a for a in range(n)))


def form_from_generator_data(group: FiniteAbelianGroup, modulus: int,
                             diagonal: Sequence[int], pairings: Mapping[Tuple[int, int], int]
                             ) -> QuadraticForm:
    """Propagate generator data to the whole group.

    q(sum c_i g_i) = prod q(g_i)^(c_i^2) * prod_{i<j} beta_ij^(c_i c_j), with
    every value given as an exponent of zeta_modulus.
    """
    table = group.coordinate_table
    exponents = np.zeros(group.order, dtype=np.int64)
    for i, v in enumerate(diagonal):
        exponents += v * table[:, i] * table[:, i]
    for (i, j), w in pairings.items():
        exponents += w * table[:, i] * table[:, j]
    return QuadraticForm(group, modulus, tuple(np.mod(exponents, modulus).tolist()))


def form_from_values(group: FiniteAbelianGroup, generator_values: Sequence[RootOfUnity],
                     pairings: Mapping[Tuple[int, int], RootOfUnity]) -> QuadraticForm:
    """Form with prescribed values on generators and pairings between them.

    Raises:
        InvalidForm: If the data does not define a quadratic form.
    """
    orders = [v.order for v in generator_values] + [v.order for v in pairings.values()]
    modulus = math.lcm(*orders) if orders else 1
    form = form_from_generator_data(
        group, modulus,
        [v.embed(modulus) for v in generator_values],
        {key: v.embed(modulus) for key, v in pairings.items()},
    )
    witness = form.check_axioms()
    if witness is not None:
        raise InvalidForm("generator data does not define a quadratic form", witness=witness)
    return form


def _generator_choices(group: FiniteAbelianGroup, modulus: int):
    orders = group.cyclic_orders
    diagonal = [
        [v * (modulus // (n * math.gcd(n, 2))) for v in range(n * math.gcd(n, 2))] for n in orders
    ]
    pairs = list(itertools.combinations(range(group.rank), 2))
    off_diagonal = [
        [w * (modulus // math.gcd(orders[i], orders[j])) for w in range(math.gcd(orders[i], orders[j]))]
        for i, j in pairs
    ]
    return diagonal, pairs, off_diagonal


def enumerate_quadratic_forms(group: FiniteAbelianGroup, nondegenerate_only: bool = False,
                              cap: int = DEFAULT_AUTOMORPHISM_CAP) -> List[QuadraticForm]:
    """All quadratic forms on ``group``, in a deterministic order.

    Values on generators range over mu_(n_i gcd(n_i, 2)) and pairings between
    generators over mu_gcd(n_i, n_j); each choice is propagated to the whole
    group and filtered by the axioms.

    Raises:
        CapExceeded: If |group| is above ``cap``.
    """
    if group.order > cap:
        raise CapExceeded(f"|A| = {group.order} exceeds the form enumeration cap {cap}")
    modulus = 2 * group.exponent
    diagonal, pairs, off_diagonal = _generator_choices(group, modulus)
    forms = []
    for diag_choice in itertools.product(*diagonal):
        for pair_choice in itertools.product(*off_diagonal):
            form = form_from_generator_data(group, modulus, diag_choice, dict(zip(pairs, pair_choice)))
            if form.check_axioms() is not None:
                continue
            if nondegenerate_only and not is_nondegenerate(form):
                continue
            forms.append(form)
    logger.info(f"{len(forms)} quadratic forms on {group} (nondegenerate_only={nondegenerate_only})")
    return forms


def enumerate_bicharacters(group: FiniteAbelianGroup) -> List[Bicharacter]:
    """All symmetric bicharacters on ``group``."""
    e = group.exponent
    orders = group.cyclic_orders
    slots = [(i, j) for i in range(group.rank) for j in range(i, group.rank)]
    ranges = [
        [w * (e // math.gcd(orders[i], orders[j])) for w in range(math.gcd(orders[i], orders[j]))]
        for i, j in slots
    ]
    table = group.coordinate_table
    result = []
    for choice in itertools.product(*ranges):
        weights = np.zeros((group.rank, group.rank), dtype=np.int64)
        for (i, j), w in zip(slots, choice):
            weights[i, j] = weights[j, i] = w
        exponents = np.mod(table @ weights @ table.T, e) if group.rank else np.zeros((1, 1), dtype=np.int64)
        result.append(Bicharacter(group, e, tuple(map(tuple, exponents.tolist()))))
    return result
