"""Subgroups, isotropic and Lagrangian subgroups, and polarizations."""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from agentstr.logger import get_logger

from .abelian import (
    Element, FiniteAbelianGroup, Homomorphism, abstract_abelian_structure, span_with,
)
from .constants import DEFAULT_SUBGROUP_CAP
from .exceptions import CapExceeded, ParentMismatch
from .orthogonal import isometries
from .quadratic import MetricGroup, QuadraticForm, evaluation_form

logger = get_logger(__name__)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup stored as the sorted indices of its elements."""

    parent: FiniteAbelianGroup
    indices: Tuple[int, ...]
    generators: Tuple[Element, ...]

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def elements(self) -> List[Element]:
        everything = self.parent.elements()
        return [everything[i] for i in self.indices]

    def __contains__(self, element: Element) -> bool:
        return element.parent == self.parent and element.index in set(self.indices)

    def to_json(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "generators": [g.to_json() for g in self.generators],
            "elements": [e.to_json() for e in self.elements],
        }


def _closure(group: FiniteAbelianGroup, span: np.ndarray, x: Element) -> np.ndarray:
    return span_with(group, span, x, group.element_order(x))


def subgroup_generated(group: FiniteAbelianGroup, generators: Sequence[Element]) -> Subgroup:
    span = np.zeros(1, dtype=np.int64)
    for g in generators:
        if g.parent != group:
            raise ParentMismatch(f"generator {g.coords} is not in {group}")
        span = _closure(group, span, g)
    return Subgroup(group, tuple(int(i) for i in span), tuple(generators))


def enumerate_subgroups(group: FiniteAbelianGroup, cap: int = DEFAULT_SUBGROUP_CAP
                        ) -> List[Subgroup]:
    """Every subgroup exactly once, sorted by (order, element indices).

    Subgroups are found level by level: level k holds the subgroups first
    reached with k generators, so each stored generating list has minimal
    length.

    Raises:
        CapExceeded: If |group| is above ``cap``.
    """
    if group.order > cap:
        raise CapExceeded(f"|A| = {group.order} exceeds the subgroup cap {cap}",
                          witness={"order": group.order, "cap": cap})
    elements = group.elements()
    found: Dict[Tuple[int, ...], Subgroup] = {}
    trivial = Subgroup(group, (0,), ())
    found[trivial.indices] = trivial
    level = [trivial]
    while level:
        next_level = []
        for sub in level:
            members = set(sub.indices)
            span = np.array(sub.indices, dtype=np.int64)
            for x in elements:
                if x.index in members:
                    continue
                key = tuple(int(i) for i in _closure(group, span, x))
                if key not in found:
                    found[key] = Subgroup(group, key, sub.generators + (x,))
                    next_level.append(found[key])
        level = next_level
    subgroups = sorted(found.values(), key=lambda s: (s.order, s.indices))
    logger.info(f"{len(subgroups)} subgroups of {group}")
    return subgroups


def _check_same_group(sub: Subgroup, form: QuadraticForm) -> None:
    if sub.parent != form.group:
        raise ParentMismatch(f"subgroup of {sub.parent} tested against a form on {form.group}")


def is_isotropic(sub: Subgroup, form: QuadraticForm) -> bool:
    """q vanishes on the whole subgroup."""
    _check_same_group(sub, form)
    return all(form.exponents[i] == 0 for i in sub.indices)


def is_lagrangian(sub: Subgroup, metric: MetricGroup) -> bool:
    """Isotropic with |L|^2 = |A|."""
    return is_isotropic(sub, metric.form) and sub.order ** 2 == metric.group.order


def isotropic_subgroups(form: QuadraticForm, cap: int = DEFAULT_SUBGROUP_CAP) -> List[Subgroup]:
    return [s for s in enumerate_subgroups(form.group, cap) if is_isotropic(s, form)]


def lagrangian_subgroups(metric: MetricGroup, cap: int = DEFAULT_SUBGROUP_CAP) -> List[Subgroup]:
    return [s for s in enumerate_subgroups(metric.group, cap) if is_lagrangian(s, metric)]


def count_isotropic_cyclic_subgroups(form: QuadraticForm, order: int) -> int:
    """Distinct isotropic cyclic subgroups of the given order, by a direct element scan."""
    group = form.group
    lines = set()
    for v in group.elements():
        if group.element_order(v) != order:
            continue
        line = frozenset((k * v).index for k in range(order))
        if all(form.exponents[i] == 0 for i in line):
            lines.add(line)
    return len(lines)


@dataclass(frozen=True)
class Polarization:
    """An isometry from the evaluation form on L + L^ onto (A, q) carrying L + 0 onto a Lagrangian."""

    metric: MetricGroup
    lagrangian: Subgroup
    lattice: FiniteAbelianGroup
    iso: Homomorphism

    def verify(self) -> bool:
        """Pullback of q along iso equals the evaluation form, and L + 0 lands on the Lagrangian."""
        source = evaluation_form(self.lattice).form
        if not self.iso.is_isomorphism():
            return False
        pulled = QuadraticForm(source.group, self.metric.form.modulus,
                               tuple(self.metric.form.table[self.iso.index_map].tolist()))
        if pulled != source:
            return False
        k = self.lattice.rank
        images = {self.iso.apply(g).index for g in source.group.generators()[:k]}
        return images <= set(self.lagrangian.indices)

    def to_json(self) -> Dict[str, Any]:
        return {
            "lagrangian": self.lagrangian.to_json(),
            "lattice": self.lattice.to_json(),
            "iso": self.iso.to_json(),
        }


def find_polarizations(metric: MetricGroup, cap: int = DEFAULT_SUBGROUP_CAP) -> List[Polarization]:
    """One polarization per Lagrangian that admits one.

    Splittings over the same Lagrangian differ by an element of O(A, q)
    fixing L, so only the first isometry found is kept as its witness; use
    ``orthogonal_group`` to recover the others.

    The Lagrangian L is decomposed into cyclic factors L0; the generators of
    L0 + 0 are pinned to their images in L and the isometry search runs over
    the images of the dual generators. Any other identification of L0 with L
    differs by an automorphism of the evaluation form, so pinning loses no
    solutions.
    """
    results = []
    for sub in lagrangian_subgroups(metric, cap):
        decomposition = abstract_abelian_structure(
            sub.generators, lambda a, b: a + b, metric.group.zero,
        )
        lattice = decomposition.group
        source = evaluation_form(lattice).form
        pinned = [{decomposition.item_at(g).index} for g in lattice.generators()]
        allowed = pinned + [None] * lattice.rank
        found = isometries(source, metric.form, first_only=True, allowed=allowed)
        if found:
            results.append(Polarization(metric, sub, lattice, found[0]))
        else:
            logger.info(f"Lagrangian of order {sub.order} admits no evaluation-type complement")
    return results
