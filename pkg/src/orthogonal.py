"""The orthogonal group O(A, q), its determinant and SO(A, q)."""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
from agentstr.logger import get_logger
from sympy import factorint

from .abelian import (
    Element, FiniteAbelianGroup, Homomorphism, span_with, compose, enumerate_automorphisms,
    identity,
)
from .constants import DEFAULT_AUTOMORPHISM_CAP
from .exceptions import CapExceeded, ParentMismatch, VerificationFailure
from .quadratic import MetricGroup, QuadraticForm, split_form

logger = get_logger(__name__)


@dataclass(frozen=True)
class OrthogonalGroup:
    """Automorphisms f of a metric group with q(f(a)) = q(a) for all a."""

    metric: MetricGroup
    elements: Tuple[Homomorphism, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Homomorphism]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, f: Homomorphism) -> bool:
        return map_key(f) in self.keys()

    def keys(self) -> Set[Tuple[int, ...]]:
        return {map_key(f) for f in self.elements}

    def to_json(self) -> Dict[str, Any]:
        return {
            "metric": self.metric.to_json(),
            "elements": [[list(row) for row in f.matrix] for f in self.elements],
        }


def map_key(f: Homomorphism) -> Tuple[int, ...]:
    return tuple(int(i) for i in f.index_map)


def preserves_form(f: Homomorphism, form: QuadraticForm) -> bool:
    """q(f(a)) == q(a) for every a."""
    if f.source != form.group or f.target != form.group:
        raise ParentMismatch(f"map {f.source}->{f.target} does not act on {form.group}")
    return bool(np.array_equal(form.table[f.index_map], form.table))


def isometries(source: QuadraticForm, target: QuadraticForm, first_only: bool = False,
               allowed: Optional[Sequence[Optional[Set[int]]]] = None) -> List[Homomorphism]:
    """Isomorphisms f: source.group -> target.group with q_target(f(a)) = q_source(a).

    Generator images are chosen one at a time. An image must have the order of
    its generator and the same q-value, must pair with the earlier images as
    the generators pair, and must enlarge the span by the full generator order.
    These conditions determine q on the whole group, and every result is
    re-verified pointwise.

    Args:
        source: Form on the domain.
        target: Form on the codomain.
        first_only: Stop at the first isometry found.
        allowed: Optional per-generator sets of admissible target indices.
    """
    A, B = source.group, target.group
    if A.order != B.order:
        return []
    modulus = math.lcm(source.modulus, target.modulus)
    q_source = source.embedded(modulus)
    q_target = target.embedded(modulus)
    b_source = np.mod(source.polarization_table * (modulus // source.modulus), modulus)
    b_target = np.mod(target.polarization_table * (modulus // target.modulus), modulus)
    gens = A.generators()
    target_elements = B.elements()
    element_orders = np.array([B.element_order(x) for x in target_elements])
    candidates = []
    for i, g in enumerate(gens):
        mask = (element_orders == A.cyclic_orders[i]) & (q_target == q_source[g.index])
        pool = np.nonzero(mask)[0]
        if allowed is not None and allowed[i] is not None:
            pool = np.array([x for x in pool if int(x) in allowed[i]], dtype=np.int64)
        candidates.append(pool)

    found: List[Homomorphism] = []

    def extend(i: int, span: np.ndarray, chosen: List[int]) -> bool:
        if i == len(gens):
            f = Homomorphism.from_images(A, B, [target_elements[x] for x in chosen])
            if not np.array_equal(q_target[f.index_map], q_source):
                raise VerificationFailure("generator search produced a non-isometry",
                                          witness=f.to_json())
            found.append(f)
            return first_only
        pool = candidates[i]
        for j, x_j in enumerate(chosen):
            pool = pool[b_target[x_j, pool] == b_source[gens[j].index, gens[i].index]]
        n = A.cyclic_orders[i]
        for x in pool:
            grown = span_with(B, span, target_elements[int(x)], n)
            if len(grown) == len(span) * n and extend(i + 1, grown, chosen + [int(x)]):
                return True
        return False

    extend(0, np.zeros(1, dtype=np.int64), [])
    return found


def find_isometries(m1: MetricGroup, m2: MetricGroup, first_only: bool = False) -> List[Homomorphism]:
    return isometries(m1.form, m2.form, first_only=first_only)


def is_isometric(m1: MetricGroup, m2: MetricGroup) -> bool:
    return bool(find_isometries(m1, m2, first_only=True))


def orthogonal_group(metric: MetricGroup, cap: int = DEFAULT_AUTOMORPHISM_CAP) -> OrthogonalGroup:
    """O(A, q) by exhaustive generator-image search.

    Raises:
        CapExceeded: If |A| is above ``cap``.
    """
    if metric.group.order > cap:
        raise CapExceeded(f"|A| = {metric.group.order} exceeds the cap {cap}",
                          witness={"order": metric.group.order, "cap": cap})
    elements = tuple(isometries(metric.form, metric.form))
    logger.info(f"|O(A,q)| = {len(elements)} for A = {metric.group}")
    return OrthogonalGroup(metric, elements)


def orthogonal_group_by_filter(metric: MetricGroup, cap: int = DEFAULT_AUTOMORPHISM_CAP
                               ) -> OrthogonalGroup:
    """O(A, q) as the automorphisms that preserve q."""
    automorphisms = enumerate_automorphisms(metric.group, cap)
    return OrthogonalGroup(
        metric, tuple(f for f in automorphisms if preserves_form(f, metric.form))
    )


def minus_identity(group: FiniteAbelianGroup) -> Homomorphism:
    return Homomorphism(group, group, tuple(
        tuple(-1 if i == j else 0 for i in range(group.rank)) for j in range(group.rank)
    ))


def squarefree_part(n: int) -> int:
    """The squarefree representative of n in Q+/(Q+)^2."""
    return math.prod(p for p, e in factorint(n).items() if e % 2)


def determinant(g: Homomorphism) -> int:
    """Squarefree part of |(g - 1)A|."""
    A = g.source
    images = A.coordinate_table[g.index_map] - A.coordinate_table
    size = len(np.unique(A.indices_of(images)))
    return squarefree_part(size)


def det_spectrum(group: OrthogonalGroup) -> Dict[int, int]:
    """Number of elements per determinant class."""
    return dict(sorted(Counter(determinant(g) for g in group).items()))


def special_orthogonal_group(group: OrthogonalGroup) -> OrthogonalGroup:
    """SO(A, q) = ker(det)."""
    return OrthogonalGroup(group.metric, tuple(g for g in group if determinant(g) == 1))


def is_subgroup(elements: Sequence[Homomorphism]) -> bool:
    """Non-empty, contains the identity and is closed under composition."""
    if not elements:
        return False
    maps = [f.index_map for f in elements]
    keys = {tuple(int(i) for i in m) for m in maps}
    if tuple(range(len(maps[0]))) not in keys:
        return False
    return all(tuple(int(i) for i in f[g]) in keys for f in maps for g in maps)


def is_normal(subgroup: Sequence[Homomorphism], group: Sequence[Homomorphism]) -> bool:
    """g h g^-1 lies in the subgroup for all g in group, h in subgroup."""
    keys = {map_key(h) for h in subgroup}
    for g in group:
        forward = g.index_map
        backward = np.empty_like(forward)
        backward[forward] = np.arange(len(forward))
        for h in subgroup:
            if tuple(int(i) for i in forward[h.index_map[backward]]) not in keys:
                return False
    return True


def determinant_is_multiplicative(group: OrthogonalGroup) -> bool:
    """det(gh) == det(g) det(h) in Q+/(Q+)^2 for every pair."""
    dets = {map_key(g): determinant(g) for g in group}
    for g in group:
        for h in group:
            gh = compose(g, h)
            if dets[map_key(gh)] != squarefree_part(dets[map_key(g)] * dets[map_key(h)]):
                return False
    return True


def subgroup_generated_by(generators: Sequence[Homomorphism], group: FiniteAbelianGroup
                          ) -> List[Homomorphism]:
    """Closure of ``generators`` under composition, identity first."""
    start = identity(group)
    seen = {map_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for f in frontier:
            for g in generators:
                h = compose(g, f)
                k = map_key(h)
                if k not in seen:
                    seen[k] = h
                    nxt.append(h)
        frontier = nxt
    return list(seen.values())


def split_orthogonal_order(n: int, p: int) -> int:
    """2 p^(n(n-1)) (p^n - 1) prod_{i=1}^{n-1} (p^(2i) - 1)."""
    if n < 1:
        raise ValueError(f"rank must be positive, got {n}")
    order = 2 * p ** (n * (n - 1)) * (p ** n - 1)
    for i in range(1, n):
        order *= p ** (2 * i) - 1
    return order


@dataclass(frozen=True)
class SplitOrthogonalReport:
    n: int
    p: int
    brute_force_order: int
    formula_order: int
    special_order: int
    det_spectrum: Dict[int, int]

    @property
    def matches(self) -> bool:
        return self.brute_force_order == self.formula_order

    @property
    def index(self) -> int:
        return self.brute_force_order // self.special_order

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n, "p": self.p,
            "brute_force_order": self.brute_force_order,
            "formula_order": self.formula_order,
            "special_order": self.special_order,
            "so_index": self.index,
            "det_spectrum": {str(k): v for k, v in self.det_spectrum.items()},
            "matches": self.matches,
        }


def split_orthogonal_check(n: int, p: int, cap: int = DEFAULT_AUTOMORPHISM_CAP
                           ) -> SplitOrthogonalReport:
    """Compare |O(split_form(n, p))| with the split orthogonal order formula."""
    metric = split_form(n, p)
    group = orthogonal_group(metric, cap)
    special = special_orthogonal_group(group)
    report = SplitOrthogonalReport(
        n=n, p=p,
        brute_force_order=group.order,
        formula_order=split_orthogonal_order(n, p),
        special_order=special.order,
        det_spectrum=det_spectrum(group),
    )
    if not report.matches:
        logger.warning(f"split orthogonal order mismatch for (n, p) = ({n}, {p}): "
                       f"{report.brute_force_order} != {report.formula_order}")
    return report
