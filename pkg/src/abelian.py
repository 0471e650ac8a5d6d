"""Finite abelian groups as explicit sums of cyclic groups.

A group is the list of its cyclic orders [n_1, ..., n_k]; elements are
coordinate tuples reduced modulo those orders. Two presentations of
isomorphic groups are different objects, so coordinates stay exactly as the
caller wrote them.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import (
    Any, Callable, Dict, Hashable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union,
)

import numpy as np
from agentstr.logger import get_logger

from .constants import DEFAULT_AUTOMORPHISM_CAP
from .exceptions import (
    CapExceeded, InvalidHomomorphism, ParentMismatch, ShapeMismatch, VerificationFailure,
)
from .linalg import int_matrix, smith_normal_form
from .scalars import RootOfUnity

logger = get_logger(__name__)


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """The group Z/n_1 + ... + Z/n_k."""

    cyclic_orders: Tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(n) for n in self.cyclic_orders)
        if any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be positive, got {list(orders)}")
        object.__setattr__(self, "cyclic_orders", orders)

    @classmethod
    def trivial(cls) -> "FiniteAbelianGroup":
        return cls(())

    @property
    def rank(self) -> int:
        return len(self.cyclic_orders)

    @cached_property
    def order(self) -> int:
        return math.prod(self.cyclic_orders)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.cyclic_orders) if self.cyclic_orders else 1

    @cached_property
    def strides(self) -> Tuple[int, ...]:
        strides = []
        step = 1
        for n in reversed(self.cyclic_orders):
            strides.append(step)
            step *= n
        return tuple(reversed(strides))

    def reduce(self, coords: Sequence[int]) -> Tuple[int, ...]:
        if len(coords) != self.rank:
            raise ShapeMismatch(f"expected {self.rank} coordinates, got {len(coords)}")
        return tuple(int(c) % n for c, n in zip(coords, self.cyclic_orders))

    def index_of(self, coords: Sequence[int]) -> int:
        """Position of an element in the lexicographic enumeration."""
        return sum(c * s for c, s in zip(self.reduce(coords), self.strides))

    def coords_at(self, index: int) -> Tuple[int, ...]:
        return tuple((index // s) % n for s, n in zip(self.strides, self.cyclic_orders))

    @cached_property
    def coordinate_table(self) -> np.ndarray:
        """All coordinate tuples in enumeration order, shape (order, rank)."""
        table = np.array(
            list(itertools.product(*(range(n) for n in self.cyclic_orders))), dtype=np.int64
        )
        return table.reshape(self.order, self.rank)

    def indices_of(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized index_of for an integer array whose last axis is the rank."""
        if not self.rank:
            return np.zeros(np.shape(coords)[:-1], dtype=np.int64)
        reduced = np.mod(coords, np.array(self.cyclic_orders, dtype=np.int64))
        return reduced @ np.array(self.strides, dtype=np.int64)

    def translation(self, coords: Sequence[int]) -> np.ndarray:
        """Index of a + g for every a, in enumeration order."""
        return self.indices_of(self.coordinate_table + np.array(self.reduce(coords), dtype=np.int64))

    @cached_property
    def addition_table(self) -> np.ndarray:
        """Index of a + b at [index(a), index(b)]."""
        table = self.coordinate_table
        return self.indices_of(table[:, None, :] + table[None, :, :])

    @cached_property
    def negation_table(self) -> np.ndarray:
        return self.indices_of(-self.coordinate_table)

    @cached_property
    def _elements(self) -> Tuple["Element", ...]:
        return tuple(Element(self, tuple(int(c) for c in row)) for row in self.coordinate_table)

    def elements(self) -> List["Element"]:
        """All elements, zero first, lexicographic on coordinates."""
        return list(self._elements)

    def element(self, coords: Union[int, Sequence[int]]) -> "Element":
        if isinstance(coords, int):
            coords = (coords,)
        return Element(self, self.reduce(coords))

    @property
    def zero(self) -> "Element":
        return Element(self, (0,) * self.rank)

    def generators(self) -> List["Element"]:
        """The standard unit vectors, one per cyclic factor."""
        return [
            Element(self, tuple(1 % n if j == i else 0 for j, n in enumerate(self.cyclic_orders)))
            for i in range(self.rank)
        ]

    def element_order(self, element: "Element") -> int:
        _check_parent(self, element)
        orders = [n // math.gcd(c, n) for c, n in zip(element.coords, self.cyclic_orders)]
        return math.lcm(*orders) if orders else 1

    def direct_sum(self, other: "FiniteAbelianGroup") -> "FiniteAbelianGroup":
        return FiniteAbelianGroup(self.cyclic_orders + other.cyclic_orders)

    def to_json(self) -> Dict[str, List[int]]:
        return {"orders": list(self.cyclic_orders)}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FiniteAbelianGroup":
        return cls(tuple(data["orders"]))

    def __str__(self) -> str:
        if not self.cyclic_orders:
            return "0"
        return "+".join(f"Z/{n}" for n in self.cyclic_orders)


def _check_parent(group: FiniteAbelianGroup, element: "Element") -> None:
    if element.parent != group:
        raise ParentMismatch(
            f"element of {element.parent} used in {group}", witness=list(element.coords)
        )


@dataclass(frozen=True)
class Element:
    parent: FiniteAbelianGroup
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != self.parent.rank:
            raise ShapeMismatch(f"expected {self.parent.rank} coordinates, got {len(coords)}")
        if any(not 0 <= c < n for c, n in zip(coords, self.parent.cyclic_orders)):
            raise ValueError(f"coordinates {list(coords)} not reduced in {self.parent}")
        object.__setattr__(self, "coords", coords)

    def _same_parent(self, other: "Element") -> None:
        if not isinstance(other, Element) or other.parent != self.parent:
            raise ParentMismatch(f"cannot combine elements of {self.parent} and "
                                 f"{getattr(other, 'parent', type(other).__name__)}")

    def __add__(self, other: "Element") -> "Element":
        self._same_parent(other)
        return Element(self.parent, self.parent.reduce([a + b for a, b in zip(self.coords, other.coords)]))

    def __neg__(self) -> "Element":
        return Element(self.parent, self.parent.reduce([-a for a in self.coords]))

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __rmul__(self, k: int) -> "Element":
        return Element(self.parent, self.parent.reduce([k * a for a in self.coords]))

    @property
    def index(self) -> int:
        return self.parent.index_of(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_json(self) -> List[int]:
        return list(self.coords)


def add(a: Element, b: Element) -> Element:
    return a + b


def neg(a: Element) -> Element:
    return -a


def enumerate_elements(group: FiniteAbelianGroup) -> Iterator[Element]:
    """Yield every element once, zero first."""
    yield from group._elements


@dataclass(frozen=True)
class Homomorphism:
    """A map source -> target; column i holds the image of generator i.

    matrix[j][i] is a residue modulo the j-th target order and must satisfy
    matrix[j][i] * n_i == 0 there.
    """

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(rows) != self.target.rank or any(len(r) != self.source.rank for r in rows):
            raise ShapeMismatch(
                f"matrix shape does not match {self.source} -> {self.target}"
            )
        rows = tuple(
            tuple(x % m for x in row) for row, m in zip(rows, self.target.cyclic_orders)
        )
        for j, (row, m) in enumerate(zip(rows, self.target.cyclic_orders)):
            for i, (x, n) in enumerate(zip(row, self.source.cyclic_orders)):
                if (x * n) % m:
                    raise InvalidHomomorphism(
                        f"entry [{j}][{i}] = {x} is not killed by the order {n}",
                        witness={"row": j, "column": i},
                    )
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def from_images(cls, source: FiniteAbelianGroup, target: FiniteAbelianGroup,
                    images: Sequence[Element]) -> "Homomorphism":
        if len(images) != source.rank:
            raise ShapeMismatch(f"need {source.rank} generator images, got {len(images)}")
        for image in images:
            _check_parent(target, image)
        return cls(source, target, tuple(
            tuple(image.coords[j] for image in images) for j in range(target.rank)
        ))

    @cached_property
    def _array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64).reshape(self.target.rank, self.source.rank)

    def image_coords(self, coords: Sequence[int]) -> Tuple[int, ...]:
        return self.target.reduce([
            sum(x * c for x, c in zip(row, coords)) for row in self.matrix
        ])

    def apply(self, element: Element) -> Element:
        _check_parent(self.source, element)
        return Element(self.target, self.image_coords(element.coords))

    __call__ = apply

    @cached_property
    def index_map(self) -> np.ndarray:
        """Target index of the image of each source element, in source order."""
        images = self.source.coordinate_table @ self._array.T
        return self.target.indices_of(images.reshape(self.source.order, self.target.rank))

    def is_isomorphism(self, cap: int = DEFAULT_AUTOMORPHISM_CAP) -> bool:
        """Bijectivity on elements, checked by brute force."""
        if self.source.order > cap:
            raise CapExceeded(f"|source| = {self.source.order} exceeds the cap {cap}")
        if self.source.order != self.target.order:
            return False
        return len(np.unique(self.index_map)) == self.source.order

    def kernel_size(self) -> int:
        return int(np.count_nonzero(self.index_map == 0))

    def image(self) -> List[Element]:
        return [self.target._elements[i] for i in sorted(set(int(i) for i in self.index_map))]

    def is_identity(self) -> bool:
        return self.source == self.target and bool(
            np.array_equal(self.index_map, np.arange(self.source.order))
        )

    def inverse(self) -> "Homomorphism":
        """Inverse of a bijective homomorphism, found by brute force."""
        if not self.is_isomorphism():
            raise VerificationFailure("homomorphism is not invertible", witness=self.to_json())
        preimage = np.empty(self.target.order, dtype=np.int64)
        preimage[self.index_map] = np.arange(self.source.order)
        images = [self.source._elements[int(preimage[g.index])] for g in self.target.generators()]
        return Homomorphism.from_images(self.target, self.source, images)

    def to_json(self) -> Dict[str, Any]:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "matrix": [list(row) for row in self.matrix],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Homomorphism":
        return cls(
            FiniteAbelianGroup.from_json(data["source"]),
            FiniteAbelianGroup.from_json(data["target"]),
            tuple(tuple(row) for row in data["matrix"]),
        )


def identity(group: FiniteAbelianGroup) -> Homomorphism:
    return Homomorphism(group, group, tuple(
        tuple(1 if i == j else 0 for i in range(group.rank)) for j in range(group.rank)
    ))


def compose(f: Homomorphism, g: Homomorphism) -> Homomorphism:
    """f after g.

    Raises:
        ShapeMismatch: If the target of g is not the source of f.
    """
    if g.target != f.source:
        raise ShapeMismatch(f"cannot compose {g.source}->{g.target} with {f.source}->{f.target}")
    rows = []
    for j in range(f.target.rank):
        rows.append(tuple(
            sum(f.matrix[j][k] * g.matrix[k][i] for k in range(f.source.rank))
            for i in range(g.source.rank)
        ))
    return Homomorphism(g.source, f.target, tuple(rows))


def is_isomorphism(f: Homomorphism, cap: int = DEFAULT_AUTOMORPHISM_CAP) -> bool:
    return f.is_isomorphism(cap)


def enumerate_homomorphisms(source: FiniteAbelianGroup, target: FiniteAbelianGroup
                            ) -> Iterator[Homomorphism]:
    """All homomorphisms source -> target, images of generators in lexicographic order."""
    candidates = [
        [x for x in target._elements if (n * x).is_zero()] for n in source.cyclic_orders
    ]
    for images in itertools.product(*candidates):
        yield Homomorphism.from_images(source, target, images)


def span_with(group: FiniteAbelianGroup, span: np.ndarray, element: Element, order: int
                  ) -> np.ndarray:
    """Indices of span + <element>, where span is an index array."""
    multiples = np.array([(c * element).coords for c in range(order)], dtype=np.int64)
    coords = group.coordinate_table[span][:, None, :] + multiples[None, :, :]
    return np.unique(group.indices_of(coords.reshape(-1, group.rank)))


def enumerate_automorphisms(group: FiniteAbelianGroup, cap: int = DEFAULT_AUTOMORPHISM_CAP
                            ) -> List[Homomorphism]:
    """All bijective endomorphisms of ``group``.

    Generator images are chosen one at a time; a partial choice survives only
    if the images generate a subgroup of the full product order so far.

    Raises:
        CapExceeded: If |group| is above ``cap``.
    """
    if group.order > cap:
        raise CapExceeded(f"|A| = {group.order} exceeds the automorphism cap {cap}",
                          witness={"order": group.order, "cap": cap})
    candidates = [
        [x for x in group._elements if group.element_order(x) == n]
        for n in group.cyclic_orders
    ]
    found: List[Homomorphism] = []

    def extend(i: int, span: np.ndarray, images: List[Element]) -> None:
        if i == group.rank:
            found.append(Homomorphism.from_images(group, group, images))
            return
        n = group.cyclic_orders[i]
        for x in candidates[i]:
            grown = span_with(group, span, x, n)
            if len(grown) == len(span) * n:
                extend(i + 1, grown, images + [x])

    extend(0, np.zeros(1, dtype=np.int64), [])
    logger.info(f"|Aut({group})| = {len(found)}")
    return found


def pairing_exponent(group: FiniteAbelianGroup, chi: Sequence[int], a: Sequence[int]) -> int:
    """Exponent of ev(chi, a) as a power of zeta_exponent(group)."""
    e = group.exponent
    return sum(c * x * (e // n) for c, x, n in zip(chi, a, group.cyclic_orders)) % e


def _coords(group: FiniteAbelianGroup, value: Union[Element, int, Sequence[int]]) -> Tuple[int, ...]:
    if isinstance(value, Element):
        return value.coords
    return group.element(value).coords


class Duality(NamedTuple):
    """The character group together with its evaluation pairing."""

    group: FiniteAbelianGroup
    pairing: Callable[[Any, Any], RootOfUnity]


@dataclass(frozen=True)
class Character:
    """chi_c(a) = zeta_n^(sum c_i a_i n / n_i), n the exponent of the source."""

    source: FiniteAbelianGroup
    coords: Tuple[int, ...]

    def __call__(self, a: Union[Element, Sequence[int]]) -> RootOfUnity:
        return RootOfUnity.of(
            self.source.exponent, pairing_exponent(self.source, self.coords, _coords(self.source, a))
        )

    def to_json(self) -> List[int]:
        return list(self.coords)


def dual(group: FiniteAbelianGroup) -> Duality:
    """Character dual of ``group`` with the same cyclic orders."""
    dual_group = FiniteAbelianGroup(group.cyclic_orders)

    def pairing(chi, a) -> RootOfUnity:
        return Character(group, _coords(dual_group, chi))(a)

    return Duality(dual_group, pairing)


def characters(group: FiniteAbelianGroup) -> List[Character]:
    return [Character(group, e.coords) for e in group._elements]


def pairing_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """Exponents of ev(chi, a) at [index(chi), index(a)]."""
    if not group.rank:
        return np.zeros((1, 1), dtype=np.int64)
    table = group.coordinate_table
    weights = np.array([group.exponent // n for n in group.cyclic_orders], dtype=np.int64)
    return np.mod((table * weights) @ table.T, group.exponent)


def is_perfect_pairing(group: FiniteAbelianGroup) -> bool:
    """Both A -> A^ and A^ -> A^^ induced by ev are bijections."""
    matrix = pairing_matrix(group)
    rows = {tuple(r) for r in matrix.tolist()}
    cols = {tuple(c) for c in matrix.T.tolist()}
    return len(rows) == group.order and len(cols) == group.order


@dataclass
class AbstractDecomposition:
    """Cyclic decomposition of an abstractly given finite abelian group.

    Attributes:
        group: The decomposed group.
        items: The original objects, listed at their index in ``group``.
        keys: Hashable keys of ``items``.
    """

    group: FiniteAbelianGroup
    items: List[Any]
    keys: List[Hashable]
    key: Callable[[Any], Hashable]

    def __post_init__(self):
        self._index = {k: i for i, k in enumerate(self.keys)}

    def element_of(self, item: Any) -> Element:
        return self.group._elements[self._index[self.key(item)]]

    def item_at(self, element: Element) -> Any:
        return self.items[element.index]


def abstract_abelian_structure(generators: Sequence[Any], op: Callable[[Any, Any], Any],
                               identity_item: Any, key: Callable[[Any], Hashable] = lambda x: x,
                               cap: int = DEFAULT_AUTOMORPHISM_CAP) -> AbstractDecomposition:
    """Decompose the abelian group generated by ``generators`` under ``op``.

    Elements are reached breadth first, each with a coefficient vector over
    the generators; every edge that closes a cycle contributes a relation.
    The Smith normal form of the relation matrix gives the cyclic orders and
    the coordinates of every element.

    Raises:
        CapExceeded: If more than ``cap`` elements are generated.
        VerificationFailure: If the relations do not describe a finite group
            of the observed size.
    """
    gens = list(generators)
    k = len(gens)
    start = key(identity_item)
    vectors: Dict[Hashable, Tuple[int, ...]] = {start: (0,) * k}
    items: Dict[Hashable, Any] = {start: identity_item}
    queue = deque([identity_item])
    relations = set()
    while queue:
        x = queue.popleft()
        cx = vectors[key(x)]
        for i, g in enumerate(gens):
            y = op(x, g)
            ky = key(y)
            cy = tuple(c + (1 if j == i else 0) for j, c in enumerate(cx))
            if ky not in vectors:
                vectors[ky] = cy
                items[ky] = y
                queue.append(y)
                if len(vectors) > cap:
                    raise CapExceeded(f"generated group exceeds {cap} elements")
            else:
                relation = tuple(a - b for a, b in zip(cy, vectors[ky]))
                if any(relation):
                    relations.add(relation)
    order = len(vectors)
    if k == 0 or order == 1:
        return AbstractDecomposition(FiniteAbelianGroup.trivial(), [identity_item], [start], key)
    relation_matrix = int_matrix(sorted(relations), width=k).T
    snf = smith_normal_form(relation_matrix, right=False)
    diagonal = snf.diagonal + [0] * (k - len(snf.diagonal))
    if any(d == 0 for d in diagonal):
        raise VerificationFailure("relations leave a free factor; operation is not a finite group")
    kept = [j for j, d in enumerate(diagonal) if d > 1]
    group = FiniteAbelianGroup(tuple(diagonal[j] for j in kept))
    if group.order != order:
        raise VerificationFailure(
            f"decomposition has order {group.order} but {order} elements were generated"
        )
    slots: List[Optional[Hashable]] = [None] * order
    for item_key, vector in vectors.items():
        transformed = snf.U.dot(np.array(vector, dtype=object))
        index = group.index_of([int(transformed[j]) for j in kept])
        if slots[index] is not None:
            raise VerificationFailure("two elements received the same coordinates")
        slots[index] = item_key
    logger.info(f"abstract group of order {order} decomposes as {group}")
    return AbstractDecomposition(group, [items[s] for s in slots], list(slots), key)
