"""Clifford algebras of quadratic spaces over F_p, the Lipschitz group, Pin and Spin.

Elements are coefficient vectors over the subset basis e_S, S a bitmask of
generator indices and e_S the product of its generators in increasing
order. The defining relation is v^2 = q(v), so e_i e_j + e_j e_i = b(e_i, e_j)
with b(u, v) = q(u + v) - q(u) - q(v).
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from agentstr.logger import get_logger
from sympy import isprime, legendre_symbol

from .constants import DEFAULT_CLIFFORD_CAP, DEFAULT_MATRIX_ENTRY_CAP
from .exceptions import (
    CapExceeded, EvenPrime, InvalidForm, NonScalarNorm, NotPrime, ParentMismatch, RelationViolation,
    ShapeMismatch, VerificationFailure,
)
from .linalg import determinant_mod_p, inverse_mod_p, rank_mod_p

logger = get_logger(__name__)


def _check_prime(p: int) -> None:
    if p == 2:
        raise EvenPrime("Clifford algebras here need an odd prime", witness={"p": p})
    if not isprime(p):
        raise NotPrime(f"{p} is not prime", witness={"p": p})


@dataclass(frozen=True)
class QuadraticSpace:
    """F_p^n with q(x) = sum x_i^2 q_i + sum_{i<j} x_i x_j b_ij.

    ``gram`` is the full symmetric matrix of b, with 2 q_i on the diagonal.
    """

    p: int
    diagonal: Tuple[int, ...]
    gram: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        _check_prime(self.p)
        n = len(self.diagonal)
        diagonal = tuple(int(v) % self.p for v in self.diagonal)
        gram = np.array(self.gram, dtype=np.int64).reshape(n, n) % self.p
        if not np.array_equal(gram, gram.T):
            raise InvalidForm("Gram matrix is not symmetric")
        for i in range(n):
            gram[i, i] = (2 * diagonal[i]) % self.p
        object.__setattr__(self, "diagonal", diagonal)
        object.__setattr__(self, "gram", tuple(map(tuple, gram.tolist())))

    @classmethod
    def from_diagonal(cls, values: Sequence[int], p: int) -> "QuadraticSpace":
        n = len(values)
        return cls(p, tuple(values), tuple(tuple(0 for _ in range(n)) for _ in range(n)))

    @classmethod
    def split(cls, n: int, p: int) -> "QuadraticSpace":
        """L + L* with basis (l_i, 0), (0, phi_i): q(l, phi) = phi(l)."""
        gram = [[0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            gram[i][n + i] = gram[n + i][i] = 1
        return cls(p, (0,) * (2 * n), tuple(map(tuple, gram)))

    @classmethod
    def hyperbolic_plane(cls, p: int) -> "QuadraticSpace":
        """q(e_1) = 1, q(e_2) = -1, e_1 and e_2 orthogonal."""
        return cls.from_diagonal((1, -1), p)

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    @cached_property
    def gram_matrix(self) -> np.ndarray:
        return np.array(self.gram, dtype=np.int64).reshape(self.dimension, self.dimension)

    @cached_property
    def _upper(self) -> np.ndarray:
        return np.triu(self.gram_matrix, 1) + np.diag(np.array(self.diagonal, dtype=np.int64))

    def q(self, x: np.ndarray) -> np.ndarray:
        """q on a vector or on the rows of a matrix."""
        x = np.asarray(x, dtype=np.int64)
        return np.einsum("...i,ij,...j->...", x, self._upper, x) % self.p

    def b(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", np.asarray(x), self.gram_matrix, np.asarray(y)) % self.p

    def is_nondegenerate(self) -> bool:
        return determinant_mod_p(self.gram_matrix, self.p) != 0

    def vectors(self) -> np.ndarray:
        """All p^n vectors, lexicographic."""
        grid = np.array(list(itertools.product(range(self.p), repeat=self.dimension)), dtype=np.int64)
        return grid.reshape(self.p ** self.dimension, self.dimension)

    def to_json(self) -> Dict[str, Any]:
        return {"p": self.p, "diagonal": list(self.diagonal), "gram": [list(r) for r in self.gram]}


def _add_term(vector: Dict[int, int], mask: int, coefficient: int, p: int) -> None:
    value = (vector.get(mask, 0) + coefficient) % p
    if value:
        vector[mask] = value
    else:
        vector.pop(mask, None)


class CliffordAlgebra:
    """Cl(V, q) with a precomputed structure tensor C[S, T, U] (e_S e_T = sum_U C[S,T,U] e_U)."""

    def __init__(self, space: QuadraticSpace, cap: int = DEFAULT_MATRIX_ENTRY_CAP):
        self.space = space
        self.p = space.p
        self.n = space.dimension
        self.dim = 1 << self.n
        if self.dim ** 3 > cap:
            raise CapExceeded(f"structure tensor of size {self.dim}^3 exceeds the cap {cap}",
                              witness={"dimension": self.n, "cap": cap})
        self._generator_products: Dict[Tuple[int, int], Dict[int, int]] = {}
        self.structure = self._structure_tensor()
        self.transpose_matrix = self._transpose_matrix()
        logger.debug(f"Clifford algebra of dimension {self.dim} over F_{self.p} built")

    def _times_generator(self, mask: int, j: int) -> Dict[int, int]:
        """e_mask * e_j in the subset basis."""
        key = (mask, j)
        if key in self._generator_products:
            return self._generator_products[key]
        p = self.p
        if mask == 0:
            result = {1 << j: 1}
        else:
            top = mask.bit_length() - 1
            rest = mask & ~(1 << top)
            if top < j:
                result = {mask | (1 << j): 1}
            elif top == j:
                result = {rest: self.space.diagonal[j]} if self.space.diagonal[j] else {}
            else:
                # e_rest e_top e_j = -(e_rest e_j) e_top + b(top, j) e_rest
                result = {}
                for u, c in self._times_generator(rest, j).items():
                    _add_term(result, u | (1 << top), -c, p)
                _add_term(result, rest, self.space.gram[top][j], p)
        self._generator_products[key] = result
        return result

    def _right_multiply(self, vector: Dict[int, int], generators: Sequence[int]) -> Dict[int, int]:
        for j in generators:
            product: Dict[int, int] = {}
            for mask, c in vector.items():
                for u, d in self._times_generator(mask, j).items():
                    _add_term(product, u, c * d, self.p)
            vector = product
        return vector

    @staticmethod
    def bits(mask: int) -> List[int]:
        return [i for i in range(mask.bit_length()) if mask >> i & 1]

    def _structure_tensor(self) -> np.ndarray:
        C = np.zeros((self.dim,) * 3, dtype=np.int64)
        for s in range(self.dim):
            for t in range(self.dim):
                for u, c in self._right_multiply({s: 1}, self.bits(t)).items():
                    C[s, t, u] = c
        return C

    def _transpose_matrix(self) -> np.ndarray:
        """Column S holds e_S^T, the product of the generators of S in decreasing order."""
        matrix = np.zeros((self.dim, self.dim), dtype=np.int64)
        for s in range(self.dim):
            for u, c in self._right_multiply({0: 1}, list(reversed(self.bits(s)))).items():
                matrix[u, s] = c
        return matrix

    def element(self, coefficients: Sequence[int]) -> "CliffordElement":
        return CliffordElement(self, tuple(int(c) % self.p for c in coefficients))

    def basis_element(self, mask: int) -> "CliffordElement":
        coefficients = [0] * self.dim
        coefficients[mask] = 1
        return self.element(coefficients)

    def scalar(self, value: int) -> "CliffordElement":
        coefficients = [0] * self.dim
        coefficients[0] = value
        return self.element(coefficients)

    def one(self) -> "CliffordElement":
        return self.scalar(1)

    def generator(self, i: int) -> "CliffordElement":
        return self.basis_element(1 << i)

    def vector(self, v: Sequence[int]) -> "CliffordElement":
        """The image of v in V under V -> Cl(V)."""
        if len(v) != self.n:
            raise ShapeMismatch(f"vector of length {len(v)} in a space of dimension {self.n}")
        coefficients = [0] * self.dim
        for i, x in enumerate(v):
            coefficients[1 << i] = x
        return self.element(coefficients)

    def random_element(self, rng: np.random.Generator) -> "CliffordElement":
        return self.element(rng.integers(0, self.p, size=self.dim).tolist())

    def masks_of_parity(self, parity: int) -> List[int]:
        return [s for s in range(self.dim) if bin(s).count("1") % 2 == parity]


@dataclass(frozen=True)
class CliffordElement:
    algebra: CliffordAlgebra
    coefficients: Tuple[int, ...]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=np.int64)

    def _same_algebra(self, other: "CliffordElement") -> None:
        if not isinstance(other, CliffordElement) or other.algebra is not self.algebra:
            raise ParentMismatch("Clifford elements belong to different algebras")

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        self._same_algebra(other)
        return self.algebra.element((self.array + other.array).tolist())

    def __neg__(self) -> "CliffordElement":
        return self.algebra.element((-self.array).tolist())

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return self + (-other)

    def __rmul__(self, k: int) -> "CliffordElement":
        return self.algebra.element((int(k) * self.array).tolist())

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        self._same_algebra(other)
        product = np.einsum("s,t,stu->u", self.array, other.array, self.algebra.structure)
        return self.algebra.element(product.tolist())

    def transpose(self) -> "CliffordElement":
        return self.algebra.element((self.algebra.transpose_matrix @ self.array).tolist())

    def parity(self) -> Optional[int]:
        """0 or 1 for a non-zero homogeneous element, else None."""
        parities = {bin(s).count("1") % 2 for s, c in enumerate(self.coefficients) if c}
        return parities.pop() if len(parities) == 1 else None

    def is_homogeneous(self) -> bool:
        return self.parity() is not None

    def is_scalar(self) -> bool:
        return not any(self.coefficients[1:])

    def left_multiplication(self) -> np.ndarray:
        """Matrix of x -> self * x on the subset basis."""
        return np.einsum("s,stu->ut", self.array, self.algebra.structure) % self.algebra.p

    def inverse(self) -> Optional["CliffordElement"]:
        inverse = inverse_mod_p(self.left_multiplication(), self.algebra.p)
        if inverse is None:
            return None
        return self.algebra.element([int(x) for x in inverse[:, 0]])

    def to_json(self) -> Dict[str, int]:
        return {str(s): c for s, c in enumerate(self.coefficients) if c}

    def __str__(self) -> str:
        terms = []
        for s, c in enumerate(self.coefficients):
            if c:
                name = "".join(f"e{i + 1}" for i in CliffordAlgebra.bits(s)) or "1"
                terms.append(f"{c}*{name}")
        return " + ".join(terms) or "0"


def twisted_conjugation_matrix(g: CliffordElement, g_inverse: Optional[CliffordElement] = None
                               ) -> Optional[np.ndarray]:
    """Matrix of v -> (-1)^parity(g) g v g^-1 on V, or None if it leaves V."""
    algebra = g.algebra
    parity = g.parity()
    if parity is None:
        return None
    g_inverse = g_inverse or g.inverse()
    if g_inverse is None:
        return None
    sign = -1 if parity else 1
    vector_masks = [1 << i for i in range(algebra.n)]
    other = [s for s in range(algebra.dim) if s not in set(vector_masks)]
    matrix = np.zeros((algebra.n, algebra.n), dtype=np.int64)
    for i in range(algebra.n):
        image = (g * algebra.generator(i) * g_inverse).array * sign % algebra.p
        if image[other].any():
            return None
        matrix[:, i] = image[vector_masks]
    return matrix


def _matrix_key(matrix: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(x) for x in np.asarray(matrix).ravel())


@dataclass(frozen=True)
class LipschitzGroupElement:
    element: CliffordElement
    parity: int
    matrix: Tuple[int, ...]

    def image(self) -> np.ndarray:
        n = self.element.algebra.n
        return np.array(self.matrix, dtype=np.int64).reshape(n, n)


def orthogonal_group_of_space(space: QuadraticSpace, cap: int = DEFAULT_CLIFFORD_CAP
                              ) -> List[np.ndarray]:
    """O(V, q) by choosing images of basis vectors one column at a time.

    Raises:
        InvalidForm: If V is degenerate.
        CapExceeded: If more than ``cap`` isometries are found.
    """
    if not space.is_nondegenerate():
        raise InvalidForm("orthogonal group needs a nondegenerate space")
    n = space.dimension
    vectors = space.vectors()
    q_values = space.q(vectors)
    gram = space.gram_matrix
    found: List[np.ndarray] = []

    def extend(columns: List[np.ndarray]) -> None:
        j = len(columns)
        if j == n:
            matrix = np.stack(columns, axis=1) if n else np.zeros((0, 0), dtype=np.int64)
            found.append(matrix)
            if len(found) > cap:
                raise CapExceeded(f"O(V) has more than {cap} elements")
            return
        pool = vectors[q_values == space.diagonal[j]]
        for i, c in enumerate(columns):
            pool = pool[space.b(pool, c) == gram[i, j]]
        for v in pool:
            extend(columns + [v])

    extend([])
    return found


def reflection_matrix(space: QuadraticSpace, v: Sequence[int]) -> np.ndarray:
    """x -> x - b(x, v) q(v)^-1 v.

    Raises:
        ValueError: If v is isotropic.
    """
    v = np.asarray(v, dtype=np.int64) % space.p
    qv = int(space.q(v))
    if qv == 0:
        raise ValueError(f"cannot reflect in the isotropic vector {v.tolist()}")
    factor = pow(qv, -1, space.p)
    columns = [
        (e - space.b(e, v) * factor * v) % space.p for e in np.eye(space.dimension, dtype=np.int64)
    ]
    return np.stack(columns, axis=1)


def anisotropic_vectors(space: QuadraticSpace) -> List[np.ndarray]:
    vectors = space.vectors()
    return [v for v, qv in zip(vectors, space.q(vectors)) if qv]


def reflection_generated_group(space: QuadraticSpace, cap: int = DEFAULT_CLIFFORD_CAP
                               ) -> Dict[Tuple[int, ...], int]:
    """The group generated by reflections, each element with its spinor norm class (+1 or -1).

    The class of r_v1 ... r_vk is the Legendre symbol of q(v_1) ... q(v_k).

    Raises:
        VerificationFailure: If an element is reached with both classes.
        CapExceeded: If the group exceeds ``cap`` elements.
    """
    p = space.p
    reflections = [
        (reflection_matrix(space, v), legendre_symbol(int(space.q(v)), p))
        for v in anisotropic_vectors(space)
    ]
    start = np.eye(space.dimension, dtype=np.int64)
    classes = {_matrix_key(start): 1}
    frontier = [start]
    while frontier:
        nxt = []
        for g in frontier:
            for r, sign in reflections:
                h = (r @ g) % p
                key = _matrix_key(h)
                value = classes[_matrix_key(g)] * sign
                if key not in classes:
                    classes[key] = value
                    nxt.append(h)
                    if len(classes) > cap:
                        raise CapExceeded(f"reflection group exceeds {cap} elements")
                elif classes[key] != value:
                    raise VerificationFailure("spinor norm class is not well defined",
                                              witness={"matrix": list(key)})
        frontier = nxt
    return classes


@dataclass
class LipschitzReport:
    space: QuadraticSpace
    elements: List[LipschitzGroupElement]
    orthogonal: List[np.ndarray]
    kernel: List[CliffordElement]

    @property
    def kernel_is_scalars(self) -> bool:
        return len(self.kernel) == self.space.p - 1 and all(k.is_scalar() for k in self.kernel)

    @property
    def surjective(self) -> bool:
        images = {e.matrix for e in self.elements}
        return images == {_matrix_key(g) for g in self.orthogonal}

    def to_json(self) -> Dict[str, Any]:
        return {
            "space": self.space.to_json(),
            "gamma_order": len(self.elements),
            "orthogonal_order": len(self.orthogonal),
            "kernel_is_scalars": self.kernel_is_scalars,
            "surjective": self.surjective,
        }


def lipschitz_group(space: QuadraticSpace, cap: int = DEFAULT_CLIFFORD_CAP) -> LipschitzReport:
    """All homogeneous invertible g whose twisted conjugation preserves V.

    Raises:
        CapExceeded: If the number of homogeneous candidates exceeds ``cap``.
        InvalidForm: If V is degenerate.
    """
    algebra = CliffordAlgebra(space)
    p = space.p
    candidates = sum(p ** len(algebra.masks_of_parity(parity)) for parity in (0, 1))
    if candidates > cap:
        raise CapExceeded(f"{candidates} homogeneous candidates exceed the cap {cap}",
                          witness={"candidates": candidates, "cap": cap})
    orthogonal = orthogonal_group_of_space(space)
    identity_key = _matrix_key(np.eye(space.dimension, dtype=np.int64))
    elements, kernel = [], []
    for parity in (0, 1):
        masks = algebra.masks_of_parity(parity)
        for values in itertools.product(range(p), repeat=len(masks)):
            if not any(values):
                continue
            coefficients = [0] * algebra.dim
            for mask, value in zip(masks, values):
                coefficients[mask] = value
            g = algebra.element(coefficients)
            matrix = twisted_conjugation_matrix(g)
            if matrix is None:
                continue
            element = LipschitzGroupElement(g, parity, _matrix_key(matrix))
            elements.append(element)
            if element.matrix == identity_key:
                kernel.append(g)
    report = LipschitzReport(space, elements, orthogonal, kernel)
    logger.info(f"|Gamma| = {len(elements)}, |O(V)| = {len(orthogonal)} over F_{p}")
    return report


def spinor_norm(g: CliffordElement) -> int:
    """N(g) = g g^T as an element of F_p.

    Raises:
        NonScalarNorm: If g g^T is not a scalar.
    """
    norm = g * g.transpose()
    if not norm.is_scalar():
        raise NonScalarNorm(f"g g^T is not a scalar for g = {g}", witness=norm.to_json())
    return norm.coefficients[0]


def square_class(value: int, p: int) -> int:
    """+1 for a non-zero square in F_p, -1 otherwise."""
    return legendre_symbol(value % p, p)


def pin(report: LipschitzReport) -> List[LipschitzGroupElement]:
    """ker N."""
    return [e for e in report.elements if spinor_norm(e.element) == 1]


def spin(report: LipschitzReport) -> List[LipschitzGroupElement]:
    """Elements of Pin whose image has determinant 1."""
    p = report.space.p
    return [e for e in pin(report) if determinant_mod_p(e.image(), p) == 1]


@dataclass
class SpinReport:
    space: QuadraticSpace
    gamma_order: int
    orthogonal_order: int
    reflection_group_order: int
    kernel_is_scalars: bool
    surjective: bool
    pin: List[LipschitzGroupElement]
    spin: List[LipschitzGroupElement]
    norm_kernel_order: int
    pin_image_order: int
    pin_kernel: List[CliffordElement]
    diagram_commutes: bool
    determinant_matches_parity: bool

    @property
    def pin_kernel_is_plus_minus_one(self) -> bool:
        p = self.space.p
        return sorted(k.coefficients[0] for k in self.pin_kernel) == sorted({1, p - 1}) \
            and all(k.is_scalar() for k in self.pin_kernel)

    @property
    def reflections_generate_orthogonal(self) -> bool:
        return self.reflection_group_order == self.orthogonal_order

    @property
    def pin_onto_norm_kernel(self) -> bool:
        return self.pin_image_order == self.norm_kernel_order

    def to_json(self) -> Dict[str, Any]:
        return {
            "space": self.space.to_json(),
            "gamma_order": self.gamma_order,
            "orthogonal_order": self.orthogonal_order,
            "reflection_group_order": self.reflection_group_order,
            "reflections_generate_orthogonal": self.reflections_generate_orthogonal,
            "kernel_is_scalars": self.kernel_is_scalars,
            "surjective": self.surjective,
            "pin_order": len(self.pin),
            "spin_order": len(self.spin),
            "pin": [str(e.element) for e in self.pin],
            "spin": [str(e.element) for e in self.spin],
            "norm_kernel_order": self.norm_kernel_order,
            "pin_onto_norm_kernel": self.pin_onto_norm_kernel,
            "pin_kernel_is_plus_minus_one": self.pin_kernel_is_plus_minus_one,
            "diagram_commutes": self.diagram_commutes,
            "determinant_matches_parity": self.determinant_matches_parity,
        }


def pin_spin_report(space: QuadraticSpace, cap: int = DEFAULT_CLIFFORD_CAP) -> SpinReport:
    """Gamma, Pin, Spin and the spinor norm square on one space."""
    p = space.p
    gamma = lipschitz_group(space, cap)
    classes = reflection_generated_group(space, cap)
    commutes = all(
        classes.get(e.matrix) == square_class(spinor_norm(e.element), p) for e in gamma.elements
    )
    parity_ok = all(
        determinant_mod_p(e.image(), p) == (p - 1 if e.parity else 1) for e in gamma.elements
    )
    pin_elements = pin(gamma)
    identity_key = _matrix_key(np.eye(space.dimension, dtype=np.int64))
    report = SpinReport(
        space=space,
        gamma_order=len(gamma.elements),
        orthogonal_order=len(gamma.orthogonal),
        reflection_group_order=len(classes),
        kernel_is_scalars=gamma.kernel_is_scalars,
        surjective=gamma.surjective,
        pin=pin_elements,
        spin=spin(gamma),
        norm_kernel_order=sum(1 for sign in classes.values() if sign == 1),
        pin_image_order=len({e.matrix for e in pin_elements}),
        pin_kernel=[e.element for e in pin_elements if e.matrix == identity_key],
        diagram_commutes=commutes,
        determinant_matches_parity=parity_ok,
    )
    logger.info(f"|Pin| = {len(report.pin)}, |Spin| = {len(report.spin)} over F_{p}")
    return report


def exterior_operators(n: int, p: int) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Wedge and contraction by the i-th generator on the 2^n-dimensional exterior algebra."""
    size = 1 << n
    wedges, contractions = [], []
    for i in range(n):
        wedge = np.zeros((size, size), dtype=np.int64)
        contraction = np.zeros((size, size), dtype=np.int64)
        for s in range(size):
            sign = -1 if bin(s & ((1 << i) - 1)).count("1") % 2 else 1
            if s >> i & 1:
                contraction[s & ~(1 << i), s] = sign % p
            else:
                wedge[s | (1 << i), s] = sign % p
        wedges.append(wedge)
        contractions.append(contraction)
    return wedges, contractions


@dataclass
class SpinorModuleReport:
    n: int
    p: int
    clifford_dimension: int
    module_dimension: int
    rank: int

    @property
    def bijective(self) -> bool:
        return self.rank == self.clifford_dimension == self.module_dimension ** 2

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "clifford_dimension": self.clifford_dimension,
            "module_dimension": self.module_dimension,
            "rank": self.rank,
            "bijective": self.bijective,
        }


def spinor_module(n: int, p: int) -> SpinorModuleReport:
    """Cl(L + L*) acting on the exterior algebra, (l, 0) by wedge and (0, phi) by contraction.

    Raises:
        RelationViolation: If rho(v)^2 != q(v) for some v, or rho is not
            multiplicative on a pair of basis elements.
        CapExceeded: If the Clifford algebra is too large.
    """
    space = QuadraticSpace.split(n, p)
    algebra = CliffordAlgebra(space)
    wedges, contractions = exterior_operators(n, p)
    generators = wedges + contractions
    size = 1 << n
    identity = np.eye(size, dtype=np.int64)
    for v in space.vectors():
        rho = sum((int(x) * g for x, g in zip(v, generators)), np.zeros((size, size), dtype=np.int64))
        if not np.array_equal((rho @ rho) % p, (int(space.q(v)) * identity) % p):
            raise RelationViolation("rho(v)^2 != q(v)", witness={"v": v.tolist()})
    images = []
    for s in range(algebra.dim):
        image = identity.copy()
        for i in CliffordAlgebra.bits(s):
            image = (image @ generators[i]) % p
        images.append(image)
    stacked = np.stack(images)
    for s, t in itertools.product(range(algebra.dim), repeat=2):
        expected = np.einsum("u,uij->ij", algebra.structure[s, t], stacked) % p
        if not np.array_equal((images[s] @ images[t]) % p, expected):
            raise RelationViolation("rho is not multiplicative", witness={"pair": [s, t]})
    rank = rank_mod_p(stacked.reshape(algebra.dim, -1), p)
    report = SpinorModuleReport(n, p, algebra.dim, size, rank)
    logger.info(f"spinor module n={n}, p={p}: rank {rank} of {algebra.dim}")
    return report
