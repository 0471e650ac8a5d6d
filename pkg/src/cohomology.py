"""Bar-resolution cohomology of finite abelian groups with trivial action.

Cochains take values in mu_N and are stored additively: a table of exponents
of shape (|G|,) * n. The differential is

    (df)(g_1..g_{n+1}) = f(g_2..g_{n+1})
                         + sum_i (-1)^i f(.., g_i + g_{i+1}, ..)
                         + (-1)^(n+1) f(g_1..g_n).

Cohomology with mu_N coefficients is read off the integer differential
matrices reduced mod N. For the full scalar group, which is divisible, the
answer is the torsion of the cokernel of the integral differential, so
H^n(G, k^x) is computed as H^(n+1)(G, Z).
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from agentstr.logger import get_logger
from sympy import primefactors

from .abelian import Element, FiniteAbelianGroup, Homomorphism, abstract_abelian_structure, compose, identity
from .constants import (
    DEFAULT_MATRIX_ENTRY_CAP, MAX_DEGREE3_GROUP_ORDER, MAX_DEGREE4_GROUP_ORDER, MAX_EM_GROUP_ORDER,
)
from .exceptions import (
    CapExceeded, InvalidCocycle, NotSquareOrder, ParentMismatch, ShapeMismatch, VerificationFailure,
)
from .linalg import (
    howell_form, homology_mod, int_matrix, lex_reduce, smith_normal_form, solve_mod,
)
from .orthogonal import map_key, preserves_form, subgroup_generated_by
from .quadratic import MetricGroup, QuadraticForm, enumerate_quadratic_forms
from .scalars import RootOfUnity

logger = get_logger(__name__)


class Cochain:
    """An n-cochain G^n -> mu_modulus given by its exponent table."""

    __hash__ = None

    def __init__(self, group: FiniteAbelianGroup, degree: int, modulus: int, table):
        if degree < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")
        if modulus < 1:
            raise ValueError(f"modulus must be positive, got {modulus}")
        array = np.asarray(table, dtype=np.int64)
        shape = (group.order,) * degree
        if array.shape != shape:
            raise ShapeMismatch(f"cochain table has shape {array.shape}, expected {shape}")
        self.group = group
        self.degree = degree
        self.modulus = modulus
        self.table = np.mod(array, modulus)

    @classmethod
    def zero(cls, group: FiniteAbelianGroup, degree: int, modulus: int) -> "Cochain":
        return cls(group, degree, modulus, np.zeros((group.order,) * degree, dtype=np.int64))

    @classmethod
    def from_function(cls, group: FiniteAbelianGroup, degree: int, modulus: int,
                      fn: Callable[..., int]) -> "Cochain":
        """Tabulate fn(*elements), an exponent of zeta_modulus, over G^degree."""
        elements = group.elements()
        table = np.zeros((group.order,) * degree, dtype=np.int64)
        for index in itertools.product(range(group.order), repeat=degree):
            table[index] = fn(*(elements[i] for i in index))
        return cls(group, degree, modulus, table)

    @classmethod
    def from_vector(cls, group: FiniteAbelianGroup, degree: int, modulus: int,
                    vector: Sequence[int], normalized: bool = True) -> "Cochain":
        start = 1 if normalized else 0
        base = group.order - start
        values = np.array([int(v) for v in vector], dtype=np.int64).reshape((base,) * degree)
        table = np.zeros((group.order,) * degree, dtype=np.int64)
        table[(slice(start, None),) * degree] = values
        return cls(group, degree, modulus, table)

    def to_vector(self, normalized: bool = True) -> List[int]:
        start = 1 if normalized else 0
        return [int(v) for v in self.table[(slice(start, None),) * self.degree].ravel()]

    def value(self, *elements: Element) -> RootOfUnity:
        if len(elements) != self.degree:
            raise ShapeMismatch(f"{self.degree}-cochain called with {len(elements)} arguments")
        for a in elements:
            if a.parent != self.group:
                raise ParentMismatch(f"element of {a.parent} passed to a cochain on {self.group}")
        return RootOfUnity.of(self.modulus, int(self.table[tuple(a.index for a in elements)]))

    __call__ = value

    def is_zero(self) -> bool:
        return not self.table.any()

    def is_normalized(self) -> bool:
        return all(not np.take(self.table, 0, axis=k).any() for k in range(self.degree))

    def embed(self, modulus: int) -> "Cochain":
        """The same cochain with values read in mu_modulus."""
        if modulus % self.modulus:
            raise ValueError(f"modulus {modulus} is not a multiple of {self.modulus}")
        return Cochain(self.group, self.degree, modulus, self.table * (modulus // self.modulus))

    def _check_compatible(self, other: "Cochain") -> None:
        if (self.group, self.degree, self.modulus) != (other.group, other.degree, other.modulus):
            raise ShapeMismatch("cochains differ in group, degree or modulus")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(self.group, self.degree, self.modulus, self.table + other.table)

    def __neg__(self) -> "Cochain":
        return Cochain(self.group, self.degree, self.modulus, -self.table)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __rmul__(self, k: int) -> "Cochain":
        return Cochain(self.group, self.degree, self.modulus, int(k) * self.table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.group, self.degree, self.modulus) == (other.group, other.degree, other.modulus) \
            and bool(np.array_equal(self.table, other.table))

    def __repr__(self) -> str:
        return f"Cochain({self.group}, degree={self.degree}, modulus={self.modulus})"

    def to_json(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_json(),
            "degree": self.degree,
            "modulus": self.modulus,
            "table": [int(v) for v in self.table.ravel()],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Cochain":
        group = FiniteAbelianGroup.from_json(data["group"])
        degree = int(data["degree"])
        flat = np.array(data["table"], dtype=np.int64)
        if flat.size != group.order ** degree:
            raise ShapeMismatch(f"cochain file has {flat.size} entries, expected {group.order ** degree}")
        return cls(group, degree, int(data["modulus"]), flat.reshape((group.order,) * degree))


def _differential_slice(table: np.ndarray, group: FiniteAbelianGroup, first: int) -> np.ndarray:
    """(df)(first, g_2, ..., g_{n+1}) for all g_2..g_{n+1}."""
    n = table.ndim
    add = group.addition_table
    full = [np.full((group.order,) * n, first, dtype=np.int64)] + list(np.indices((group.order,) * n))
    total = table.copy()
    for i in range(1, n + 1):
        args = full[:i - 1] + [add[full[i - 1], full[i]]] + full[i + 1:]
        total += (-1) ** i * table[tuple(args)]
    total += (-1) ** (n + 1) * table[tuple(full[:n])]
    return total


def differential(c: Cochain) -> Cochain:
    """The bar differential; d(d(c)) == 0."""
    m = c.group.order
    if c.degree == 0:
        return Cochain.zero(c.group, 1, c.modulus)
    table = np.stack([_differential_slice(c.table, c.group, g) for g in range(m)])
    return Cochain(c.group, c.degree + 1, c.modulus, table)


def cocycle_witness(c: Cochain) -> Optional[Dict[str, Any]]:
    """First argument tuple where dc does not vanish, scanning one leading argument at a time."""
    if c.degree == 0 or c.is_zero():
        return None
    for first in range(c.group.order):
        defect = np.mod(_differential_slice(c.table, c.group, first), c.modulus)
        bad = np.argwhere(defect != 0)
        if len(bad):
            indices = [first] + [int(i) for i in bad[0]]
            return {
                "relation": "cocycle",
                "arguments": [list(c.group.coords_at(i)) for i in indices],
            }
    return None


def is_cocycle(c: Cochain) -> bool:
    return cocycle_witness(c) is None


def _check_matrix_cap(rows: int, cols: int, cap: int) -> None:
    if rows * cols > cap:
        raise CapExceeded(f"differential matrix {rows}x{cols} exceeds the entry cap {cap}",
                          witness={"rows": rows, "cols": cols, "cap": cap})


@lru_cache(maxsize=64)
def differential_matrix(group: FiniteAbelianGroup, degree: int, normalized: bool = True,
                        cap: int = DEFAULT_MATRIX_ENTRY_CAP) -> np.ndarray:
    """Integer matrix of d: C^degree -> C^(degree+1) acting on column vectors.

    Coordinates follow ``Cochain.to_vector``: argument tuples in lexicographic
    order, restricted to non-zero arguments when ``normalized``.
    """
    start = 1 if normalized else 0
    base = group.order - start
    rows, cols = base ** (degree + 1), base ** degree
    _check_matrix_cap(rows, cols, cap)
    matrix = np.zeros((rows, cols), dtype=np.int64)
    if degree > 0 and rows:
        grid = np.indices((base,) * (degree + 1)).reshape(degree + 1, -1) + start
        row_ids = np.arange(rows)
        add = group.addition_table
        terms = [(1, grid[1:])]
        for i in range(1, degree + 1):
            merged = add[grid[i - 1], grid[i]][None, :]
            terms.append(((-1) ** i, np.concatenate([grid[:i - 1], merged, grid[i + 1:]])))
        terms.append(((-1) ** (degree + 1), grid[:degree]))
        for sign, args in terms:
            keep = np.all(args != 0, axis=0) if normalized else np.ones(rows, dtype=bool)
            cols_hit = np.ravel_multi_index(tuple(args[:, keep] - start), (base,) * degree)
            np.add.at(matrix, (row_ids[keep], cols_hit), sign)
    return matrix.astype(object)


def is_coboundary(c: Cochain, full_scalars: bool = False) -> Optional[Cochain]:
    """A primitive s with ds == c, or None.

    With ``full_scalars`` the primitive may take values in the divisible
    group of all roots of unity; it is then found in mu_(N |G|), which is
    always enough.
    """
    if c.degree == 0:
        return None if not c.is_zero() else Cochain.zero(c.group, 0, c.modulus)
    target = c.embed(c.modulus * c.group.order) if full_scalars else c
    matrix = differential_matrix(c.group, c.degree - 1, normalized=False)
    solution = solve_mod(matrix, target.to_vector(normalized=False), target.modulus)
    if solution is None:
        return None
    return Cochain.from_vector(c.group, c.degree - 1, target.modulus, solution, normalized=False)


@dataclass(frozen=True)
class Coefficients:
    """mu_N (``modulus`` set) or the full scalar group (``modulus`` None)."""

    modulus: Optional[int] = None

    @classmethod
    def mu(cls, n: int) -> "Coefficients":
        if n < 1:
            raise ValueError(f"mu_N needs N >= 1, got {n}")
        return cls(n)

    @classmethod
    def scalars(cls) -> "Coefficients":
        return cls(None)

    @property
    def is_full(self) -> bool:
        return self.modulus is None

    def __str__(self) -> str:
        return "scalars" if self.is_full else f"muN:{self.modulus}"


@dataclass(eq=False)
class CohomologyGroup:
    """H^degree(G, coefficients) with one representative per cyclic factor.

    Representatives are normalized cocycles with values in mu_modulus,
    lexicographically least in their class.
    """

    group: FiniteAbelianGroup
    degree: int
    coefficients: Coefficients
    modulus: int
    invariant_factors: List[int]
    representatives: List[Cochain]
    d_prev: np.ndarray = field(repr=False)
    column_basis_inverse: Optional[np.ndarray] = field(default=None, repr=False)
    diagonal: List[int] = field(default_factory=list, repr=False)

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    def is_coboundary(self, c: Cochain) -> bool:
        if not c.is_normalized():
            c = normalize(c)[0]
        if self.coefficients.is_full:
            y = self.column_basis_inverse.dot(np.array(c.to_vector(), dtype=object))
            return all(y[i] % c.modulus == 0 for i, d in enumerate(self.diagonal) if d > 1)
        if c.modulus != self.modulus:
            raise ShapeMismatch(f"cochain modulus {c.modulus} differs from {self.modulus}")
        return solve_mod(self.d_prev, c.to_vector(), self.modulus) is not None

    def class_coordinates(self, c: Cochain) -> List[int]:
        """Coordinates of [c] in the cyclic factors (full scalars only)."""
        if not self.coefficients.is_full:
            raise ValueError("class coordinates are only tracked for full scalar coefficients")
        if not c.is_normalized():
            c = normalize(c)[0]
        y = self.column_basis_inverse.dot(np.array(c.to_vector(), dtype=object))
        return [int(y[i] * d // c.modulus) % d for i, d in enumerate(self.diagonal) if d > 1]

    def verify(self) -> None:
        """Representatives are cocycles of the stated orders and pairwise non-cohomologous.

        Raises:
            VerificationFailure: With the offending representative index.
        """
        for i, (d, rep) in enumerate(zip(self.invariant_factors, self.representatives)):
            witness = cocycle_witness(rep)
            if witness is not None:
                raise VerificationFailure(f"representative {i} is not a cocycle", witness=witness)
            for p in primefactors(d):
                if self.is_coboundary((d // p) * rep):
                    raise VerificationFailure(f"representative {i} has order below {d}",
                                              witness={"index": i, "prime": p})
        for i, j in itertools.combinations(range(len(self.representatives)), 2):
            if self.is_coboundary(self.representatives[i] - self.representatives[j]):
                raise VerificationFailure(f"representatives {i} and {j} are cohomologous",
                                          witness={"pair": [i, j]})

    def to_json(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_json(),
            "degree": self.degree,
            "coefficients": str(self.coefficients),
            "invariant_factors": list(self.invariant_factors),
            "order": self.order,
            "representatives": [rep.to_json() for rep in self.representatives],
        }


def _boundary_matrix(group: FiniteAbelianGroup, degree: int, cap: int) -> np.ndarray:
    if degree == 0:
        return np.zeros((1, 0), dtype=object)
    return differential_matrix(group, degree - 1, cap=cap)


def cohomology(group: FiniteAbelianGroup, degree: int, coefficients: Coefficients,
               cap: int = DEFAULT_MATRIX_ENTRY_CAP) -> CohomologyGroup:
    """H^degree(group, coefficients) with trivial action.

    Raises:
        CapExceeded: If a differential matrix exceeds ``cap`` entries.
        ValueError: For degree 0 with full scalar coefficients.
    """
    d_prev = _boundary_matrix(group, degree, cap)
    d_next = differential_matrix(group, degree, cap=cap)
    if coefficients.is_full:
        if degree == 0:
            raise ValueError("H^0 with full scalar coefficients is not finite")
        snf = smith_normal_form(d_next, left=False)
        diagonal = snf.diagonal
        kept = [(i, d) for i, d in enumerate(diagonal) if d > 1]
        factors = [d for _, d in kept]
        modulus = math.lcm(*factors) if factors else 1
        vectors = [(snf.V[:, i] * (modulus // d)) % modulus for i, d in kept]
        rank = len([d for d in diagonal if d])
        basis = howell_form(snf.V[:, rank:].T, modulus, width=d_next.shape[1])
        result = CohomologyGroup(group, degree, coefficients, modulus, factors, [],
                                 d_prev, snf.Vinv, diagonal)
    else:
        modulus = coefficients.modulus
        factors, vectors = homology_mod(d_prev, d_next, modulus)
        basis = howell_form(d_prev.T, modulus, width=d_next.shape[1])
        result = CohomologyGroup(group, degree, coefficients, modulus, factors, [], d_prev)
    result.representatives = [
        Cochain.from_vector(group, degree, modulus, lex_reduce(v, basis, modulus)) for v in vectors
    ]
    logger.info(f"H^{degree}({group}, {coefficients}) = "
                f"{' + '.join(f'Z/{d}' for d in factors) or '0'}")
    return result


def cocycle_count_brute_force(group: FiniteAbelianGroup, degree: int, modulus: int,
                              cap: int = 1 << 16) -> Tuple[int, int]:
    """(number of normalized cocycles, number of normalized coboundaries) by enumeration."""
    d_next = differential_matrix(group, degree).astype(np.int64)
    d_prev = _boundary_matrix(group, degree, DEFAULT_MATRIX_ENTRY_CAP).astype(np.int64)
    width, prev_width = d_next.shape[1], d_prev.shape[1]
    if modulus ** width > cap or modulus ** prev_width > cap:
        raise CapExceeded(f"brute force over {modulus}^{max(width, prev_width)} cochains exceeds {cap}")
    cochains = np.array(list(itertools.product(range(modulus), repeat=width)),
                        dtype=np.int64).reshape(-1, width)
    cocycles = int(np.count_nonzero(~np.mod(cochains @ d_next.T, modulus).any(axis=1)))
    primitives = np.array(list(itertools.product(range(modulus), repeat=prev_width)),
                          dtype=np.int64).reshape(-1, prev_width)
    boundaries = np.mod(primitives @ d_prev.T, modulus)
    return cocycles, len({tuple(row) for row in boundaries.tolist()})


def carry_cocycle(group: FiniteAbelianGroup, i: int = 0, j: int = 0,
                  modulus: Optional[int] = None) -> Cochain:
    """tau(a, b, c) = a_i * floor((b_j + c_j) / n_j) as a power of zeta_(n_i)."""
    n_i, n_j = group.cyclic_orders[i], group.cyclic_orders[j]
    modulus = modulus or n_i
    if modulus % n_i:
        raise ValueError(f"modulus {modulus} is not a multiple of {n_i}")
    coords = group.coordinate_table
    a = coords[:, i][:, None, None]
    carry = (coords[:, j][:, None] + coords[:, j][None, :]) // n_j
    return Cochain(group, 3, modulus, a * carry[None, :, :] * (modulus // n_i))


def standard_carry_cocycle(n: int, modulus: Optional[int] = None) -> Cochain:
    """The generator a * floor((b + c) / n) of H^3(Z/n, k^x)."""
    return carry_cocycle(FiniteAbelianGroup((n,)), 0, 0, modulus)


def product_cocycle(group: FiniteAbelianGroup, i: int, j: int, k: int,
                    modulus: Optional[int] = None) -> Cochain:
    """The trilinear cocycle a_i b_j c_k, valued in mu_gcd(n_i, n_j, n_k)."""
    orders = group.cyclic_orders
    g = math.gcd(orders[i], orders[j], orders[k])
    modulus = modulus or g
    if modulus % g:
        raise ValueError(f"modulus {modulus} is not a multiple of {g}")
    coords = group.coordinate_table
    table = coords[:, i][:, None, None] * coords[:, j][None, :, None] * coords[:, k][None, None, :]
    return Cochain(group, 3, modulus, np.mod(table, g) * (modulus // g))


def pullback(c: Cochain, f: Homomorphism) -> Cochain:
    """c composed with f in every argument."""
    if f.target != c.group:
        raise ParentMismatch(f"cannot pull a cochain on {c.group} back along a map into {f.target}")
    if c.degree == 0:
        return Cochain(f.source, 0, c.modulus, c.table)
    return Cochain(f.source, c.degree, c.modulus, c.table[np.ix_(*([f.index_map] * c.degree))])


def normalize(c: Cochain) -> Tuple[Cochain, Cochain]:
    """A normalized cocycle c - ds together with the shift s.

    Raises:
        InvalidCocycle: If no shift makes c vanish on degenerate arguments,
            which happens only when c is not a cocycle.
    """
    if c.degree == 0 or c.is_normalized():
        return c, Cochain.zero(c.group, max(c.degree - 1, 0), c.modulus)
    matrix = differential_matrix(c.group, c.degree - 1, normalized=False)
    flat = np.indices((c.group.order,) * c.degree).reshape(c.degree, -1)
    degenerate = np.nonzero(np.any(flat == 0, axis=0))[0]
    values = c.table.ravel()[degenerate]
    shift = solve_mod(matrix[degenerate], values, c.modulus)
    if shift is None:
        raise InvalidCocycle("cochain has no normalized cohomologous representative",
                             witness=cocycle_witness(c))
    s = Cochain.from_vector(c.group, c.degree - 1, c.modulus, shift, normalized=False)
    return c - differential(s), s


def t_tensor(tau: Cochain) -> np.ndarray:
    """T[l, x, y] = tau(l, x, y) + tau(x, y, l) - tau(x, l, y) modulo tau.modulus."""
    if tau.degree != 3:
        raise ShapeMismatch(f"T needs a 3-cochain, got degree {tau.degree}")
    t = tau.table
    return np.mod(t + np.transpose(t, (2, 0, 1)) - np.transpose(t, (1, 0, 2)), tau.modulus)


@dataclass(eq=False)
class AbelianThreeCocycle:
    """A pair (tau, b): tau a 3-cochain and b an |A| x |A| exponent table, both mod ``modulus``."""

    group: FiniteAbelianGroup
    modulus: int
    tau: Cochain
    b: np.ndarray

    def __post_init__(self):
        if self.tau.group != self.group or self.tau.degree != 3:
            raise ShapeMismatch("tau must be a 3-cochain on the same group")
        if self.tau.modulus != self.modulus:
            self.tau = self.tau.embed(self.modulus)
        self.b = np.mod(np.asarray(self.b, dtype=np.int64), self.modulus)
        if self.b.shape != (self.group.order,) * 2:
            raise ShapeMismatch(f"b has shape {self.b.shape}, expected {(self.group.order,) * 2}")

    def to_json(self) -> Dict[str, Any]:
        return {
            "tau": self.tau.to_json(),
            "b": [[int(v) for v in row] for row in self.b],
            "modulus": self.modulus,
        }


def _hexagon_witness(name: str, defect: np.ndarray, group: FiniteAbelianGroup
                     ) -> Optional[Dict[str, Any]]:
    bad = np.argwhere(defect != 0)
    if not len(bad):
        return None
    return {"relation": name, "arguments": [list(group.coords_at(int(i))) for i in bad[0]]}


def abelian_cocycle_witness(x: AbelianThreeCocycle) -> Optional[Dict[str, Any]]:
    """The first failing relation among d(tau) = 0 and the two hexagon families.

    With T_x(y, z) = T[x, y, z]:
        T_x(y, z) = b(x, z) - b(x, y + z) + b(x, y)
        T_z(x, y) = -b(x, z) + b(x + y, z) - b(y, z)
    """
    witness = cocycle_witness(x.tau)
    if witness is not None:
        return {**witness, "relation": "pentagon"}
    m, N = x.group.order, x.modulus
    add = x.group.addition_table
    T = t_tensor(x.tau)
    b = x.b
    X, Y, Z = np.indices((m, m, m))
    hex1 = np.mod(T - b[X, Z] + b[X, add[Y, Z]] - b[X, Y], N)
    witness = _hexagon_witness("hexagon_left", hex1, x.group)
    if witness is not None:
        return witness
    hex2 = np.mod(T[Z, X, Y] + b[X, Z] - b[add[X, Y], Z] + b[Y, Z], N)
    return _hexagon_witness("hexagon_right", hex2, x.group)


def is_abelian_3cocycle(x: AbelianThreeCocycle) -> Tuple[bool, Optional[Dict[str, Any]]]:
    witness = abelian_cocycle_witness(x)
    return witness is None, witness


def quadratic_form_of(x: AbelianThreeCocycle) -> QuadraticForm:
    """q(a) = b(a, a).

    Raises:
        InvalidCocycle: If (tau, b) fails a pentagon or hexagon relation.
    """
    witness = abelian_cocycle_witness(x)
    if witness is not None:
        raise InvalidCocycle(f"not an abelian 3-cocycle: {witness['relation']} fails", witness=witness)
    return QuadraticForm(x.group, x.modulus, tuple(int(v) for v in np.diagonal(x.b)))


def _em_constraint_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """Rows: d(tau) = 0, then both hexagon families, over normalized (tau, b) coordinates."""
    m = group.order
    base = m - 1
    n_tau = base ** 3
    width = n_tau + base ** 2
    add = group.addition_table

    def tau_col(x: int, y: int, z: int) -> int:
        return ((x - 1) * base + (y - 1)) * base + (z - 1)

    def t_terms(l: int, x: int, y: int) -> List[Tuple[int, int]]:
        return [(1, tau_col(l, x, y)), (1, tau_col(x, y, l)), (-1, tau_col(x, l, y))]

    def b_terms(terms: Sequence[Tuple[int, int, int]]) -> List[Tuple[int, int]]:
        return [(sign, n_tau + (u - 1) * base + (v - 1)) for sign, u, v in terms if u and v]

    rows = [list(r) + [0] * base ** 2 for r in differential_matrix(group, 3).tolist()]
    for x, y, z in itertools.product(range(1, m), repeat=3):
        yz, xy = int(add[y, z]), int(add[x, y])
        hex_left = t_terms(x, y, z) + b_terms([(-1, x, z), (1, x, yz), (-1, x, y)])
        hex_right = t_terms(z, x, y) + b_terms([(1, x, z), (-1, xy, z), (1, y, z)])
        for terms in (hex_left, hex_right):
            row = [0] * width
            for sign, col in terms:
                row[col] += sign
            rows.append(row)
    return int_matrix(rows, width=width)


def _em_coboundary_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """Columns: (d sigma, b_sigma(u, v) = sigma(v, u) - sigma(u, v)) for normalized sigma."""
    base = group.order - 1
    top = differential_matrix(group, 2)
    bottom = np.zeros((base ** 2, base ** 2), dtype=object)
    for u, v in itertools.product(range(base), repeat=2):
        bottom[u * base + v, v * base + u] += 1
        bottom[u * base + v, u * base + v] -= 1
    return np.concatenate([top, bottom], axis=0)


def _split_em_vector(group: FiniteAbelianGroup, modulus: int, vector) -> AbelianThreeCocycle:
    base = group.order - 1
    n_tau = base ** 3
    values = [int(v) for v in vector]
    tau = Cochain.from_vector(group, 3, modulus, values[:n_tau])
    b = np.zeros((group.order, group.order), dtype=np.int64)
    b[1:, 1:] = np.array(values[n_tau:], dtype=np.int64).reshape(base, base)
    return AbelianThreeCocycle(group, modulus, tau, b)


@dataclass(eq=False)
class AbelianCohomology:
    """H^3_ab(A, mu_modulus) with representatives of its cyclic factors."""

    group: FiniteAbelianGroup
    modulus: int
    invariant_factors: List[int]
    representatives: List[AbelianThreeCocycle]

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    def classes(self) -> List[AbelianThreeCocycle]:
        """One abelian cocycle per class: every combination of the representatives."""
        if not self.invariant_factors:
            m = self.group.order
            return [AbelianThreeCocycle(self.group, self.modulus, Cochain.zero(self.group, 3, self.modulus),
                                        np.zeros((m, m), dtype=np.int64))]
        result = []
        for coeffs in itertools.product(*(range(d) for d in self.invariant_factors)):
            tau = Cochain.zero(self.group, 3, self.modulus)
            b = np.zeros((self.group.order,) * 2, dtype=np.int64)
            for c, rep in zip(coeffs, self.representatives):
                tau = tau + c * rep.tau
                b = b + c * rep.b
            result.append(AbelianThreeCocycle(self.group, self.modulus, tau, b))
        return result


def abelian_cohomology(group: FiniteAbelianGroup, modulus: int) -> AbelianCohomology:
    """Abelian cocycles modulo abelian coboundaries over Z/modulus.

    Raises:
        CapExceeded: If |A| is above the supported order for degree-3 tables.
    """
    if group.order > MAX_EM_GROUP_ORDER:
        raise CapExceeded(f"|A| = {group.order} exceeds {MAX_EM_GROUP_ORDER} for abelian cohomology",
                          witness={"order": group.order, "cap": MAX_EM_GROUP_ORDER})
    constraints = _em_constraint_matrix(group)
    coboundaries = _em_coboundary_matrix(group)
    factors, vectors = homology_mod(coboundaries, constraints, modulus)
    basis = howell_form(coboundaries.T, modulus, width=constraints.shape[1])
    reps = [_split_em_vector(group, modulus, lex_reduce(v, basis, modulus)) for v in vectors]
    return AbelianCohomology(group, modulus, factors, reps)


@dataclass
class EMReport:
    group: FiniteAbelianGroup
    modulus: int
    class_count: int
    form_count: int
    injective: bool
    surjective: bool

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective

    def to_json(self) -> Dict[str, Any]:
        return {
            "group": self.group.to_json(),
            "modulus": self.modulus,
            "class_count": self.class_count,
            "form_count": self.form_count,
            "injective": self.injective,
            "surjective": self.surjective,
            "bijective": self.bijective,
        }


def em_correspondence(group: FiniteAbelianGroup, modulus: Optional[int] = None) -> EMReport:
    """Compare H^3_ab(A, mu_N) with the quadratic forms on A valued in mu_N.

    The default N = 2 exp(A) carries every quadratic form on A.
    """
    modulus = modulus or 2 * group.exponent
    h = abelian_cohomology(group, modulus)
    forms_from_classes = [quadratic_form_of(x) for x in h.classes()]
    forms = [q for q in enumerate_quadratic_forms(group) if modulus % q.modulus == 0]
    image = set(forms_from_classes)
    report = EMReport(
        group=group,
        modulus=modulus,
        class_count=h.order,
        form_count=len(forms),
        injective=len(image) == len(forms_from_classes),
        surjective=image == set(forms),
    )
    logger.info(f"EM correspondence on {group}: {report.class_count} classes, "
                f"{report.form_count} forms, bijective={report.bijective}")
    return report


@dataclass
class TorsorReport:
    """Where the degree-4 obstruction and its trivialization torsor live for a subgroup of O(A, q)."""

    l: int
    coefficient_order: int
    subgroup_order: int
    subgroup_structure: FiniteAbelianGroup
    h4: Optional[CohomologyGroup]
    h3: CohomologyGroup

    def to_json(self) -> Dict[str, Any]:
        return {
            "l": self.l,
            "coefficient": f"mu{self.coefficient_order}",
            "subgroup_order": self.subgroup_order,
            "subgroup_structure": self.subgroup_structure.to_json(),
            "h4_invariant_factors": list(self.h4.invariant_factors) if self.h4 else None,
            "h4_order": self.h4.order if self.h4 else None,
            "h3_invariant_factors": list(self.h3.invariant_factors),
            "torsor_size": self.h3.order,
        }


def torsor_and_coefficient_report(metric: MetricGroup, generators: Sequence[Homomorphism],
                                  cap: int = DEFAULT_MATRIX_ENTRY_CAP) -> TorsorReport:
    """Ambient groups H^4(G, mu_(l^4)) and H^3(G, k^x) for G generated inside O(A, q).

    The degree-4 group is skipped (reported as None) when |G| is above the
    degree-4 limit but still within the degree-3 one. ``cap`` bounds the
    bar-complex matrices; with the default only |G| <= 8 fits in degree 3,
    |G| = 9 needs about 2.1e6 entries and |G| = 12 about 1.95e7.

    Raises:
        NotSquareOrder: If |A| is not a perfect square.
        VerificationFailure: If a generator is not an isometry or two
            generators do not commute.
        CapExceeded: If |G| exceeds the degree-3 limit or a differential
            matrix exceeds ``cap`` entries.
    """
    size = metric.group.order
    l = math.isqrt(size)
    if l * l != size:
        raise NotSquareOrder(f"|A| = {size} is not a perfect square", witness={"order": size})
    for i, g in enumerate(generators):
        if g.source != metric.group or not preserves_form(g, metric.form):
            raise VerificationFailure(f"generator {i} is not in O(A, q)", witness=g.to_json())
    for g, h in itertools.combinations(generators, 2):
        if map_key(compose(g, h)) != map_key(compose(h, g)):
            raise VerificationFailure("subgroup generators do not commute",
                                      witness=[g.to_json(), h.to_json()])
    closure = subgroup_generated_by(generators, metric.group)
    if len(closure) > MAX_DEGREE3_GROUP_ORDER:
        raise CapExceeded(f"|G| = {len(closure)} exceeds {MAX_DEGREE3_GROUP_ORDER}",
                          witness={"order": len(closure)})
    structure = abstract_abelian_structure(
        generators, compose, identity(metric.group), key=map_key,
    ).group
    coefficient_order = l ** 4
    h4 = None
    if len(closure) <= MAX_DEGREE4_GROUP_ORDER:
        h4 = cohomology(structure, 4, Coefficients.mu(coefficient_order), cap=cap)
    else:
        logger.warning(f"|G| = {len(closure)} is above {MAX_DEGREE4_GROUP_ORDER}; skipping H^4")
    h3 = cohomology(structure, 3, Coefficients.scalars(), cap=cap)
    return TorsorReport(l, coefficient_order, len(closure), structure, h4, h3)
