"""Integer and modular linear algebra.

Matrices are numpy arrays of dtype ``object`` holding Python ints, so entries
never overflow during elimination. The Smith normal form is computed with
elementary row and column operations while tracking the transforms and their
inverses, which is enough to read off kernels, cokernels and homology over Z
and over Z/N.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from agentstr.logger import get_logger

from .exceptions import ShapeMismatch, VerificationFailure

logger = get_logger(__name__)


def int_matrix(rows: Iterable[Sequence[int]], width: Optional[int] = None) -> np.ndarray:
    """Build a 2-D object matrix; ``width`` fixes the shape of an empty input."""
    rows = [list(r) for r in rows]
    if not rows:
        return np.zeros((0, width or 0), dtype=object)
    matrix = np.zeros((len(rows), len(rows[0])), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != matrix.shape[1]:
            raise ShapeMismatch(f"row {i} has length {len(row)}, expected {matrix.shape[1]}")
        for j, value in enumerate(row):
            matrix[i, j] = int(value)
    return matrix


def identity(n: int) -> np.ndarray:
    matrix = np.zeros((n, n), dtype=object)
    for i in range(n):
        matrix[i, i] = 1
    return matrix


def _as_object(matrix) -> np.ndarray:
    array = np.array(matrix, dtype=object)
    if array.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {array.shape}")
    return array.copy()


@dataclass
class SmithForm:
    """U @ A @ V == D with D diagonal, non-negative and a divisibility chain.

    ``U``/``Uinv`` are None when the form was computed with ``left=False``,
    and ``V``/``Vinv`` are None when computed with ``right=False``.
    """

    D: np.ndarray
    U: Optional[np.ndarray]
    Uinv: Optional[np.ndarray]
    V: Optional[np.ndarray]
    Vinv: Optional[np.ndarray]

    @property
    def diagonal(self) -> List[int]:
        return [int(self.D[i, i]) for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


class _Eliminator:
    """Elementary operations on D that keep U @ A @ V == D."""

    def __init__(self, matrix: np.ndarray, left: bool, right: bool):
        self.D = matrix
        m, n = matrix.shape
        self.U = identity(m) if left else None
        self.Uinv = identity(m) if left else None
        self.V = identity(n) if right else None
        self.Vinv = identity(n) if right else None

    def add_row(self, target: int, source: int, factor: int) -> None:
        self.D[target] += factor * self.D[source]
        if self.U is not None:
            self.U[target] += factor * self.U[source]
            self.Uinv[:, source] -= factor * self.Uinv[:, target]

    def swap_rows(self, a: int, b: int) -> None:
        if a == b:
            return
        self.D[[a, b]] = self.D[[b, a]]
        if self.U is not None:
            self.U[[a, b]] = self.U[[b, a]]
            self.Uinv[:, [a, b]] = self.Uinv[:, [b, a]]

    def negate_row(self, a: int) -> None:
        self.D[a] = -self.D[a]
        if self.U is not None:
            self.U[a] = -self.U[a]
            self.Uinv[:, a] = -self.Uinv[:, a]

    def add_col(self, target: int, source: int, factor: int) -> None:
        self.D[:, target] += factor * self.D[:, source]
        if self.V is not None:
            self.V[:, target] += factor * self.V[:, source]
            self.Vinv[source] -= factor * self.Vinv[target]

    def swap_cols(self, a: int, b: int) -> None:
        if a == b:
            return
        self.D[:, [a, b]] = self.D[:, [b, a]]
        if self.V is not None:
            self.V[:, [a, b]] = self.V[:, [b, a]]
            self.Vinv[[a, b]] = self.Vinv[[b, a]]


def _smallest_entry(block: np.ndarray) -> Optional[Tuple[int, int]]:
    nonzero = np.argwhere(block != 0)
    if len(nonzero) == 0:
        return None
    best = min(nonzero, key=lambda ij: abs(block[ij[0], ij[1]]))
    return int(best[0]), int(best[1])


def smith_normal_form(matrix, left: bool = True, right: bool = True) -> SmithForm:
    """Smith normal form of an integer matrix.

    Args:
        matrix: Any 2-D integer array-like.
        left: Track the row transform U and its inverse.
        right: Track the column transform V and its inverse.

    Returns:
        SmithForm with U @ A @ V == D.
    """
    elim = _Eliminator(_as_object(matrix), left, right)
    D = elim.D
    m, n = D.shape
    for t in range(min(m, n)):
        position = _smallest_entry(D[t:, t:])
        if position is None:
            break
        elim.swap_rows(t, position[0] + t)
        elim.swap_cols(t, position[1] + t)
        while True:
            pivot = D[t, t]
            dirty = False
            for r in np.nonzero(D[t + 1:, t] != 0)[0] + t + 1:
                elim.add_row(int(r), t, -(D[r, t] // pivot))
                dirty = dirty or D[r, t] != 0
            for c in np.nonzero(D[t, t + 1:] != 0)[0] + t + 1:
                elim.add_col(int(c), t, -(D[t, c] // pivot))
                dirty = dirty or D[t, c] != 0
            if dirty:
                column = _smallest_entry(D[t:, t:t + 1])
                row = _smallest_entry(D[t:t + 1, t:])
                if abs(D[column[0] + t, t]) <= abs(D[t, row[1] + t]):
                    elim.swap_rows(t, column[0] + t)
                else:
                    elim.swap_cols(t, row[1] + t)
                continue
            offending = np.argwhere(D[t + 1:, t + 1:] % pivot != 0)
            if len(offending):
                elim.add_row(t, int(offending[0][0]) + t + 1, 1)
                continue
            break
        if D[t, t] < 0:
            elim.negate_row(t)
    return SmithForm(D=D, U=elim.U, Uinv=elim.Uinv, V=elim.V, Vinv=elim.Vinv)


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """(g, s, t) with s*a + t*b == g == gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _unit_normalizer(value: int, modulus: int) -> int:
    """A unit u of Z/modulus with u * value == gcd(value, modulus)."""
    g = math.gcd(value, modulus)
    if g == modulus:
        return 1
    reduced_modulus = modulus // g
    u = pow((value // g) % reduced_modulus, -1, reduced_modulus)
    while math.gcd(u, modulus) != 1:
        u += reduced_modulus
    return u


def howell_form(rows: Iterable[Sequence[int]], modulus: int, width: Optional[int] = None
                ) -> List[Tuple[int, np.ndarray]]:
    """Echelon basis of the Z/modulus-span of ``rows`` with the Howell property.

    For each column c, the returned rows whose pivot column is >= c span every
    element of the module that vanishes before column c. Greedy reduction
    against the basis therefore yields lexicographically least coset
    representatives.

    Returns:
        List of (pivot column, row) with the pivot entry dividing ``modulus``.
    """
    pool = []
    for row in rows:
        vector = np.array(list(row), dtype=object) % modulus
        if width is None:
            width = len(vector)
        if vector.any():
            pool.append(vector)
    basis: List[Tuple[int, np.ndarray]] = []
    for col in range(width or 0):
        pivot = None
        rest = []
        for row in pool:
            if row[col] == 0:
                rest.append(row)
            elif pivot is None:
                pivot = row
            else:
                a, b = int(pivot[col]), int(row[col])
                g, s, t = _xgcd(a, b)
                combined = (s * pivot + t * row) % modulus
                eliminated = ((b // g) * pivot - (a // g) * row) % modulus
                pivot = combined
                if eliminated.any():
                    rest.append(eliminated)
        if pivot is not None:
            pivot = (pivot * _unit_normalizer(int(pivot[col]), modulus)) % modulus
            annihilated = (pivot * (modulus // int(pivot[col]))) % modulus
            if annihilated.any():
                rest.append(annihilated)
            basis.append((col, pivot))
        pool = rest
    return basis


def module_size(basis: List[Tuple[int, np.ndarray]], modulus: int) -> int:
    """Number of elements in the span of a Howell basis."""
    size = 1
    for col, row in basis:
        size *= modulus // int(row[col])
    return size


def lex_reduce(vector: Sequence[int], basis: List[Tuple[int, np.ndarray]], modulus: int
               ) -> np.ndarray:
    """Lexicographically least element of ``vector`` + span(basis)."""
    x = np.array(list(vector), dtype=object) % modulus
    for col, row in basis:
        x = (x - (x[col] // row[col]) * row) % modulus
    return x


def kernel_generators_mod(matrix, modulus: int, snf: Optional[SmithForm] = None
                          ) -> List[np.ndarray]:
    """Generators of {x : A x == 0 (mod modulus)}."""
    snf = snf or smith_normal_form(matrix, left=False)
    n = snf.D.shape[1]
    diagonal = snf.diagonal
    generators = []
    for i in range(n):
        d = diagonal[i] if i < len(diagonal) else 0
        g = math.gcd(d, modulus)
        column = (snf.V[:, i] * (modulus // g)) % modulus
        if column.any():
            generators.append(column)
    return generators


def kernel_size_mod(matrix, modulus: int) -> int:
    snf = smith_normal_form(matrix, left=False, right=False)
    n = snf.D.shape[1]
    diagonal = snf.diagonal
    size = 1
    for i in range(n):
        size *= math.gcd(diagonal[i] if i < len(diagonal) else 0, modulus)
    return size


def solve_mod(matrix, rhs: Sequence[int], modulus: int, lexmin: bool = True
              ) -> Optional[np.ndarray]:
    """Solve A x == b over Z/modulus.

    Args:
        matrix: Integer matrix A of shape (m, n).
        rhs: Right-hand side of length m.
        modulus: The modulus N.
        lexmin: Return the lexicographically least solution.

    Returns:
        A solution vector of length n, or None when the system is inconsistent.
    """
    A = _as_object(matrix)
    m, n = A.shape
    b = np.array(list(rhs), dtype=object) % modulus
    if len(b) != m:
        raise ShapeMismatch(f"right-hand side has length {len(b)}, expected {m}")
    if n == 0:
        return np.zeros(0, dtype=object) if not b.any() else None
    snf = smith_normal_form(A)
    c = snf.U.dot(b) % modulus if m else b
    diagonal = snf.diagonal
    y = np.zeros(n, dtype=object)
    for i in range(m):
        d = diagonal[i] if i < len(diagonal) else 0
        if d == 0:
            if c[i] % modulus:
                return None
            continue
        g = math.gcd(d, modulus)
        if c[i] % g:
            return None
        reduced = modulus // g
        if reduced > 1:
            y[i] = ((c[i] // g) * pow((d // g) % reduced, -1, reduced)) % reduced
    x = snf.V.dot(y) % modulus
    if lexmin:
        kernel = kernel_generators_mod(A, modulus, snf)
        x = lex_reduce(x, howell_form(kernel, modulus, width=n), modulus)
    return x


def homology_mod(d_prev, d_next, modulus: int) -> Tuple[List[int], List[np.ndarray]]:
    """ker(d_next) / im(d_prev) over Z/modulus.

    Both matrices act on column vectors, and d_next @ d_prev must vanish over
    the integers.

    Returns:
        (invariant factors > 1, representative vectors), in matching order.
    """
    d_prev = _as_object(d_prev)
    d_next = _as_object(d_next)
    width = d_next.shape[1]
    if d_prev.shape[0] != width:
        raise ShapeMismatch(f"d_prev has {d_prev.shape[0]} rows, d_next has {width} columns")
    snf = smith_normal_form(d_next, left=False)
    diagonal = snf.diagonal
    gcds = [math.gcd(diagonal[i] if i < len(diagonal) else 0, modulus) for i in range(width)]
    keep = [i for i in range(width) if gcds[i] > 1]
    if not keep:
        return [], []
    image = snf.Vinv.dot(d_prev) % modulus if d_prev.shape[1] else d_prev
    relations = np.zeros((len(keep), len(keep) + d_prev.shape[1]), dtype=object)
    for row, i in enumerate(keep):
        relations[row, row] = gcds[i]
        step = modulus // gcds[i]
        for col in range(d_prev.shape[1]):
            entry = image[i, col]
            if entry % step:
                raise VerificationFailure(
                    "boundary does not land in the kernel; d_next @ d_prev != 0",
                    witness={"row": i, "column": col},
                )
            relations[row, len(keep) + col] = (entry // step) % gcds[i]
    quotient = smith_normal_form(relations, right=False)
    factors, vectors = [], []
    for j, d in enumerate(quotient.diagonal):
        if d <= 1:
            continue
        y = np.zeros(width, dtype=object)
        for row, i in enumerate(keep):
            y[i] = (quotient.Uinv[row, j] * (modulus // gcds[i])) % modulus
        factors.append(d)
        vectors.append(snf.V.dot(y) % modulus)
    return factors, vectors


def torsion_cokernel(matrix) -> List[Tuple[int, np.ndarray]]:
    """Torsion of coker(A) for an integer matrix A.

    Returns:
        Pairs (d, v) with d > 1 an invariant factor and v the matching column
        of V, so that A v == d * w for an integral w that is not divisible
        further.
    """
    snf = smith_normal_form(matrix, left=False)
    return [(d, snf.V[:, i].copy()) for i, d in enumerate(snf.diagonal) if d > 1]


def _row_echelon_mod_p(matrix, p: int) -> Tuple[List[List[int]], List[int], int]:
    """Reduced row echelon form mod p, pivot columns and determinant sign factor."""
    rows = [[int(x) % p for x in row] for row in np.array(matrix, dtype=object)]
    width = len(rows[0]) if rows else 0
    pivots: List[int] = []
    det = 1
    r = 0
    for col in range(width):
        found = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if found is None:
            continue
        if found != r:
            rows[r], rows[found] = rows[found], rows[r]
            det = -det
        inv = pow(rows[r][col], -1, p)
        det = det * rows[r][col] % p
        rows[r] = [(x * inv) % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [(x - factor * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots, det % p


def rank_mod_p(matrix, p: int) -> int:
    if np.array(matrix, dtype=object).size == 0:
        return 0
    return len(_row_echelon_mod_p(matrix, p)[1])


def determinant_mod_p(matrix, p: int) -> int:
    array = np.array(matrix, dtype=object)
    n = array.shape[0]
    if n == 0:
        return 1
    if array.shape != (n, n):
        raise ShapeMismatch(f"determinant needs a square matrix, got {array.shape}")
    _, pivots, det = _row_echelon_mod_p(array, p)
    return det if len(pivots) == n else 0


def inverse_mod_p(matrix, p: int) -> Optional[np.ndarray]:
    """Inverse of a square matrix over F_p, or None if singular."""
    array = np.array(matrix, dtype=object)
    n = array.shape[0]
    augmented = np.concatenate([array, identity(n)], axis=1)
    rows, pivots, _ = _row_echelon_mod_p(augmented, p)
    if pivots[:n] != list(range(n)):
        return None
    return int_matrix([row[n:] for row in rows], width=n)
