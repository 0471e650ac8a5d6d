"""Exact roots of unity.

Every value a form, braiding or cocycle on a finite group can take is torsion
in k^x, so scalars are stored as a pair (order N, exponent e) meaning
zeta_N ** e. Arithmetic is exact and no floats appear outside of
``to_complex``.
"""

import cmath
import math
import random
from dataclasses import dataclass
from typing import Any, Dict, Optional

from agentstr.logger import get_logger

from .constants import DEFAULT_ORDER_CAP, SCALAR_PROPERTY_MAX_ORDER, SCALAR_PROPERTY_SAMPLES
from .exceptions import NotDivisible, OrderCapExceeded

logger = get_logger(__name__)

_order_cap = DEFAULT_ORDER_CAP


def set_order_cap(cap: int) -> None:
    """Set the largest root-of-unity order accepted by the constructors."""
    global _order_cap
    if cap < 1:
        raise ValueError(f"order cap must be positive, got {cap}")
    _order_cap = cap


def get_order_cap() -> int:
    return _order_cap


def _check_order(order: int) -> None:
    if order < 1:
        raise ValueError(f"root-of-unity order must be positive, got {order}")
    if order > _order_cap:
        raise OrderCapExceeded(
            f"root-of-unity order {order} exceeds the cap {_order_cap}",
            witness={"order": order, "cap": _order_cap},
        )


@dataclass(frozen=True, order=True)
class RootOfUnity:
    """The value zeta_order ** exp in canonical form.

    Canonical means gcd(exp, order) == 1, or (order, exp) == (1, 0) for the
    value 1. Use ``RootOfUnity.of`` to build a value from any pair.
    """

    order: int
    exp: int

    def __post_init__(self):
        _check_order(self.order)
        if not 0 <= self.exp < self.order:
            raise ValueError(f"exponent {self.exp} not reduced modulo {self.order}")
        if self.order == 1:
            return
        if math.gcd(self.exp, self.order) != 1:
            raise ValueError(
                f"({self.order}, {self.exp}) is not canonical; use RootOfUnity.of"
            )

    @classmethod
    def of(cls, order: int, exp: int) -> "RootOfUnity":
        """Canonical value of zeta_order ** exp for any integer exp."""
        _check_order(order)
        exp %= order
        g = math.gcd(exp, order)
        if exp == 0:
            return cls(1, 0)
        return cls(order // g, exp // g)

    @classmethod
    def one(cls) -> "RootOfUnity":
        return cls(1, 0)

    def is_one(self) -> bool:
        return self.order == 1

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        if not isinstance(other, RootOfUnity):
            return NotImplemented
        common = math.lcm(self.order, other.order)
        _check_order(common)
        return RootOfUnity.of(
            common,
            self.exp * (common // self.order) + other.exp * (common // other.order),
        )

    def __truediv__(self, other: "RootOfUnity") -> "RootOfUnity":
        if not isinstance(other, RootOfUnity):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k: int) -> "RootOfUnity":
        return RootOfUnity.of(self.order, self.exp * k)

    def inverse(self) -> "RootOfUnity":
        return RootOfUnity.of(self.order, -self.exp)

    def embed(self, modulus: int) -> int:
        """Exponent of this value as a power of zeta_modulus.

        Raises:
            NotDivisible: If the order does not divide ``modulus``.
        """
        if modulus < 1 or modulus % self.order:
            raise NotDivisible(
                f"order {self.order} does not divide {modulus}",
                witness={"order": self.order, "modulus": modulus},
            )
        return (self.exp * (modulus // self.order)) % modulus

    def to_complex(self) -> complex:
        """Floating-point value, for test oracles only."""
        return cmath.exp(2j * math.pi * self.exp / self.order)

    def to_json(self) -> Dict[str, int]:
        return {"order": self.order, "exp": self.exp}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RootOfUnity":
        return cls.of(int(data["order"]), int(data["exp"]))

    def __str__(self) -> str:
        if self.order == 1:
            return "1"
        return f"zeta_{self.order}^{self.exp}"


def mul(a: RootOfUnity, b: RootOfUnity) -> RootOfUnity:
    return a * b


def power(a: RootOfUnity, k: int) -> RootOfUnity:
    return a ** k


def embed(a: RootOfUnity, modulus: int) -> int:
    return a.embed(modulus)


def check_scalar_laws(seed: int, samples: int = SCALAR_PROPERTY_SAMPLES,
                      max_order: int = SCALAR_PROPERTY_MAX_ORDER) -> Dict[str, Optional[Dict[str, Any]]]:
    """Check the group laws of mu_infinity on seeded random triples.

    Orders are drawn from the divisors of ``max_order`` so every product
    stays inside mu_max_order.

    Returns:
        Law name mapped to None when it held on every sample, or to the
        first failing triple.
    """
    rng = random.Random(seed)
    orders = [n for n in range(1, max_order + 1) if max_order % n == 0]
    failures: Dict[str, Optional[Dict[str, Any]]] = {
        "associative": None, "commutative": None, "inverse": None, "embedding": None,
    }

    def record(law: str, triple) -> None:
        if failures[law] is None:
            failures[law] = {"triple": [x.to_json() for x in triple]}

    for _ in range(samples):
        a, b, c = (
            RootOfUnity.of(n, rng.randrange(n))
            for n in (rng.choice(orders) for _ in range(3))
        )
        if (a * b) * c != a * (b * c):
            record("associative", (a, b, c))
        if a * b != b * a:
            record("commutative", (a, b, c))
        if not (a * a.inverse()).is_one():
            record("inverse", (a, b, c))
        common = math.lcm(a.order, b.order)
        if (a * b).embed(common) != (a.embed(common) + b.embed(common)) % common:
            record("embedding", (a, b, c))
    logger.info(f"scalar laws checked on {samples} triples with seed {seed}")
    return failures
