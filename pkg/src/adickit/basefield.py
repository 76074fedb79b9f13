"""Exact models of nonarchimedean base fields: Q with the p-adic valuation.

The completion Q_p is never built.  Scalars are rationals, optionally times a
formal power ``pi^q`` of the uniformizer with rational ``q`` so that radii such
as ``|p|^(1/m)`` can be named.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import PreconditionError
from .valgroup import ValueGroupElement


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("v_p(0) is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(q, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(q)
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def unit_part(q, p: int) -> Fraction:
    q = Fraction(q)
    return q / Fraction(p) ** vp(q, p)


@dataclass(frozen=True)
class BaseField:
    prime: int
    label: str = "Qp-model"
    ambient_rank: int = 1
    residue_algebraic_over_finite: bool = True

    def __post_init__(self):
        if not is_prime(self.prime):
            raise PreconditionError(f"{self.prime} is not prime")
        if self.ambient_rank < 1:
            raise PreconditionError("ambient_rank must be positive")

    @classmethod
    def from_json(cls, block: dict) -> "BaseField":
        return cls(
            prime=int(block["prime"]),
            label=block.get("label", "Qp-model"),
            ambient_rank=int(block.get("ambient_rank", 1)),
            residue_algebraic_over_finite=bool(block.get("residue_algebraic_over_finite", True)),
        )

    def valuation(self, a) -> int:
        return vp(a, self.prime)

    def pi(self) -> "FieldElement":
        return FieldElement(Fraction(self.prime))


@dataclass(frozen=True)
class FieldElement:
    """``value * pi^pi_exp``; ``pi_exp`` is kept in [0, 1) after normalisation."""

    value: Fraction
    pi_exp: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        object.__setattr__(self, "pi_exp", Fraction(self.pi_exp))

    @classmethod
    def pi_power(cls, q, p: int) -> "FieldElement":
        q = Fraction(q)
        whole = q.numerator // q.denominator
        return cls(Fraction(p) ** whole, q - whole)

    def is_zero(self) -> bool:
        return self.value == 0

    def is_rational(self) -> bool:
        return self.pi_exp == 0

    def log_abs(self, p: int) -> Fraction:
        """``-v_p`` including the formal exponent; only for nonzero elements."""
        return -(vp(self.value, p) + self.pi_exp)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.value * other.value, self.pi_exp + other.pi_exp)


Scalar = Union[int, Fraction, FieldElement]


def as_field_element(a: Scalar) -> FieldElement:
    if isinstance(a, FieldElement):
        return a
    return FieldElement(Fraction(a))


def fe_abs(k: BaseField, a: Scalar) -> ValueGroupElement:
    a = as_field_element(a)
    if a.is_zero():
        return ValueGroupElement.zero()
    return ValueGroupElement((a.log_abs(k.prime),)).embed(k.ambient_rank)


def fe_is_topologically_nilpotent(k: BaseField, a: Scalar) -> bool:
    a = as_field_element(a)
    return a.is_zero() or a.log_abs(k.prime) < 0


def fe_is_powerbounded(k: BaseField, a: Scalar) -> bool:
    a = as_field_element(a)
    return a.is_zero() or a.log_abs(k.prime) <= 0


def continuous_valuation_count(k: BaseField) -> int:
    """Number of continuous valuations of k (valuation topology)."""
    if not k.residue_algebraic_over_finite:
        raise PreconditionError(
            "residue field not algebraic over a finite field: continuous valuations "
            "are parametrised by valuations of the residue field"
        )
    return 1
