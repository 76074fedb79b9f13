"""Totally ordered value groups Gamma u {0} on an additive log scale.

A non-zero value is stored as its exponent vector with respect to fixed
generators ``gamma_1, ..., gamma_n`` in (0, 1).  The value ``|p|`` of the base
uniformizer is ``g^(-1, 0, ...)``; ``g^(0, -1)`` is the infinitesimal radius
``epsilon`` sitting just below 1.  Order is lexicographic on the exponents.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Tuple

from .errors import PreconditionError, RankMismatch

MAX_RANK = 4


class Ordering(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def render_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ValueGroupElement:
    """An element of Gamma u {0}.

    ``logvec is None`` encodes the zero value.  ``precision`` is set only on a
    zero produced by evaluation at finite p-adic precision; it does not take
    part in comparisons.
    """

    logvec: Optional[Tuple[Fraction, ...]]
    precision: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if self.logvec is not None:
            vec = tuple(_frac(c) for c in self.logvec)
            if not 1 <= len(vec) <= MAX_RANK:
                raise PreconditionError(f"rank {len(vec)} outside 1..{MAX_RANK}")
            object.__setattr__(self, "logvec", vec)

    # constructors

    @classmethod
    def zero(cls, precision: Optional[int] = None) -> "ValueGroupElement":
        return cls(None, precision)

    @classmethod
    def identity(cls, rank: int = 1) -> "ValueGroupElement":
        return cls((Fraction(0),) * rank)

    @classmethod
    def of(cls, *coords) -> "ValueGroupElement":
        return cls(tuple(_frac(c) for c in coords))

    # structure

    @property
    def is_zero(self) -> bool:
        return self.logvec is None

    @property
    def is_approximate_zero(self) -> bool:
        return self.logvec is None and self.precision is not None

    @property
    def rank(self) -> Optional[int]:
        return None if self.logvec is None else len(self.logvec)

    def embed(self, rank: int) -> "ValueGroupElement":
        """Pad with trailing zero exponents (``r -> (r, 1)`` multiplicatively)."""
        if self.logvec is None:
            return self
        if rank < len(self.logvec):
            raise RankMismatch(f"cannot embed rank {len(self.logvec)} into rank {rank}")
        return ValueGroupElement(self.logvec + (Fraction(0),) * (rank - len(self.logvec)))

    def inverse(self) -> "ValueGroupElement":
        if self.logvec is None:
            raise ZeroDivisionError("zero has no inverse in the value group")
        return ValueGroupElement(tuple(-c for c in self.logvec))

    def __pow__(self, n: int) -> "ValueGroupElement":
        if self.logvec is None:
            if n <= 0:
                raise ZeroDivisionError("non-positive power of zero")
            return self
        return ValueGroupElement(tuple(c * n for c in self.logvec))

    def __mul__(self, other: "ValueGroupElement") -> "ValueGroupElement":
        return vg_mul(self, other)

    def __truediv__(self, other: "ValueGroupElement") -> "ValueGroupElement":
        return vg_mul(self, other.inverse())

    def __lt__(self, other):
        return vg_cmp(self, other) is Ordering.LT

    def __le__(self, other):
        return vg_cmp(self, other) is not Ordering.GT

    def __gt__(self, other):
        return vg_cmp(self, other) is Ordering.GT

    def __ge__(self, other):
        return vg_cmp(self, other) is not Ordering.LT

    def __str__(self) -> str:
        if self.logvec is None:
            return "0" if self.precision is None else f"0@{self.precision}"
        return "g^(" + ",".join(render_fraction(c) for c in self.logvec) + ")"

    @classmethod
    def parse(cls, text: str) -> "ValueGroupElement":
        text = text.strip()
        if text == "0":
            return cls.zero()
        if not (text.startswith("g^(") and text.endswith(")")):
            raise PreconditionError(f"malformed value {text!r}")
        return cls(tuple(_frac(c) for c in text[3:-1].split(",")))


ZERO = ValueGroupElement.zero()


def _check_ranks(a: ValueGroupElement, b: ValueGroupElement) -> None:
    if a.logvec is not None and b.logvec is not None and len(a.logvec) != len(b.logvec):
        raise RankMismatch(f"rank {len(a.logvec)} vs rank {len(b.logvec)}")


def vg_mul(a: ValueGroupElement, b: ValueGroupElement) -> ValueGroupElement:
    _check_ranks(a, b)
    if a.logvec is None:
        return a
    if b.logvec is None:
        return b
    return ValueGroupElement(tuple(x + y for x, y in zip(a.logvec, b.logvec)))


def vg_cmp(a: ValueGroupElement, b: ValueGroupElement) -> Ordering:
    _check_ranks(a, b)
    if a.logvec is None:
        return Ordering.EQ if b.logvec is None else Ordering.LT
    if b.logvec is None:
        return Ordering.GT
    if a.logvec == b.logvec:
        return Ordering.EQ
    return Ordering.LT if a.logvec < b.logvec else Ordering.GT


def vg_max(values: Iterable[ValueGroupElement]) -> ValueGroupElement:
    best = ZERO
    for v in values:
        if vg_cmp(v, best) is Ordering.GT:
            best = v
    return best


def vg_is_cofinal(a: ValueGroupElement) -> bool:
    """Whether the powers of ``a`` eventually drop below every element.

    For lexicographic Q^n this happens exactly when the leading exponent is
    negative; the test suite checks this against a direct power search.
    """
    if a.logvec is None:
        raise PreconditionError("cofinality is undefined for the zero value")
    return a.logvec[0] < 0


def vg_convex_quotient(a: ValueGroupElement) -> ValueGroupElement:
    """Image in Gamma/Delta, Delta = {leading exponent 0}; the rank-1 value of k°."""
    if a.logvec is None:
        return a
    return ValueGroupElement((a.logvec[0],))


def power_search_cofinal(a: ValueGroupElement, bound: int = 10**6) -> bool:
    """Brute-force oracle: does some a^n with n <= bound drop below |p|?

    Comparing against the single target ``g^(-1, 0, ...)`` suffices because
    every element of lexicographic Q^n dominates some power of |p| and powers
    of a cofinal element pass every power of |p|.  Powers are monotone, so a
    doubling search reaches n = bound in about 20 comparisons.
    """
    if a.logvec is None:
        raise PreconditionError("cofinality is undefined for the zero value")
    target = ValueGroupElement((Fraction(-1),) + (Fraction(0),) * (len(a.logvec) - 1))
    n = 1
    while n <= bound:
        if vg_cmp(a ** n, target) is not Ordering.GT:
            return True
        n *= 2
    return vg_cmp(a ** bound, target) is not Ordering.GT
