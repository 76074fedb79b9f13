"""Rational subsets, coverings and their verification on sample points."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PreconditionError, UndecidableAtPrecision
from .linalg import solve
from .point import DiscPoint, pt_eval
from .series import SeriesElement
from .valgroup import Ordering, ValueGroupElement, vg_cmp


@dataclass(frozen=True)
class OpenIdealWitness:
    """Why (f_1, ..., f_n, g) is open.

    ``unit``: multipliers c with sum c_i f_i + c_g g = 1 (Tate rings).
    ``ideal``: the listed ideal-of-definition generators are adjoined.
    """

    kind: str
    multipliers: Tuple[SeriesElement, ...] = ()
    adjoined: Tuple[SeriesElement, ...] = ()


@dataclass(frozen=True)
class RationalSubset:
    numerators: Tuple[SeriesElement, ...]
    denominator: SeriesElement
    witness: Optional[OpenIdealWitness] = None

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(self.numerators))
        if not self.numerators:
            raise PreconditionError("a rational subset needs at least one numerator")

    @property
    def prime(self) -> int:
        return self.denominator.prime

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.denominator.variables

    @classmethod
    def whole(cls, prime: int, variables: Sequence[str] = ("T",)) -> "RationalSubset":
        one = SeriesElement.constant(prime, 1, variables)
        return cls((one,), one, OpenIdealWitness("unit", (one,)))

    @classmethod
    def of(cls, numerators: Sequence[SeriesElement], denominator: SeriesElement) -> "RationalSubset":
        return cls(tuple(numerators), denominator)

    @classmethod
    def disc(cls, prime: int, r_log, var: str = "T") -> "RationalSubset":
        """D(0, p^r_log) = {|T| <= p^r_log}, written with polynomial data."""
        q = Fraction(r_log)
        a, b = q.numerator, q.denominator
        T = SeriesElement.monomial(prime, (var,), (b,))
        if a >= 0:
            return cls((T * Fraction(prime) ** -a,), SeriesElement.constant(prime, 1, (var,)))
        return cls((T,), SeriesElement.constant(prime, Fraction(prime) ** -a, (var,)))

    @classmethod
    def circle(cls, prime: int, var: str = "T") -> "RationalSubset":
        """S(0,1) = {|T| <= 1} n {1 <= |T|}."""
        T = SeriesElement.variable(prime, var)
        one = SeriesElement.constant(prime, 1, (var,))
        return cls((T,), one).intersect(cls((one,), T))

    def intersect(self, other: "RationalSubset") -> "RationalSubset":
        """R(f/g) n R(f'/g') = R(f f', f g', g f' / g g')."""
        f, g = self.numerators, self.denominator
        h, k = other.numerators, other.denominator
        nums = []
        for a in f:
            for b in h:
                nums.append(a * b)
        nums += [a * k for a in f] + [g * b for b in h]
        return RationalSubset(tuple(_dedupe(nums)), g * k)

    def __str__(self) -> str:
        return "R(" + ", ".join(str(f) for f in self.numerators) + " / " + str(self.denominator) + ")"


def _dedupe(items):
    seen = []
    for x in items:
        if x not in seen:
            seen.append(x)
    return seen


def _le(a: ValueGroupElement, b: ValueGroupElement) -> bool:
    if a.is_approximate_zero and not b.is_zero:
        raise UndecidableAtPrecision("numerator vanishes only at the working precision")
    return vg_cmp(a, b) is not Ordering.GT


def rs_member(x: DiscPoint, U: RationalSubset) -> bool:
    """|f_i(x)| <= |g(x)| != 0 for every numerator f_i."""
    d = pt_eval(x, U.denominator)
    if d.is_approximate_zero:
        raise UndecidableAtPrecision("denominator vanishes at the working precision")
    if d.is_zero:
        return False
    return all(_le(pt_eval(x, f), d) for f in U.numerators)


# ---------------------------------------------------------------------------
# certificates


def _monomials(nvars: int, degree: int) -> List[Tuple[int, ...]]:
    return [e for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) <= degree]


def find_unit_certificate(
    gens: Sequence[SeriesElement], max_degree: int = 4
) -> Optional[Tuple[SeriesElement, ...]]:
    """Polynomial multipliers c_i with sum c_i g_i = 1, by exact linear solve."""
    if not gens:
        return None
    p, variables = gens[0].prime, gens[0].variables
    for g in gens:
        if not g.is_polynomial:
            return None
        if any(e < 0 for exp in g.head for e in exp):
            return None
    for degree in range(0, max_degree + 1):
        monos = _monomials(len(variables), degree)
        unknowns = [(k, m) for k in range(len(gens)) for m in monos]
        targets: Dict[Tuple[int, ...], int] = {}
        columns = []
        for k, m in unknowns:
            col = {}
            for exp, c in gens[k].items():
                e = tuple(a + b for a, b in zip(exp, m))
                col[e] = c
                targets.setdefault(e, len(targets))
            columns.append(col)
        zero = (0,) * len(variables)
        targets.setdefault(zero, len(targets))
        A = [[Fraction(0)] * len(unknowns) for _ in targets]
        for j, col in enumerate(columns):
            for e, c in col.items():
                A[targets[e]][j] = c
        b = [Fraction(int(e == zero)) for e in targets]
        x = solve(A, b)
        if x is None:
            continue
        mults = []
        for k in range(len(gens)):
            head = {m: x[j] for j, (kk, m) in enumerate(unknowns) if kk == k and x[j] != 0}
            mults.append(SeriesElement(p, variables, head))
        return tuple(mults)
    return None


def verify_unit_certificate(gens: Sequence[SeriesElement], mults: Sequence[SeriesElement]) -> bool:
    if len(gens) != len(mults):
        return False
    total = SeriesElement.zero(gens[0].prime, gens[0].variables)
    for g, c in zip(gens, mults):
        total = total + g * c
    return total == SeriesElement.constant(gens[0].prime, 1, gens[0].variables)


# ---------------------------------------------------------------------------
# coverings

COVERING_KINDS = ("standard_rational", "standard_laurent", "simple_laurent")


@dataclass(frozen=True)
class Piece:
    label: str
    subset: RationalSubset
    pattern: Tuple[bool, ...] = ()


@dataclass(frozen=True)
class CoveringSpec:
    kind: str
    generators: Tuple[SeriesElement, ...]
    certificate: Optional[Tuple[SeriesElement, ...]] = None

    def __post_init__(self):
        if self.kind not in COVERING_KINDS:
            raise PreconditionError(f"unknown covering kind {self.kind!r}")
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise PreconditionError("a covering needs at least one generator")
        if self.kind == "simple_laurent" and len(self.generators) != 1:
            raise PreconditionError("a simple Laurent covering has exactly one generator")

    @classmethod
    def standard_rational(cls, generators, certificate="auto") -> "CoveringSpec":
        if certificate == "auto":
            certificate = find_unit_certificate(generators)
        return cls("standard_rational", tuple(generators), certificate)


def _laurent_piece(gens: Sequence[SeriesElement], pattern: Sequence[bool]) -> RationalSubset:
    """U_I: |t_i| <= 1 where pattern[i] else |t_i| >= 1."""
    subset = None
    for t, inside in zip(gens, pattern):
        one = SeriesElement.constant(t.prime, 1, t.variables)
        half = RationalSubset((t,), one) if inside else RationalSubset((one,), t)
        subset = half if subset is None else subset.intersect(half)
    return subset


def _pattern_label(pattern: Sequence[bool]) -> str:
    inside = [str(i + 1) for i, b in enumerate(pattern) if b]
    return "U_{" + ",".join(inside) + "}"


def cov_pieces(c: CoveringSpec) -> List[Piece]:
    if c.kind == "standard_rational":
        if c.certificate is None:
            raise PreconditionError("standard rational covering without a unit-ideal certificate")
        if not verify_unit_certificate(c.generators, c.certificate):
            raise PreconditionError("unit-ideal certificate does not sum to 1")
        witness = OpenIdealWitness("unit", tuple(c.certificate))
        return [
            Piece(f"U_{i + 1}", RationalSubset(c.generators, t, witness))
            for i, t in enumerate(c.generators)
        ]
    if c.kind == "simple_laurent":
        (t,) = c.generators
        return [
            Piece("W-", _laurent_piece((t,), (True,)), (True,)),
            Piece("W+", _laurent_piece((t,), (False,)), (False,)),
        ]
    n = len(c.generators)
    pieces = []
    for pattern in itertools.product((True, False), repeat=n):
        pieces.append(Piece(_pattern_label(pattern), _laurent_piece(c.generators, pattern), pattern))
    return pieces


@dataclass
class CoverageRow:
    point: DiscPoint
    argument_piece: Optional[str]
    containing: Tuple[str, ...]


@dataclass
class CoverageReport:
    mode: str
    rows: List[CoverageRow] = field(default_factory=list)

    @property
    def uncovered(self) -> List[DiscPoint]:
        return [r.point for r in self.rows if not r.containing]

    @property
    def covered(self) -> bool:
        return not self.uncovered


def cov_verify_on_samples(c, pts: Sequence[DiscPoint]) -> CoverageReport:
    """Find a piece containing each sample point.

    ``c`` is a :class:`CoveringSpec` or an explicit list of pieces (for unions
    that are not a structured covering).  Uncovered points are report content.
    """
    if isinstance(c, CoveringSpec):
        pieces = cov_pieces(c)
        mode = "max-index" if c.kind == "standard_rational" else "sign-pattern"
    else:
        pieces = [p if isinstance(p, Piece) else Piece(f"P_{i + 1}", p) for i, p in enumerate(c)]
        mode = "membership"
    report = CoverageReport(mode)
    for x in pts:
        containing = tuple(pc.label for pc in pieces if rs_member(x, pc.subset))
        argument = None
        if isinstance(c, CoveringSpec) and c.kind == "standard_rational":
            vals = [pt_eval(x, t) for t in c.generators]
            best = 0
            for i, v in enumerate(vals):
                if vg_cmp(v, vals[best]) is Ordering.GT:
                    best = i
            if not vals[best].is_zero:
                argument = pieces[best].label
        elif isinstance(c, CoveringSpec):
            one = ValueGroupElement.identity(x.rank)
            pattern = tuple(
                vg_cmp(pt_eval(x, t), one) is not Ordering.GT for t in c.generators
            )
            argument = next(pc.label for pc in pieces if pc.pattern == pattern)
        if argument is not None and argument not in containing:
            raise AssertionError(f"covering argument placed {x} in {argument} but membership fails")
        report.rows.append(CoverageRow(x, argument, containing))
    return report


# ---------------------------------------------------------------------------
# reduction to simple Laurent coverings


@dataclass
class ReductionNode:
    generators: Tuple[SeriesElement, ...]
    fixed: Tuple[Tuple[int, bool], ...]
    split_index: Optional[int] = None
    minus: Optional["ReductionNode"] = None
    plus: Optional["ReductionNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split_index is None

    def leaves(self) -> List["ReductionNode"]:
        if self.is_leaf:
            return [self]
        return self.minus.leaves() + self.plus.leaves()

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.minus.depth(), self.plus.depth())

    def pattern(self, n: int) -> Tuple[bool, ...]:
        d = dict(self.fixed)
        return tuple(d[i] for i in range(n))

    def subset(self, all_generators: Sequence[SeriesElement]) -> RationalSubset:
        idx = sorted(i for i, _ in self.fixed)
        d = dict(self.fixed)
        return _laurent_piece([all_generators[i] for i in idx], [d[i] for i in idx])


def cov_reduce_to_simple(c: CoveringSpec) -> ReductionNode:
    """Split on t_n, then restrict to the Laurent covering of t_1..t_{n-1}."""
    if c.kind not in ("standard_laurent", "simple_laurent"):
        raise PreconditionError("reduction needs a standard Laurent covering")
    gens = c.generators
    if not gens:
        raise PreconditionError("reduction of an empty Laurent covering")

    def build(remaining: Tuple[SeriesElement, ...], fixed) -> ReductionNode:
        node = ReductionNode(remaining, tuple(fixed))
        if not remaining:
            return node
        j = len(remaining) - 1
        node.split_index = j
        node.minus = build(remaining[:-1], ((j, True),) + tuple(fixed))
        node.plus = build(remaining[:-1], ((j, False),) + tuple(fixed))
        return node

    return build(gens, ())


def analytic_locus(ideal_generators: Sequence[SeriesElement]) -> List[RationalSubset]:
    """X_a = union of R(s_1..s_n / s_i)."""
    gens = tuple(ideal_generators)
    if not gens:
        raise PreconditionError("analytic locus needs ideal-of-definition generators")
    witness = OpenIdealWitness("ideal", adjoined=gens)
    return [RationalSubset(gens, s, witness) for s in gens]


def ideal_power_generators(gens: Sequence[SeriesElement], r: int) -> List[SeriesElement]:
    """Generators of I^r as all degree-r products."""
    out = []
    for combo in itertools.combinations_with_replacement(range(len(gens)), r):
        prod = SeriesElement.constant(gens[0].prime, 1, gens[0].variables)
        for i in combo:
            prod = prod * gens[i]
        out.append(prod)
    return _dedupe(out)


def generalized_rational_piece(
    U: RationalSubset, ideal_gens: Sequence[SeriesElement], r: int
) -> RationalSubset:
    """R(f u E_r / g) where E_r generates I^r; always an honest rational subset."""
    E = ideal_power_generators(ideal_gens, r)
    return RationalSubset(
        tuple(U.numerators) + tuple(E), U.denominator, OpenIdealWitness("ideal", adjoined=tuple(E))
    )
