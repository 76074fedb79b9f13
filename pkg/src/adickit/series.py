"""Elements of Tate-type algebras over the p-adic rational model.

A :class:`SeriesElement` is a finite *head* of exact rational coefficients
indexed by exponent tuples, plus an optional closed-form *tail* describing
the coefficients of a one-variable series beyond the head degree.  The tail
catalog is deliberately small:

* ``zero``            -- a_i = 0
* ``geometric``       -- a_i = c * p^(a*i + b)
* ``supergeometric``  -- a_i = c * p^(a*i^2)

Every convergence question asked about these series reduces to a sign test
on the exponent of p, so membership in k<T>, k{{T}}, open-disc sections and
weighted algebras R<T>_M is decided in closed form.

Precision is a pair ``(N, D)``: coefficients are known modulo p^N and the
head covers total degree <= D.  ``None`` stands for infinity.  A head with
``D = None`` and no tail is an exact (Laurent) polynomial.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .basefield import FieldElement, as_field_element, vp
from .errors import CatalogError, ParseError, PreconditionError, UndecidableAtPrecision
from .valgroup import Ordering, ValueGroupElement, render_fraction, vg_cmp, vg_max

Exp = Tuple[int, ...]

TAIL_KINDS = ("zero", "geometric", "supergeometric")


def _min_opt(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class Tail:
    """Closed-form coefficient rule for indices beyond the head."""

    kind: str
    c: Fraction = Fraction(1)
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise CatalogError(f"unknown tail kind {self.kind!r}; expected one of {TAIL_KINDS}")
        for name in ("c", "a", "b"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.kind == "supergeometric" and self.b != 0:
            raise CatalogError("supergeometric tails have no linear term")
        if self.kind != "zero" and self.c == 0:
            object.__setattr__(self, "kind", "zero")

    def exponent(self, i: int) -> Fraction:
        if self.kind == "geometric":
            return self.a * i + self.b
        if self.kind == "supergeometric":
            return self.a * i * i
        raise ValueError("zero tail has no exponent")

    def log_abs(self, i: int, p: int) -> Optional[Fraction]:
        """log_p |a_i| (i.e. -v_p(a_i)); None for vanishing coefficients."""
        if self.kind == "zero":
            return None
        return -(vp(self.c, p) + self.exponent(i))

    def coeff(self, i: int, p: int) -> Fraction:
        if self.kind == "zero":
            return Fraction(0)
        e = self.exponent(i)
        if e.denominator != 1:
            raise CatalogError(f"tail coefficient p^{e} at index {i} is not rational")
        return self.c * Fraction(p) ** int(e)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind != "zero":
            out["c"] = render_fraction(self.c)
            out["a"] = render_fraction(self.a)
            if self.kind == "geometric":
                out["b"] = render_fraction(self.b)
        return out


class SeriesElement:
    """Immutable element of a (Laurent) polynomial / power-series ring over Q."""

    __slots__ = ("prime", "variables", "_head", "tail", "N", "D", "_key")

    def __init__(
        self,
        prime: int,
        variables: Sequence[str],
        head: Mapping[Exp, object] | None = None,
        tail: Optional[Tail] = None,
        N: Optional[int] = None,
        D: Optional[int] = None,
    ):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise PreconditionError(f"repeated variable in {variables}")
        clean: Dict[Exp, Fraction] = {}
        for exp, c in (head or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != len(variables):
                raise PreconditionError(f"exponent {exp} does not match variables {variables}")
            c = Fraction(c.value) if isinstance(c, FieldElement) else Fraction(c)
            if c != 0:
                if D is not None and sum(exp) > D:
                    raise PreconditionError(f"head exponent {exp} exceeds degree cutoff {D}")
                clean[exp] = c
        if tail is not None:
            if len(variables) != 1:
                raise CatalogError("tails are supported for one-variable series only")
            if D is None:
                raise PreconditionError("a tail needs a finite head degree")
            if any(e[0] < 0 for e in clean):
                raise CatalogError("tails cannot be combined with negative exponents")
            if tail.kind == "zero":
                tail, D = None, None
        object.__setattr__(self, "prime", int(prime))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "_head", clean)
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("SeriesElement is immutable")

    # --- construction helpers -------------------------------------------

    @classmethod
    def constant(cls, prime: int, c, variables: Sequence[str] = ()) -> "SeriesElement":
        return cls(prime, variables, {(0,) * len(variables): c})

    @classmethod
    def zero(cls, prime: int, variables: Sequence[str] = ()) -> "SeriesElement":
        return cls(prime, variables, {})

    @classmethod
    def variable(cls, prime: int, name: str, variables: Sequence[str] | None = None) -> "SeriesElement":
        variables = tuple(variables) if variables is not None else (name,)
        exp = tuple(1 if v == name else 0 for v in variables)
        if name not in variables:
            raise PreconditionError(f"{name} not among {variables}")
        return cls(prime, variables, {exp: 1})

    @classmethod
    def monomial(cls, prime: int, variables: Sequence[str], exp: Exp, c=1) -> "SeriesElement":
        return cls(prime, variables, {tuple(exp): c})

    @classmethod
    def from_tail(
        cls,
        prime: int,
        variable: str,
        tail: Tail,
        head: Mapping[int, object] | None = None,
        head_degree: int = -1,
    ) -> "SeriesElement":
        """Series whose coefficients past ``head_degree`` follow ``tail``."""
        h = {(i,): c for i, c in (head or {}).items()}
        return cls(prime, (variable,), h, tail=tail, D=head_degree)

    # --- inspection ------------------------------------------------------

    @property
    def head(self) -> Dict[Exp, Fraction]:
        return dict(self._head)

    def items(self) -> Iterator[Tuple[Exp, Fraction]]:
        return iter(sorted(self._head.items()))

    @property
    def is_polynomial(self) -> bool:
        return self.tail is None and self.D is None

    @property
    def is_truncated(self) -> bool:
        return self.tail is None and self.D is not None

    @property
    def precision(self) -> Tuple[Optional[int], Optional[int]]:
        return (self.N, self.D)

    def is_zero(self) -> bool:
        return not self._head and self.tail is None

    def coefficient(self, exp: Exp | int) -> Fraction:
        if isinstance(exp, int):
            exp = (exp,)
        if self.tail is not None and exp[0] > self.D:
            return self.tail.coeff(exp[0], self.prime)
        return self._head.get(tuple(exp), Fraction(0))

    def coefficient_log_abs(self, i: int) -> Optional[Fraction]:
        """log_p of |a_i| for a one-variable series; None when a_i = 0."""
        if self.tail is not None and i > self.D:
            return self.tail.log_abs(i, self.prime)
        c = self._head.get((i,), Fraction(0))
        return None if c == 0 else Fraction(-vp(c, self.prime))

    def degree(self) -> int:
        if not self.is_polynomial:
            raise PreconditionError("degree of a non-polynomial series")
        return max((sum(e) for e in self._head), default=-1)

    def min_exponents(self) -> Exp:
        if not self._head:
            return (0,) * len(self.variables)
        return tuple(min(e[k] for e in self._head) for k in range(len(self.variables)))

    def constant_term(self) -> Fraction:
        return self._head.get((0,) * len(self.variables), Fraction(0))

    def is_constant(self) -> bool:
        return self.is_polynomial and all(all(x == 0 for x in e) for e in self._head)

    def support_variables(self) -> Tuple[str, ...]:
        used = set()
        for e in self._head:
            used.update(v for v, k in zip(self.variables, e) if k)
        if self.tail is not None:
            used.add(self.variables[0])
        return tuple(v for v in self.variables if v in used)

    def is_integral(self) -> bool:
        """All coefficients (head and tail) lie in Z_p."""
        if any(vp(c, self.prime) < 0 for c in self._head.values()):
            return False
        if self.tail is None or self.tail.kind == "zero":
            return True
        return _tail_sup_log(self.tail, self.D + 1, Fraction(0), self.prime) <= 0

    # --- equality --------------------------------------------------------

    def _canonical(self):
        if self._key is None:
            object.__setattr__(
                self,
                "_key",
                (self.prime, self.variables, tuple(sorted(self._head.items())), self.tail, self.N, self.D),
            )
        return self._key

    def __eq__(self, other):
        if not isinstance(other, SeriesElement):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self):
        return hash(self._canonical())

    def equal_at(self, other: "SeriesElement", N: Optional[int], D: Optional[int]) -> bool:
        """Coefficientwise equality modulo p^N in total degree <= D."""
        a, b = _align(self, other)
        diff = a - b
        if diff.tail is not None:
            if D is None:
                return False
        for exp, c in diff._head.items():
            if D is not None and sum(exp) > D:
                continue
            if N is None or vp(c, self.prime) < N:
                return False
        if diff.tail is not None and D is not None:
            for i in range(diff.D + 1, D + 1):
                c = diff.tail.coeff(i, self.prime)
                if c != 0 and (N is None or vp(c, self.prime) < N):
                    return False
        return True

    # --- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> "SeriesElement":
        if isinstance(other, SeriesElement):
            if other.prime != self.prime:
                raise PreconditionError(f"prime mismatch {self.prime} vs {other.prime}")
            if other.variables != self.variables:
                raise PreconditionError(
                    f"variable mismatch {self.variables} vs {other.variables}"
                )
            return other
        if isinstance(other, (int, Fraction, FieldElement)):
            return SeriesElement.constant(self.prime, as_field_element(other).value, self.variables)
        return NotImplemented

    def __neg__(self) -> "SeriesElement":
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = Tail(t.kind, -t.c, t.a, t.b)
        return SeriesElement(
            self.prime, self.variables, {e: -c for e, c in self._head.items()}, tail, self.N, self.D
        )

    def __add__(self, other) -> "SeriesElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return se_add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "SeriesElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return se_add(self, -other)

    def __rsub__(self, other) -> "SeriesElement":
        return (-self) + other

    def __mul__(self, other) -> "SeriesElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return se_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SeriesElement":
        if n < 0:
            if len(self._head) == 1 and self.is_polynomial:
                (exp, c), = self._head.items()
                return SeriesElement(
                    self.prime, self.variables, {tuple(-x * -n for x in exp): c ** n}
                )
            raise PreconditionError("negative powers only for monomials")
        result = SeriesElement.constant(self.prime, 1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # --- variable management --------------------------------------------

    def with_variables(self, variables: Sequence[str]) -> "SeriesElement":
        """Re-express in a larger ordered variable list (superset of used ones)."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.support_variables() if v not in variables]
        if missing:
            raise PreconditionError(f"variables {missing} not in target {variables}")
        idx = [self.variables.index(v) if v in self.variables else None for v in variables]
        head = {}
        for exp, c in self._head.items():
            head[tuple(exp[i] if i is not None else 0 for i in idx)] = c
        if self.tail is not None:
            if len(variables) != 1:
                raise CatalogError("cannot embed a tailed series into several variables")
            return SeriesElement(self.prime, variables, head, self.tail, self.N, self.D)
        return SeriesElement(self.prime, variables, head, None, self.N, self.D)

    def rename(self, mapping: Mapping[str, str]) -> "SeriesElement":
        new_vars = tuple(mapping.get(v, v) for v in self.variables)
        return SeriesElement(self.prime, new_vars, self._head, self.tail, self.N, self.D)

    def substitute(self, var: str, value: "SeriesElement") -> "SeriesElement":
        """Replace ``var`` by the polynomial ``value`` (same variable list)."""
        if not self.is_polynomial or not value.is_polynomial:
            raise CatalogError("substitution is defined for polynomials only")
        value = value.with_variables(self.variables)
        k = self.variables.index(var)
        out = SeriesElement.zero(self.prime, self.variables)
        powers: Dict[int, SeriesElement] = {}
        for exp, c in self._head.items():
            e = exp[k]
            if e not in powers:
                powers[e] = value ** e
            rest = tuple(0 if j == k else x for j, x in enumerate(exp))
            out = out + SeriesElement(self.prime, self.variables, {rest: c}) * powers[e]
        return out

    def drop_variable(self, var: str) -> "SeriesElement":
        if var in self.support_variables():
            raise PreconditionError(f"{var} still occurs in {self}")
        return self.with_variables(tuple(v for v in self.variables if v != var))

    def scale_variable(self, var: str, factor) -> "SeriesElement":
        """f(..., factor*var, ...)."""
        factor = Fraction(factor)
        k = self.variables.index(var)
        head = {e: c * factor ** e[k] for e, c in self._head.items()}
        if self.tail is not None:
            raise CatalogError("scaling a tailed series")
        return SeriesElement(self.prime, self.variables, head, None, self.N, self.D)

    def reduce_mod(self, N: int) -> "SeriesElement":
        """Drop head coefficients divisible by p^N (integral coefficients reduced)."""
        head = {}
        q = self.prime ** N
        for exp, c in self._head.items():
            if vp(c, self.prime) >= N:
                continue
            if c.denominator % self.prime != 0:
                num = (c.numerator * pow(c.denominator, -1, q)) % q
                if num > q // 2:
                    num -= q
                c = Fraction(num)
            head[exp] = c
        return SeriesElement(self.prime, self.variables, head, self.tail, N, self.D)

    def truncate(self, D: int) -> "SeriesElement":
        head = {e: c for e, c in self._head.items() if sum(e) <= D}
        if self.tail is not None:
            for i in range(self.D + 1, D + 1):
                c = self.tail.coeff(i, self.prime)
                if c:
                    head[(i,)] = c
        return SeriesElement(self.prime, self.variables, head, None, self.N, D)

    def taylor_shift(self, alpha) -> "SeriesElement":
        """Coefficients of f(T + alpha), i.e. the expansion of f in powers of (T - alpha)."""
        alpha = as_field_element(alpha)
        if not alpha.is_rational():
            raise CatalogError("Taylor shift by a formal pi-power")
        alpha = alpha.value
        if len(self.variables) != 1:
            raise CatalogError("Taylor shift needs a one-variable series")
        if alpha == 0:
            return self
        if not self.is_polynomial and not self.is_truncated:
            raise CatalogError("Taylor shift of an infinite tail is not supported")
        if any(e[0] < 0 for e in self._head):
            raise CatalogError("Taylor shift of a Laurent polynomial")
        out: Dict[Exp, Fraction] = {}
        for (i,), a in self._head.items():
            for j in range(i + 1):
                out[(j,)] = out.get((j,), Fraction(0)) + a * math.comb(i, j) * alpha ** (i - j)
        return SeriesElement(self.prime, self.variables, out, None, self.N, self.D)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        """Exact value of a (Laurent) polynomial at rational arguments."""
        if not self.is_polynomial:
            raise CatalogError("exact evaluation of an infinite series")
        vals = [Fraction(values[v]) if v in values else None for v in self.variables]
        total = Fraction(0)
        for exp, c in self._head.items():
            term = c
            for x, e in zip(vals, exp):
                if e == 0:
                    continue
                if x is None:
                    raise PreconditionError("missing value for a variable")
                term *= x ** e
            total += term
        return total

    # --- rendering -------------------------------------------------------

    def __repr__(self) -> str:
        return f"SeriesElement({self})"

    def __str__(self) -> str:
        return render_series(self)


# ---------------------------------------------------------------------------
# ring operations


def _align(f: SeriesElement, g: SeriesElement) -> Tuple[SeriesElement, SeriesElement]:
    if f.prime != g.prime:
        raise PreconditionError(f"prime mismatch {f.prime} vs {g.prime}")
    if f.variables == g.variables:
        return f, g
    if not f.variables:
        return f.with_variables(g.variables), g
    if not g.variables:
        return f, g.with_variables(f.variables)
    raise PreconditionError(f"variable mismatch {f.variables} vs {g.variables}")


def _effective_degree(f: SeriesElement) -> Optional[int]:
    """Degree up to which coefficients are known (None = all of them)."""
    return None if f.tail is not None or f.D is None else f.D


def _combine_tails(s: Tail, t: Tail, p: int) -> Optional[Tail]:
    if s.kind == "zero":
        return t
    if t.kind == "zero":
        return s
    if s.kind != t.kind or s.a != t.a:
        return None
    if s.kind == "supergeometric":
        return Tail("supergeometric", s.c + t.c, s.a)
    db = t.b - s.b
    if db.denominator != 1:
        return None
    return Tail("geometric", s.c + t.c * Fraction(p) ** int(db), s.a, s.b)


def se_add(f: SeriesElement, g: SeriesElement) -> SeriesElement:
    f, g = _align(f, g)
    p = f.prime
    N = _min_opt(f.N, g.N)
    if f.tail is None and g.tail is None:
        D = _min_opt(f.D, g.D)
        head = dict(f._head)
        for e, c in g._head.items():
            head[e] = head.get(e, Fraction(0)) + c
        if D is not None:
            head = {e: c for e, c in head.items() if sum(e) <= D}
        return SeriesElement(p, f.variables, head, None, N, D)
    # at least one tail: one variable from here on
    trunc = [x.D for x in (f, g) if x.is_truncated]
    if trunc:
        D = min(trunc)
        return se_add(f.truncate(D), g.truncate(D))
    tails = [x.tail for x in (f, g) if x.tail is not None]
    start = max((x.D if x.tail is not None else x.degree()) for x in (f, g))
    if len(tails) == 2:
        combined = _combine_tails(f.tail.__class__(f.tail.kind, f.tail.c, f.tail.a, f.tail.b), g.tail, p)
    else:
        combined = tails[0]
    if combined is None:
        # out of catalog: keep the exact head range only
        return se_add(f.truncate(start), g.truncate(start))
    head = {}
    for i in range(min(f.min_exponents()[0], g.min_exponents()[0], 0), start + 1):
        c = f.coefficient(i) + g.coefficient(i)
        if c:
            head[(i,)] = c
    return SeriesElement(p, f.variables, head, combined, N, start)


def se_mul(f: SeriesElement, g: SeriesElement) -> SeriesElement:
    f, g = _align(f, g)
    p = f.prime
    N = _min_opt(f.N, g.N)
    if f.is_polynomial and g.is_polynomial:
        head: Dict[Exp, Fraction] = {}
        for e1, c1 in f._head.items():
            for e2, c2 in g._head.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                head[e] = head.get(e, Fraction(0)) + c1 * c2
        return SeriesElement(p, f.variables, head, None, N, None)
    if len(f.variables) != 1:
        D = _min_opt(_effective_degree(f), _effective_degree(g))
        return _mul_truncated(f, g, D, N)
    if any(e[0] < 0 for x in (f, g) for e in x._head):
        raise CatalogError("product of a tailed series with a Laurent polynomial")
    trunc = [x.D for x in (f, g) if x.is_truncated]
    if trunc:
        return _mul_truncated(f, g, min(trunc), N)
    if f.tail is not None and g.tail is not None:
        return _mul_truncated(f, g, max(f.D, g.D), N)
    series, poly = (f, g) if f.tail is not None else (g, f)
    t = series.tail
    if t.kind == "geometric" and t.a.denominator == 1 and t.b.denominator == 1:
        # sum_j q_j c p^(a(n-j)+b) = c * q(p^-a) * p^(an+b) once n - deg q > D
        q_at = sum(
            (c * Fraction(p) ** (-int(t.a) * e[0]) for e, c in poly._head.items()), Fraction(0)
        )
        start = series.D + max(poly.degree(), 0)
        new_tail = Tail("geometric", t.c * q_at, t.a, t.b)
        head = {}
        for n in range(0, start + 1):
            c = sum(
                (cq * series.coefficient(n - e[0]) for e, cq in poly._head.items() if n - e[0] >= 0),
                Fraction(0),
            )
            if c:
                head[(n,)] = c
        return SeriesElement(p, f.variables, head, new_tail, N, start)
    return _mul_truncated(f, g, series.D + max(poly.degree(), 0), N)


def _mul_truncated(f: SeriesElement, g: SeriesElement, D: Optional[int], N) -> SeriesElement:
    if D is None:
        raise CatalogError("product is not representable")
    ff = f.truncate(D) if not f.is_polynomial else f
    gg = g.truncate(D) if not g.is_polynomial else g
    head: Dict[Exp, Fraction] = {}
    for e1, c1 in ff._head.items():
        for e2, c2 in gg._head.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            if sum(e) <= D:
                head[e] = head.get(e, Fraction(0)) + c1 * c2
    return SeriesElement(f.prime, f.variables, head, None, N, D)


# ---------------------------------------------------------------------------
# evaluation


def _value(log_coeff: Fraction, i: int, log_r: Tuple[Fraction, ...]) -> ValueGroupElement:
    vec = [Fraction(0)] * len(log_r)
    vec[0] = log_coeff
    return ValueGroupElement(tuple(x + i * y for x, y in zip(vec, log_r)))


def _tail_sup_log(t: Tail, start: int, w: Fraction, p: int) -> Fraction:
    """sup_{i >= start} (log|a_i| + w*i) for a rank-1 weight ``w``; +inf raises."""
    best = None
    for val in _tail_values_rank1(t, start, w, p):
        best = val if best is None else max(best, val)
    return best


def _tail_values_rank1(t: Tail, start: int, w: Fraction, p: int):
    # values that can realise the supremum of log|a_i| + w i over i >= start
    base = -vp(t.c, p)
    if t.kind == "geometric":
        slope = w - t.a
        if slope > 0:
            raise UndecidableAtPrecision("tail grows without bound")
        yield base - t.b + slope * start
        return
    if t.a < 0 or (t.a == 0 and w > 0):
        raise UndecidableAtPrecision("tail grows without bound")
    if t.a == 0:
        yield base + w * start
        return
    peak = w / (2 * t.a)
    hi = max(start, math.floor(peak) + 1)
    for i in range(start, hi + 1):
        yield base - t.a * i * i + w * i


def _tail_sup_value(t: Tail, start: int, log_r: Tuple[Fraction, ...], p: int) -> Optional[ValueGroupElement]:
    """max_{i >= start} |a_i| r^i for a tail, in the rank of ``r``."""
    if t.kind == "zero":
        return None
    base = -vp(t.c, p)
    if t.kind == "geometric" or (t.kind == "supergeometric" and t.a == 0):
        a = t.a if t.kind == "geometric" else Fraction(0)
        b = t.b if t.kind == "geometric" else Fraction(0)
        step = list(log_r)
        step[0] -= a
        step_val = ValueGroupElement(tuple(step))
        if vg_cmp(step_val, ValueGroupElement.identity(len(log_r))) is not Ordering.LT:
            raise UndecidableAtPrecision(
                "tail is not dominated: |a_i| r^i does not decrease"
            )
        return _value(base - a * start - b, start, log_r)
    if t.a < 0:
        raise UndecidableAtPrecision("tail is not dominated: coefficients grow")
    peak = log_r[0] / (2 * t.a)
    hi = max(start, math.floor(peak) + 2)
    return vg_max(_value(base - t.a * i * i, i, log_r) for i in range(start, hi + 1))


def se_gauss_eval(f: SeriesElement, alpha, r: ValueGroupElement) -> ValueGroupElement:
    """|f(x_{alpha,r})| = max_i |b_i| r^i where f = sum b_i (T - alpha)^i.

    The radius may have any rank; coefficient values are embedded on the first
    axis.  Coefficients below p^N are unknown and can only bound the result.
    """
    if r.is_zero:
        raise PreconditionError("Gauss evaluation needs a nonzero radius")
    if len(f.variables) > 1:
        raise CatalogError("Gauss evaluation is defined for one-variable series")
    p = f.prime
    log_r = r.logvec
    rank = len(log_r)
    if f.variables:
        g = f.taylor_shift(alpha)
    else:
        g = f
    known = []
    bounds = []
    for exp, c in g._head.items():
        i = exp[0] if exp else 0
        v = vp(c, p)
        if g.N is not None and v >= g.N:
            bounds.append(_value(Fraction(-g.N), i, log_r))
        else:
            known.append(_value(Fraction(-v), i, log_r))
    if g.tail is not None:
        t = _tail_sup_value(g.tail, g.D + 1, log_r, p)
        if t is not None:
            known.append(t)
    elif g.D is not None and g.N is not None:
        # coefficients beyond the head are only known to lie in p^N
        if vg_cmp(r, ValueGroupElement.identity(rank)) is Ordering.GT:
            raise UndecidableAtPrecision("truncated series at a radius > 1")
        bounds.append(_value(Fraction(-g.N), g.D + 1, log_r))
    best = vg_max(known)
    bound = vg_max(bounds)
    if best.is_zero:
        return ValueGroupElement.zero(g.N)
    if bounds and vg_cmp(best, bound) is not Ordering.GT:
        raise UndecidableAtPrecision(
            f"known terms {best} do not dominate the precision bound {bound}"
        )
    return best


def se_classical_abs(f: SeriesElement, alpha, rank: int = 1, max_terms: int = 400) -> ValueGroupElement:
    """|f(alpha)| for a rational alpha, summing tails until the value stabilises."""
    alpha = as_field_element(alpha)
    if not alpha.is_rational():
        raise CatalogError("classical evaluation at a formal pi-power")
    alpha = alpha.value
    p = f.prime
    if len(f.variables) > 1:
        raise CatalogError("classical evaluation needs a one-variable series")
    if not f.variables:
        return _abs_rational(f.constant_term(), p, rank)
    var = f.variables[0]
    if f.is_polynomial:
        return _abs_rational(f.evaluate({var: alpha}), p, rank)
    if f.is_truncated:
        raise UndecidableAtPrecision("classical value of a truncated series")
    if alpha == 0:
        return _abs_rational(f.coefficient(0), p, rank)
    la = Fraction(-vp(alpha, p))
    upto = f.D
    while True:
        partial = sum(
            (f.coefficient(i) * alpha ** i for i in range(f.min_exponents()[0], upto + 1)),
            Fraction(0),
        )
        sup = _tail_sup_value(f.tail, upto + 1, (la,), p)
        if sup is None:
            return _abs_rational(partial, p, rank)
        if partial != 0 and -vp(partial, p) > sup.logvec[0]:
            return _abs_rational(partial, p, rank)
        upto += 8
        if upto - f.D > max_terms:
            raise UndecidableAtPrecision("classical value did not stabilise")


def _abs_rational(c: Fraction, p: int, rank: int) -> ValueGroupElement:
    if c == 0:
        return ValueGroupElement.zero()
    return ValueGroupElement((Fraction(-vp(c, p)),)).embed(rank)


# ---------------------------------------------------------------------------
# convergence predicates


@dataclass(frozen=True)
class WeightDescriptor:
    """Per-variable finite subsets M_i of the base field (rationals)."""

    sets: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "sets", tuple(tuple(Fraction(m) for m in M) for M in self.sets)
        )

    @classmethod
    def singleton(cls, *elements) -> "WeightDescriptor":
        return cls(tuple((e,) for e in elements))

    def is_voluminous(self, ideal_of_definition_adjoined: bool = False) -> bool:
        return ideal_of_definition_adjoined or all(any(m != 0 for m in M) for M in self.sets)

    def weights(self, p: int) -> Tuple[Fraction, ...]:
        """Weight w_i with M_i^j Z_p = p^(j w_i) Z_p (Z_p is a DVR)."""
        out = []
        for M in self.sets:
            nonzero = [m for m in M if m != 0]
            if not nonzero:
                raise PreconditionError("weight set without a nonzero element is not voluminous")
            out.append(Fraction(min(vp(m, p) for m in nonzero)))
        return tuple(out)


def _require_decidable(f: SeriesElement) -> None:
    if f.is_truncated:
        raise CatalogError(
            "convergence of a truncated element is undecidable; supply a catalog tail"
        )


def _converges_weighted(f: SeriesElement, w: Sequence[Fraction]) -> bool:
    # |a_i| p^<w,i> -> 0
    _require_decidable(f)
    if f.tail is None:
        return True
    t = f.tail
    if t.kind == "zero":
        return True
    (wt,) = w
    if t.kind == "geometric":
        return t.a > wt
    if t.a > 0:
        return True
    return t.a == 0 and wt < 0


def _integral_weighted(f: SeriesElement, w: Sequence[Fraction]) -> bool:
    # |a_i| <= p^(-<w,i>) for every i
    p = f.prime
    for exp, c in f._head.items():
        if -vp(c, p) + sum(wi * e for wi, e in zip(w, exp)) > 0:
            return False
    if f.tail is None or f.tail.kind == "zero":
        return True
    try:
        return _tail_sup_log(f.tail, f.D + 1, w[0], p) <= 0
    except UndecidableAtPrecision:
        return False


def se_in_weighted(f: SeriesElement, M: WeightDescriptor, integral: bool = False) -> bool:
    """Membership in R<T>_M (or R_0<T>_M when ``integral``) over the Tate base."""
    if len(M.sets) != len(f.variables):
        raise PreconditionError(
            f"{len(M.sets)} weight sets for {len(f.variables)} variables"
        )
    if not M.is_voluminous():
        raise PreconditionError("weight tuple is not voluminous")
    if any(e < 0 for exp in f._head for e in exp):
        raise CatalogError("weighted algebras have no negative exponents")
    w = M.weights(f.prime)
    ok = _converges_weighted(f, w)
    if ok and integral:
        ok = _integral_weighted(f, w)
    return ok


def se_in_restricted(f: SeriesElement, m: int) -> bool:
    """f in k<pi^m T>: |a_i| p^(i m) -> 0."""
    _require_decidable(f)
    return _converges_weighted(f, (Fraction(m),) * max(len(f.variables), 1))


def se_is_entire(f: SeriesElement) -> bool:
    """f converges on every disc, i.e. lies in k<pi^m T> for all m."""
    _require_decidable(f)
    if f.tail is None or f.tail.kind == "zero":
        return True
    if f.tail.kind == "geometric":
        return False
    return f.tail.a > 0


def se_converges_with_weight(f: SeriesElement, w) -> bool:
    """|a_i| p^(w i) -> 0 for a possibly fractional weight w."""
    return _converges_weighted(f, (Fraction(w),) * max(len(f.variables), 1))


def se_in_open_unit_disc(f: SeriesElement) -> bool:
    """f converges on the open unit disc: in O(D(0, |p|^(1/m))) for every m."""
    _require_decidable(f)
    if f.tail is None or f.tail.kind == "zero":
        return True
    return f.tail.a >= 0


def se_in_open_disc_sections(f: SeriesElement, m: int) -> bool:
    """f in O(D(0, |pi^(1/m)|)): |a_i| p^(-i/m) -> 0."""
    if m < 1:
        raise PreconditionError("m must be a positive integer")
    _require_decidable(f)
    return _converges_weighted(f, (Fraction(-1, m),) * max(len(f.variables), 1))


# ---------------------------------------------------------------------------
# parsing and rendering


def parse_series(
    text: str,
    prime: int,
    variables: Sequence[str] | None = None,
) -> SeriesElement:
    """Parse a polynomial literal such as ``"1 + 3*T + p^2*T^-2"``.

    ``p`` denotes the prime.  Exponents of variables must be integers.
    """
    import sympy
    from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty series literal")
    names_in_text = set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text))
    local = {n: sympy.Symbol(n) for n in names_in_text}
    local["p"] = sympy.Integer(prime)
    try:
        expr = parse_expr(
            text,
            local_dict=local,
            transformations=standard_transformations + (convert_xor,),
            evaluate=True,
        )
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ParseError(f"cannot parse series literal {text!r}: {exc}") from None
    if not isinstance(expr, sympy.Expr):
        raise ParseError(f"not an expression: {text!r}")
    expr = sympy.expand(expr)
    names = sorted(str(s) for s in expr.free_symbols)
    if variables is None:
        variables = tuple(names)
    else:
        variables = tuple(variables)
        stray = [n for n in names if n not in variables]
        if stray:
            raise ParseError(f"unknown variables {stray} in {text!r}; expected {variables}")
    head: Dict[Exp, Fraction] = {}
    for term in sympy.Add.make_args(expr):
        coeff, rest = term.as_coeff_Mul()
        if not coeff.is_Rational:
            raise ParseError(f"non-rational coefficient {coeff} in {text!r}")
        exp = [0] * len(variables)
        for base, e in rest.as_powers_dict().items():
            if base == 1:
                continue
            if not base.is_Symbol:
                raise ParseError(f"malformed factor {base} in {text!r}")
            if not (e.is_Integer):
                raise ParseError(f"malformed exponent {e} of {base} in {text!r}")
            exp[variables.index(str(base))] += int(e)
        key = tuple(exp)
        head[key] = head.get(key, Fraction(0)) + Fraction(int(coeff.p), int(coeff.q))
    return SeriesElement(prime, variables, head)


def series_from_json(obj, prime: int, variables: Sequence[str] | None = None) -> SeriesElement:
    """Scenario form: a literal string, or ``{"head": ..., "tail": {...}}``."""
    if isinstance(obj, str):
        return parse_series(obj, prime, variables)
    if not isinstance(obj, dict):
        raise ParseError(f"series must be a string or an object, got {obj!r}")
    var = obj.get("variable") or (variables[0] if variables else "T")
    head = parse_series(obj.get("head", "0"), prime, (var,))
    tail_obj = obj.get("tail")
    if tail_obj is None:
        return head
    tail = Tail(
        tail_obj["kind"],
        Fraction(str(tail_obj.get("c", 1))),
        Fraction(str(tail_obj.get("a", 0))),
        Fraction(str(tail_obj.get("b", 0))),
    )
    D = int(obj.get("head_degree", max(head.degree(), -1)))
    out = SeriesElement(prime, (var,), head.head, tail, None, D)
    if variables is not None and tuple(variables) != (var,):
        return out.with_variables(variables)
    return out


def render_coefficient(c: Fraction, p: int) -> str:
    v = vp(c, p)
    u = c / Fraction(p) ** v
    if v == 0:
        return render_fraction(u)
    ppart = "p" if v == 1 else f"p^{v}"
    if u == 1:
        return ppart
    if u == -1:
        return "-" + ppart
    return f"{render_fraction(u)}*{ppart}"


def render_monomial(variables: Sequence[str], exp: Exp) -> str:
    parts = []
    for v, e in zip(variables, exp):
        if e == 1:
            parts.append(v)
        elif e != 0:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def term_order_key(exp: Exp):
    return (-sum(exp), tuple(-e for e in exp))


def render_series(f: SeriesElement) -> str:
    p = f.prime
    pieces = []
    for exp in sorted(f._head, key=term_order_key):
        c = f._head[exp]
        mono = render_monomial(f.variables, exp)
        coeff = render_coefficient(c, p)
        if not mono:
            pieces.append(coeff)
        elif coeff == "1":
            pieces.append(mono)
        elif coeff == "-1":
            pieces.append("-" + mono)
        else:
            pieces.append(f"{coeff}*{mono}")
    text = " + ".join(pieces).replace("+ -", "- ") if pieces else "0"
    if f.tail is not None:
        text += f" + tail[{f.tail.kind}](from {f.D + 1})"
    elif f.D is not None:
        text += f" + O(deg>{f.D})"
    if f.N is not None:
        text += f" mod p^{f.N}"
    return text


def polys(prime: int, variables: Sequence[str], *texts: str) -> Tuple[SeriesElement, ...]:
    return tuple(parse_series(t, prime, variables) for t in texts)


def geometric(prime: int, var: str = "T", c=1, a=1, b=0) -> SeriesElement:
    return SeriesElement.from_tail(prime, var, Tail("geometric", c, a, b))


def supergeometric(prime: int, var: str = "T", c=1, a=1) -> SeriesElement:
    return SeriesElement.from_tail(prime, var, Tail("supergeometric", c, a))


def iter_coefficients(f: SeriesElement, upto: int) -> Iterable[Tuple[int, Fraction]]:
    for i in range(f.min_exponents()[0] if f.variables else 0, upto + 1):
        c = f.coefficient(i)
        if c:
            yield i, c
