"""Symbolic presentations of Huber pairs and the constructions built from them.

A :class:`HuberPresentation` stores an integral model ``A_0`` as

    base [[power vars]] <restricted vars> <laurent vars> [poly vars] / (relations)

over ``Zp`` or ``Fp``, together with a flag saying whether p is inverted (then
``A = A_0[1/p]``), an ideal of definition, a topology label and a symbolic
description of the plus-ring.  Restricted variables may carry a weight w:
``<p^w*T>`` is the ring of series sum a_i T^i with |a_i| p^(w i) -> 0, i.e. the
disc of radius p^w, and also the weighted algebra R<T>_M for M = {p^w}.

Only a closed catalog of rewriting rules is implemented (see
:func:`normal_form` and :func:`pres_complete`); anything else is kept verbatim
or rejected with :class:`CatalogError`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .basefield import vp
from .errors import CatalogError, ParseError, PreconditionError
from .linalg import nullspace, rank
from .series import (
    SeriesElement,
    Tail,
    WeightDescriptor,
    parse_series,
    se_in_open_unit_disc,
    se_in_restricted,
    se_converges_with_weight,
    se_in_weighted,
    se_is_entire,
    term_order_key,
)
from .subset import RationalSubset, find_unit_certificate

VAR_KINDS = ("power", "restricted", "laurent", "poly")
TOPOLOGIES = ("tate", "adic", "discrete")
FRESH_NAMES = ("S", "U", "V", "W", "X", "Y", "Z")


@dataclass(frozen=True)
class Var:
    name: str
    kind: str = "restricted"
    weight: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in VAR_KINDS:
            raise CatalogError(f"unknown variable kind {self.kind!r}")
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.weight and self.kind != "restricted":
            raise CatalogError("only restricted variables carry weights")

    def render(self, prime: int) -> str:
        if self.kind == "laurent":
            return f"{self.name},{self.name}^-1"
        if self.weight == 0:
            return self.name
        w = self.weight
        scal = "p" if w == 1 else (f"p^{w.numerator}" if w.denominator == 1 else f"p^({w})")
        return f"{scal}*{self.name}"


def _normalise_relation(r: SeriesElement, p_inverted: bool) -> SeriesElement:
    """Scale a relation to a canonical generator of the same ideal."""
    if r.is_zero():
        return r
    if p_inverted:
        v = min(vp(c, r.prime) for _, c in r.items())
        r = r * Fraction(r.prime) ** -v
    lead_exp = min(r.head, key=term_order_key)
    c = r.head[lead_exp]
    unit = c / Fraction(r.prime) ** vp(c, r.prime)
    return r * (1 / unit)


@dataclass(frozen=True)
class HuberPresentation:
    prime: int
    base: str = "Zp"
    variables: Tuple[Var, ...] = ()
    relations: Tuple[SeriesElement, ...] = ()
    p_inverted: bool = False
    ideal: Tuple[SeriesElement, ...] = ()
    topology: str = "adic"
    plus_ring: str = ""
    label: str = ""
    zero_ring: bool = False
    inverted: Tuple[SeriesElement, ...] = ()
    completed: bool = True
    substitutions: Tuple[Tuple[str, SeriesElement], ...] = ()
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.base not in ("Zp", "Fp"):
            raise CatalogError(f"unsupported base {self.base!r}")
        if self.topology not in TOPOLOGIES:
            raise CatalogError(f"unknown topology {self.topology!r}")
        names = self.var_names
        if len(set(names)) != len(names):
            raise PreconditionError(f"repeated variable in {names}")
        if len(names) > 3:
            raise CatalogError("presentations have at most three variables")
        fix = lambda xs: tuple(x.with_variables(names) for x in xs)
        object.__setattr__(self, "relations", fix(self.relations))
        object.__setattr__(self, "ideal", fix(self.ideal))
        object.__setattr__(self, "inverted", fix(self.inverted))
        if self.p_inverted and self.base == "Fp":
            raise CatalogError("cannot invert p in characteristic p")

    @property
    def var_names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def var(self, name: str) -> Var:
        for v in self.variables:
            if v.name == name:
                return v
        raise PreconditionError(f"no variable {name!r} in {self.var_names}")

    def element(self, text) -> SeriesElement:
        if isinstance(text, SeriesElement):
            return text.with_variables(self.var_names)
        return parse_series(text, self.prime, self.var_names)

    def constant(self, c) -> SeriesElement:
        return SeriesElement.constant(self.prime, c, self.var_names)

    @property
    def is_tate(self) -> bool:
        return self.topology == "tate"

    # rendering ----------------------------------------------------------

    def _render(self, base: str) -> str:
        if self.zero_ring:
            return "0"
        out = base
        for kind in VAR_KINDS:
            vs = sorted((v for v in self.variables if v.kind == kind), key=lambda v: v.name)
            if not vs:
                continue
            inner = ",".join(v.render(self.prime) for v in vs)
            if kind == "power":
                out += f"[[{inner}]]"
            elif kind == "poly":
                out += f"[{inner}]"
            else:
                out += f"<{inner}>"
        for g in sorted(str(g) for g in self.inverted):
            out += f"[1/({g})]"
        rels = sorted(str(r) for r in self.relations)
        if rels:
            out += "/(" + ", ".join(rels) + ")"
        return out

    def render_ring(self) -> str:
        return self._render("Qp" if self.p_inverted else self.base)

    def render_ring_of_definition(self) -> str:
        return self._render(self.base)

    def render_ideal(self) -> str:
        return "(" + ", ".join(str(g) for g in self.ideal) + ")"

    def __str__(self) -> str:
        return self.render_ring()

    def describe(self) -> Dict[str, str]:
        return {
            "ring": self.render_ring(),
            "ring_of_definition": self.render_ring_of_definition(),
            "ideal_of_definition": self.render_ideal(),
            "plus_ring": self.plus_ring or self.render_ring_of_definition(),
            "topology": self.topology,
        }


def plus_of(P: HuberPresentation) -> str:
    return P.plus_ring or P.render_ring_of_definition()


def _integrally_closed_model(P: HuberPresentation) -> bool:
    # Zp / Fp with free restricted, power or polynomial variables: a regular ring,
    # hence integrally closed in its fraction field
    return not P.relations and not P.inverted and all(v.kind != "laurent" for v in P.variables)


def _default_plus(P: HuberPresentation) -> HuberPresentation:
    if _integrally_closed_model(P):
        return replace(P, plus_ring=P.render_ring_of_definition())
    return P


# ---------------------------------------------------------------------------
# construction helpers


def make(
    prime: int,
    text: str,
    ideal: Sequence[str] | None = None,
    topology: Optional[str] = None,
    label: str = "",
    normalize: bool = True,
) -> HuberPresentation:
    """Build a presentation from its canonical string, e.g. ``"Zp[[T]]"``,
    ``"Qp<T,S>/(p*S - T^3)"`` or ``"Zp<p*T>"``."""
    m = re.fullmatch(r"\s*(Zp|Qp|Fp)(.*?)(?:/\((.*)\))?\s*", text)
    if not m:
        raise ParseError(f"cannot parse presentation {text!r}")
    base_name, groups, rels = m.group(1), m.group(2), m.group(3)
    variables: List[Var] = []
    pos = 0
    groups = groups.strip()
    while pos < len(groups):
        for opener, closer, kind in (("[[", "]]", "power"), ("<", ">", "restricted"), ("[", "]", "poly")):
            if groups.startswith(opener, pos):
                end = groups.index(closer, pos + len(opener))
                items = [s.strip() for s in groups[pos + len(opener):end].split(",") if s.strip()]
                k = 0
                while k < len(items):
                    item = items[k]
                    if kind == "restricted" and k + 1 < len(items) and items[k + 1] == f"{item}^-1":
                        variables.append(Var(item, "laurent"))
                        k += 2
                        continue
                    wm = re.fullmatch(r"p(?:\^\(?(-?\d+(?:/\d+)?)\)?)?\*([A-Za-z]\w*)", item)
                    if wm and kind == "restricted":
                        w = Fraction(wm.group(1)) if wm.group(1) else Fraction(1)
                        variables.append(Var(wm.group(2), kind, w))
                    elif re.fullmatch(r"[A-Za-z]\w*", item) and item != "p":
                        variables.append(Var(item, kind))
                    else:
                        raise ParseError(f"bad variable {item!r} in {text!r}")
                    k += 1
                pos = end + len(closer)
                break
        else:
            raise ParseError(f"unexpected text {groups[pos:]!r} in {text!r}")
    names = tuple(v.name for v in variables)
    relations = []
    if rels:
        for r in _split_top(rels):
            relations.append(parse_series(r, prime, names))
    p_inv = base_name == "Qp"
    base = "Fp" if base_name == "Fp" else "Zp"
    if ideal is None:
        ideal_elems = [] if base == "Fp" else ["p"]
        ideal_elems += [v.name for v in variables if v.kind == "power"]
    else:
        ideal_elems = list(ideal)
    ideal_series = tuple(parse_series(g, prime, names) for g in ideal_elems)
    if topology is None:
        topology = "tate" if p_inv else ("discrete" if not ideal_series else "adic")
    P = HuberPresentation(
        prime, base, tuple(variables), tuple(relations), p_inv, ideal_series, topology, label=label
    )
    P = _default_plus(P)
    return normal_form(P) if normalize else P


def _split_top(text: str) -> List[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


def presentation_from_json(obj, prime: int, normalize: bool = True) -> HuberPresentation:
    """A canonical string, or ``{"ring": ..., "ideal": [...], "topology": ...}``,
    or ``{"catalog": "not_sheafy"}`` (the bare string also works)."""
    if obj == "not_sheafy" or isinstance(obj, dict) and "catalog" in obj:
        from .sheafcheck import catalog_presentation

        return catalog_presentation(obj if isinstance(obj, str) else obj["catalog"], prime)
    if isinstance(obj, str):
        return make(prime, obj, normalize=normalize)
    return make(prime, obj["ring"], obj.get("ideal"), obj.get("topology"), obj.get("label", ""), normalize)


# ---------------------------------------------------------------------------
# normal forms


def _drop_var(P: HuberPresentation, name: str, value: SeriesElement) -> HuberPresentation:
    names = tuple(n for n in P.var_names if n != name)

    def sub(x: SeriesElement) -> SeriesElement:
        return x.substitute(name, value).drop_variable(name).with_variables(names)

    subs = tuple((k, sub(v)) for k, v in P.substitutions) + ((name, value.drop_variable(name)),)
    return replace(
        P,
        variables=tuple(v for v in P.variables if v.name != name),
        relations=tuple(sub(r) for r in P.relations),
        ideal=tuple(sub(g) for g in P.ideal),
        inverted=tuple(sub(g) for g in P.inverted),
        substitutions=subs,
    )


def _zero_ring(P: HuberPresentation, why: str) -> HuberPresentation:
    return replace(P, variables=(), relations=(), ideal=(), inverted=(), zero_ring=True,
                   substitutions=(), notes=P.notes + (why,))


def _is_integral(x: SeriesElement) -> bool:
    return all(vp(c, x.prime) >= 0 for _, c in x.items())


def _linear_in(r: SeriesElement, k: int) -> Optional[Tuple[Fraction, SeriesElement]]:
    """Write r = c*X_k - h with h free of X_k, if r has that shape."""
    c = None
    rest = {}
    for exp, a in r.items():
        if exp[k] == 0:
            rest[exp] = -a
        elif exp[k] == 1 and all(e == 0 for j, e in enumerate(exp) if j != k):
            c = a
        else:
            return None
    if c is None:
        return None
    return c, SeriesElement(r.prime, r.variables, rest)


def _unit_of_weighted(P: HuberPresentation, var: Var, c: Fraction, b: Fraction) -> bool:
    """Is c*X - b a unit in <p^w X>?  Its inverse is -(1/b) sum (c/b)^i X^i,

    whose coefficients have valuation i*v(c/b); only valuations matter for
    convergence, so the geometric tail p^(v(c/b) i) decides."""
    a = Fraction(vp(c, P.prime) - vp(b, P.prime))
    inverse = SeriesElement.from_tail(P.prime, var.name, Tail("geometric", Fraction(-1) / b, a, 0))
    if var.weight.denominator == 1:
        M = WeightDescriptor.singleton(Fraction(P.prime) ** int(var.weight))
        return se_in_weighted(inverse, M)
    return se_converges_with_weight(inverse, var.weight)


def _step(P: HuberPresentation) -> Optional[HuberPresentation]:
    """Apply one rewriting rule, or return None at a fixed point."""
    rels = []
    for r in P.relations:
        r = _normalise_relation(r, P.p_inverted)
        if not r.is_zero() and r not in rels:
            rels.append(r)
    if tuple(rels) != P.relations:
        return replace(P, relations=tuple(rels))
    p = P.prime
    for r in P.relations:
        if r.is_constant():
            c = r.constant_term()
            if P.p_inverted or vp(c, p) == 0:
                return _zero_ring(P, f"relation {r} is a unit")
    names = P.var_names
    # rule: c*X - b with constants -> evaluate X, or detect a unit relation
    for i, r in enumerate(P.relations):
        for k, var in enumerate(P.variables):
            lin = _linear_in(r, k)
            if lin is None or not lin[1].is_constant() or var.kind == "laurent":
                continue
            c, h = lin
            b = h.constant_term()
            others = tuple(x for j, x in enumerate(P.relations) if j != i)
            if b == 0:
                value = SeriesElement.zero(p, names)
            else:
                val = Fraction(vp(c, p) - vp(b, p))  # log|b/c|
                if var.kind == "power" and val >= 0:
                    continue
                if var.kind == "restricted" and _unit_of_weighted(P, var, c, b):
                    return _zero_ring(P, f"{r} is a unit on <{var.render(p)}>")
                value = SeriesElement.constant(p, b / c, names)
                if val > 0 and not P.p_inverted:
                    P = replace(P, p_inverted=True, topology="tate",
                                notes=P.notes + (f"{var.name} = {b / c} inverts p",))
            return _drop_var(replace(P, relations=others), var.name, value)
    # rule: c*X - h, h integral in bounded variables -> eliminate X
    for i, r in enumerate(P.relations):
        for k, var in enumerate(P.variables):
            lin = _linear_in(r, k)
            if lin is None:
                continue
            c, h = lin
            used = [P.var(n) for n in h.support_variables()]
            if var.kind == "poly":
                ok = all(u.kind == "poly" for u in used)
                value = h * (1 / c)
            elif var.kind == "restricted" and var.weight == 0:
                value = h * (1 / c)
                ok = (P.p_inverted or vp(c, p) == 0) and _is_integral(value) and all(
                    u.kind == "restricted" and u.weight == 0 for u in used
                )
            else:
                ok = False
            if ok:
                others = tuple(x for j, x in enumerate(P.relations) if j != i)
                return _drop_var(replace(P, relations=others), var.name, value)
    # rule: X*Y - u (u a unit) -> Laurent variable X
    for i, r in enumerate(P.relations):
        items = dict(r.items())
        if len(items) != 2:
            continue
        zero = (0,) * len(names)
        if zero not in items or vp(items[zero], p) != 0:
            continue
        (exp,) = [e for e in items if e != zero]
        if sorted(exp) != [0] * (len(names) - 2) + [1, 1]:
            continue
        ks = [k for k, e in enumerate(exp) if e == 1]
        if P.variables[ks[0]].name in FRESH_NAMES and P.variables[ks[1]].name not in FRESH_NAMES:
            ks.reverse()
        xv, yv = (P.variables[k] for k in ks)
        if xv.kind != "restricted" or yv.kind != "restricted" or xv.weight or yv.weight:
            continue
        u = -items[zero] / items[exp]
        others = tuple(x for j, x in enumerate(P.relations) if j != i)
        Q = replace(P, relations=others, variables=tuple(
            Var(v.name, "laurent") if v.name == xv.name else v for v in P.variables))
        inv = SeriesElement(p, names, {tuple(-1 if j == ks[0] else 0 for j in range(len(names))): u})
        return _drop_var(Q, yv.name, inv)
    return None


def normal_form(P: HuberPresentation) -> HuberPresentation:
    """Rewrite to the catalog normal form (fixed point of the rules)."""
    if P.zero_ring:
        return P
    for _ in range(64):
        Q = _step(P)
        if Q is None:
            break
        P = Q
        if P.zero_ring:
            return P
    else:
        raise CatalogError("normal form did not stabilise")
    ordered = tuple(sorted(P.variables, key=lambda v: (VAR_KINDS.index(v.kind), v.name)))
    P = replace(P, variables=ordered)
    return P


def pres_equal(a: HuberPresentation, b: HuberPresentation, precision=(8, 32)) -> bool:
    """Normal forms agree up to renaming variables, relations compared at (N, D)."""
    N, D = precision
    a, b = normal_form(a), normal_form(b)
    if a.zero_ring or b.zero_ring:
        return a.zero_ring == b.zero_ring
    if (a.prime, a.base, a.p_inverted) != (b.prime, b.base, b.p_inverted):
        return False
    if a.topology != b.topology or len(a.variables) != len(b.variables):
        return False
    if len(a.relations) != len(b.relations) or len(a.inverted) != len(b.inverted):
        return False
    for perm in itertools.permutations(b.variables):
        if any((x.kind, x.weight) != (y.kind, y.weight) for x, y in zip(a.variables, perm)):
            continue
        mapping = {x.name: y.name for x, y in zip(a.variables, perm)}
        ren = lambda s: s.rename(mapping).with_variables(b.var_names)
        if _match(list(map(ren, a.relations)), list(b.relations), N, D) and _match(
            list(map(ren, a.inverted)), list(b.inverted), N, D
        ):
            return True
    return False


def _match(xs: List[SeriesElement], ys: List[SeriesElement], N, D) -> bool:
    ys = list(ys)
    for x in xs:
        hit = next((y for y in ys if x.equal_at(y, N, D) or x.equal_at(-y, N, D)), None)
        if hit is None:
            return False
        ys.remove(hit)
    return not ys


# ---------------------------------------------------------------------------
# localisation, completion, quotients


def _fresh(P: HuberPresentation, count: int) -> List[str]:
    used = set(P.var_names) | {"p"}
    out: List[str] = []
    if count == 0:
        return out
    for name in FRESH_NAMES + tuple(f"S{i}" for i in range(1, 10)):
        if name not in used:
            out.append(name)
            used.add(name)
        if len(out) == count:
            return out
    raise CatalogError("ran out of variable names")


def _open_ideal_evidence(P: HuberPresentation, gens: Sequence[SeriesElement]) -> bool:
    if P.p_inverted or P.topology == "tate":
        return find_unit_certificate([g for g in gens]) is not None or any(
            g.is_constant() and not g.is_zero() for g in gens
        )
    if any(g.is_constant() and vp(g.constant_term(), P.prime) == 0 for g in gens):
        return True
    # some power of every ideal generator appears (up to a unit) among the gens
    for s in P.ideal:
        if not any(_is_unit_multiple_of_power(g, s) for g in gens):
            return False
    return True


def _is_unit_multiple_of_power(g: SeriesElement, s: SeriesElement) -> bool:
    if len(g.head) != 1 or len(s.head) != 1:
        return False
    (eg, cg), = g.items()
    (es, cs), = s.items()
    for n in range(1, 33):
        if tuple(n * x for x in es) == eg and vp(cg, g.prime) == n * vp(cs, g.prime):
            return True
    return False


def pres_localize(P: HuberPresentation, U: RationalSubset) -> HuberPresentation:
    """(A[1/g], A+[f/g]^N) with A_0[f/g]; completed form A<S>/(g S - f) when Tate."""
    nums = [P.element(f) for f in U.numerators]
    g = P.element(U.denominator)
    if g.is_zero():
        raise PreconditionError("denominator is zero")
    if U.witness is None and not _open_ideal_evidence(P, nums + [g]):
        raise PreconditionError(
            f"no open-ideal certificate for {', '.join(map(str, nums))} / {g}"
        )
    nums = [f for f in nums if f != g]
    p = P.prime
    fresh = _fresh(P, len(nums))
    names = P.var_names + tuple(fresh)
    kind = "restricted" if P.is_tate else "poly"
    new_vars = P.variables + tuple(Var(n, kind) for n in fresh)
    gg = g.with_variables(names)
    rels = list(P.relations)
    for name, f in zip(fresh, nums):
        S = SeriesElement.variable(p, name, names)
        rels.append(gg * S - f.with_variables(names))
    inverted = list(P.inverted)
    p_inv, topology = P.p_inverted, P.topology
    if g.is_constant():
        v = vp(g.constant_term(), p)
        if v > 0 and not p_inv:
            p_inv, topology = True, "tate"
    elif not P.is_tate:
        inverted.append(gg)
    fracs = ", ".join(f"({f})/({g})" for f in nums)
    plus = plus_of(P) if not nums else f"({plus_of(P)}[{fracs}])^N"
    raw = HuberPresentation(
        p, P.base, new_vars, tuple(rels), p_inv, tuple(P.ideal), topology, plus,
        P.label, False, tuple(inverted), P.is_tate,
    )
    out = normal_form(raw)
    if nums and not out.relations:
        out = _default_plus(out)
    return replace(out, notes=out.notes + (f"quotient form {raw.render_ring()}",))


def _restricted_all(P: HuberPresentation) -> HuberPresentation:
    return replace(P, variables=tuple(
        Var(v.name, "restricted", v.weight) if v.kind in ("poly", "power") else v for v in P.variables
    ))


def _relation_puts_power_in_p(P: HuberPresentation, s: SeriesElement) -> bool:
    """Some relation reads c1*S - c2*s^n with p | c1 and c2 a unit, S a variable."""
    if len(s.head) != 1:
        return False
    (es, cs), = s.items()
    if vp(cs, P.prime) != 0:
        return False
    for r in P.relations:
        items = dict(r.items())
        if len(items) != 2:
            continue
        for e1, c1 in items.items():
            (e2,) = [e for e in items if e != e1]
            c2 = items[e2]
            if sum(e1) == 1 and vp(c1, P.prime) >= 1 and vp(c2, P.prime) == 0:
                n = next((n for n in range(1, 65) if tuple(n * x for x in es) == e2), None)
                if n is not None:
                    return True
    return False


def pres_complete(P: HuberPresentation, precision=(8, 32)) -> HuberPresentation:
    """Completed normal form, by the catalog rules.

    * discrete rings are already complete;
    * if the ideal is (p, s_1, ...) and each s_j^n lies in p*A_0 through a
      relation p*S - s_j^n, the topology is p-adic and every variable becomes
      restricted;
    * under the p-adic topology polynomial variables become restricted;
    * under an s-adic topology (s a variable, p not in the ideal or p
      nilpotent-free Fp base) polynomial variables in the ideal become power
      series variables.
    """
    if P.zero_ring or P.topology == "discrete":
        return replace(P, completed=True)
    p = P.prime
    pconst = SeriesElement.constant(p, p, P.var_names)
    has_p = pconst in P.ideal
    others = [s for s in P.ideal if s != pconst]
    if has_p and all(_relation_puts_power_in_p(P, s) for s in others):
        Q = replace(_restricted_all(P), ideal=(pconst,), completed=True)
        if any(v.kind == "power" for v in P.variables) or others:
            Q = replace(Q, notes=Q.notes + ("ideal of definition reduces to (p)",))
        Q = normal_form(Q)
        if _integrally_closed_model(Q):
            return _default_plus(Q)
        return replace(Q, plus_ring=plus_of(P))
    ideal_vars = set()
    for s in others:
        names = s.support_variables()
        if len(s.head) == 1 and len(names) == 1 and s.head.get(
            tuple(int(n == names[0]) for n in P.var_names)
        ) == 1:
            ideal_vars.add(names[0])
        else:
            raise CatalogError(f"ideal generator {s} is not a variable or p")
    new_vars = []
    for v in P.variables:
        if v.kind == "poly" and v.name in ideal_vars:
            new_vars.append(Var(v.name, "power"))
        elif v.kind == "poly" and has_p:
            new_vars.append(Var(v.name, "restricted"))
        elif v.kind == "poly" and not has_p:
            raise CatalogError(f"variable {v.name} has no topology to complete along")
        else:
            new_vars.append(v)
    Q = replace(P, variables=tuple(new_vars), completed=True)
    Q = normal_form(Q)
    return _default_plus(replace(Q, plus_ring=P.plus_ring if P.relations else ""))


def pres_quotient(P: HuberPresentation, rel) -> HuberPresentation:
    r = P.element(rel)
    plus = plus_of(P) if r.is_zero() else f"integral closure of the image of {plus_of(P)}"
    out = normal_form(replace(P, relations=P.relations + (r,), plus_ring=plus))
    if out.zero_ring:
        return out
    if _integrally_closed_model(out) or (not out.relations and not out.variables):
        out = replace(out, plus_ring=out.render_ring_of_definition())
    return out


def witness_p_inverse(P: HuberPresentation) -> Optional[SeriesElement]:
    """An element e of the presented ring with p*e = 1, read off the normal form."""
    if not P.p_inverted or P.zero_ring:
        return None
    for name, value in P.substitutions:
        if value.is_constant() and value.constant_term() == Fraction(1, P.prime):
            return value.with_variables(P.var_names)
    return P.constant(Fraction(1, P.prime))


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Transition:
    """Restriction from piece ``source`` to piece ``target``: var -> scale * expr.

    ``scale_exp`` records a formal p-power so transitions compose by adding
    exponents."""

    source: int
    target: int
    images: Tuple[Tuple[str, SeriesElement], ...]
    scale_exp: Tuple[Tuple[str, Fraction], ...] = ()


@dataclass(frozen=True)
class PresentationFamily:
    kind: str  # single | ascending_discs | ascending_open | p1_charts | adic_tensor
    pieces: Tuple[HuberPresentation, ...]
    transitions: Tuple[Transition, ...] = ()
    union_semantics: str = "ascending_union"
    truncated: bool = False
    labels: Tuple[str, ...] = ()
    overlap: Optional[HuberPresentation] = None

    def marker(self) -> str:
        if self.truncated:
            return "truncated ascending union"
        return self.union_semantics.replace("_", " ")


def compose_scales(chain: Sequence[Transition]) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    for t in chain:
        for name, e in t.scale_exp:
            out[name] = out.get(name, Fraction(0)) + e
    return out


def _p_in_ideal(P: HuberPresentation) -> bool:
    return SeriesElement.constant(P.prime, P.prime, P.var_names) in P.ideal


def pres_generic_fiber(P: HuberPresentation, pi=None, n_max: int = 8) -> PresentationFamily:
    """The locus |p(x)| != 0 of Spa(A_0, A_0)."""
    p = P.prime
    if pi is not None and Fraction(pi) != p:
        raise CatalogError("the pseudouniformizer must be p in this model")
    if P.p_inverted or P.base != "Zp":
        raise PreconditionError("generic fiber needs an integral model over Zp")
    if not _p_in_ideal(P):
        raise PreconditionError(f"p is not in the ideal of definition {P.render_ideal()}")
    pc = P.constant(p)
    others = [s for s in P.ideal if s != pc]
    if not others:
        U = RationalSubset((pc,), pc)
        piece = pres_localize(P, U)
        piece = replace(piece, plus_ring=plus_of(P))
        return PresentationFamily("single", (piece,), (), "single", False, ("R(p/p)",))
    pieces, labels, transitions = [], [], []
    for n in range(1, n_max + 1):
        U = RationalSubset(tuple(s ** n for s in others), pc)
        piece = pres_complete(pres_localize(P, U))
        pieces.append(piece)
        labels.append("R(" + ", ".join(str(s ** n) for s in others) + " / p)")
        if n > 1:
            transitions.append(_ascending_transition(others, n - 1, n - 2, p))
    return PresentationFamily(
        "ascending_open", tuple(pieces), tuple(transitions), "ascending_union", True, tuple(labels)
    )


def _ascending_transition(others, i_big: int, i_small: int, p: int) -> Transition:
    # S = s^(n+1)/p on the bigger disc restricts to s * (s^n/p) on the smaller one
    images = []
    for s in others:
        names = s.variables + ("S",)
        S = SeriesElement.variable(p, "S", names)
        images.append(("S", s.with_variables(names) * S))
    return Transition(i_big, i_small, tuple(images), ())


def pres_special_fiber(P: HuberPresentation) -> HuberPresentation:
    """A_0 / p with the induced topology."""
    if P.p_inverted or P.base != "Zp":
        raise PreconditionError("special fiber needs an integral model over Zp")
    p = P.prime
    names = P.var_names

    def reduce(x: SeriesElement) -> SeriesElement:
        if not _is_integral(x):
            raise PreconditionError(f"{x} is not integral")
        red = SeriesElement(p, names, {e: c for e, c in x.items() if vp(c, p) == 0}).reduce_mod(1)
        return SeriesElement(p, names, red.head)

    rels = tuple(r for r in (reduce(r) for r in P.relations) if not r.is_zero())
    ideal = tuple(g for g in (reduce(g) for g in P.ideal) if not g.is_zero())
    variables = tuple(Var(v.name, "poly") if v.kind == "restricted" else v for v in P.variables)
    if any(v.weight for v in P.variables):
        raise CatalogError("special fiber of a weighted algebra")
    topology = "adic" if ideal else "discrete"
    Q = HuberPresentation(p, "Fp", variables, rels, False, ideal, topology, label=P.label)
    return _default_plus(normal_form(Q))


def _rename_apart(B: HuberPresentation, C: HuberPresentation) -> HuberPresentation:
    clash = [n for n in C.var_names if n in B.var_names]
    if not clash:
        return C
    used = set(B.var_names) | set(C.var_names) | {"p"}
    mapping = {}
    for n in clash:
        new = next(x for x in FRESH_NAMES + tuple(f"S{i}" for i in range(1, 10)) if x not in used)
        used.add(new)
        mapping[n] = new
    ren = lambda xs: tuple(x.rename(mapping) for x in xs)
    return replace(
        C,
        variables=tuple(Var(mapping.get(v.name, v.name), v.kind, v.weight) for v in C.variables),
        relations=ren(C.relations),
        ideal=ren(C.ideal),
        inverted=ren(C.inverted),
        substitutions=(),
    )


def _is_adic_over(B: HuberPresentation, A: HuberPresentation) -> bool:
    """A -> B adic: the image of A's ideal of definition is one for B."""
    a_gens = {str(g) for g in A.ideal}
    b_gens = {str(g) for g in B.ideal}
    return bool(a_gens) and b_gens <= a_gens


def _tensor(B: HuberPresentation, C: HuberPresentation) -> HuberPresentation:
    C = _rename_apart(B, C)
    names = B.var_names + C.var_names
    emb = lambda xs: tuple(x.with_variables(names) for x in xs)
    ideal = []
    for g in emb(B.ideal) + emb(C.ideal):
        if g not in ideal:
            ideal.append(g)
    p_inv = B.p_inverted or C.p_inverted
    topology = "tate" if p_inv else ("adic" if ideal else "discrete")
    D = HuberPresentation(
        B.prime, B.base, B.variables + C.variables, emb(B.relations) + emb(C.relations), p_inv,
        tuple(ideal), topology, label=f"{B.label} x {C.label}".strip(" x"),
        inverted=emb(B.inverted) + emb(C.inverted),
    )
    D = pres_complete(D) if D.topology != "discrete" else D
    if _integrally_closed_model(D):
        plus = D.render_ring_of_definition()
    else:
        plus = f"integral closure of {plus_of(B)} (x) {plus_of(C)}"
    return replace(normal_form(D), plus_ring=plus)


def pres_fiber_product(
    B: HuberPresentation, C: HuberPresentation, A: HuberPresentation, mode: str = "adic", i_max: int = 8
):
    if B.base != A.base or C.base != A.base or B.prime != A.prime or C.prime != A.prime:
        raise PreconditionError("fiber product factors must live over the same base")
    if A.variables:
        raise CatalogError("fiber products are supported over a base without variables")
    if mode == "adic":
        if not (_is_adic_over(B, A) and _is_adic_over(C, A)):
            raise PreconditionError("adic mode needs both structure maps to be adic")
        if not B.variables and not C.variables and B.p_inverted == C.p_inverted == A.p_inverted:
            return A
        return _tensor(B, C)
    if mode != "ascending":
        raise PreconditionError(f"unknown fiber-product mode {mode!r}")
    nonadic = [X for X in (B, C) if not _is_adic_over(X, A)]
    adic = [X for X in (B, C) if _is_adic_over(X, A)]
    if len(nonadic) != 1 or len(adic) != 1:
        raise PreconditionError("ascending mode needs exactly one non-adic factor")
    Bn, Ca = nonadic[0], adic[0]
    if Ca.variables or not Ca.p_inverted:
        raise CatalogError("ascending mode is supported for base change to Qp")
    fam = pres_generic_fiber(Bn, n_max=i_max)
    labels = tuple(f"M_(L,{i}) = (p) u L^{i}: {lbl}" for i, lbl in enumerate(fam.labels, 1))
    return replace(fam, labels=labels)


def pres_analytify(P: HuberPresentation, k_max: int = 8) -> PresentationFamily:
    """Ascending union of B<p^k T>/I, k = 0..k_max-1, for a polynomial algebra over Qp."""
    if not P.p_inverted:
        raise PreconditionError("analytification needs a Tate base field (Qp)")
    if any(v.kind != "poly" for v in P.variables):
        raise PreconditionError("analytification takes a polynomial presentation")
    if not P.variables:
        piece = replace(P, topology="tate", plus_ring="Zp")
        return PresentationFamily("single", (piece,), (), "single", False, ("Spa(k, k+)",))
    pieces, transitions, labels = [], [], []
    p = P.prime
    for k in range(k_max):
        variables = tuple(Var(v.name, "restricted", k) for v in P.variables)
        raw = HuberPresentation(
            p, "Zp", variables, P.relations, True, (P.constant(p),), "tate", label=f"B_{k}"
        )
        piece = _default_plus(normal_form(raw))
        pieces.append(piece)
        labels.append(f"disc radius p^{k}")
        if k:
            transitions.append(
                Transition(k, k - 1, tuple((v.name, SeriesElement.variable(p, v.name, P.var_names)) for v in P.variables),
                           tuple((v.name, Fraction(1)) for v in P.variables))
            )
    kind = "ascending_discs" if not P.relations else "ascending_closed"
    return PresentationFamily(kind, tuple(pieces), tuple(transitions), "ascending_union", True, tuple(labels))


def p1_family(prime: int) -> PresentationFamily:
    """P^1 as two unit discs glued along the circle, S = 1/T."""
    D1 = make(prime, "Qp<T>", label="D1")
    D2 = make(prime, "Qp<S>", label="D2")
    overlap = make(prime, "Qp<T,T^-1>", label="S(0,1)")
    tinv = SeriesElement(prime, ("T",), {(-1,): 1})
    T = SeriesElement.variable(prime, "T")
    transitions = (
        Transition(0, 2, (("T", T),)),
        Transition(1, 2, (("S", tinv),)),
    )
    return PresentationFamily("p1_charts", (D1, D2), transitions, "disjoint_cover", False,
                              ("D1 = |T| <= 1", "D2 = |T| >= 1"), overlap)


# ---------------------------------------------------------------------------
# global sections


@dataclass(frozen=True)
class SectionDescription:
    kind: str  # constants | predicate | ring
    description: str
    dimension: Optional[int] = None
    basis: Tuple[Tuple[Fraction, ...], ...] = ()
    predicate: Optional[Callable[[SeriesElement], bool]] = None
    ring: Optional[HuberPresentation] = None


def _chart_matrix(t: Transition, chart: HuberPresentation, D: int):
    """Columns: images of the monomials var^i (0 <= i <= D) in the window [-D, D]."""
    (name, image), = t.images
    cols = []
    for i in range(D + 1):
        img = image ** i
        col = [Fraction(0)] * (2 * D + 1)
        for (e,), c in img.items():
            if not -D <= e <= D:
                raise PreconditionError("transition leaves the degree window")
            col[e + D] = c
        cols.append(col)
    return cols


def pres_glue_sections(fam: PresentationFamily, precision=(8, 32)) -> SectionDescription:
    N, D = precision
    if any(pc.zero_ring for pc in fam.pieces):
        raise PreconditionError("family has a zero piece: transitions are not injective")
    if fam.kind == "single" or len(fam.pieces) == 1:
        ring = fam.pieces[0]
        return SectionDescription("ring", ring.render_ring(), ring=ring)
    if fam.kind == "p1_charts":
        t0, t1 = fam.transitions
        c0 = _chart_matrix(t0, fam.pieces[0], D)
        c1 = _chart_matrix(t1, fam.pieces[1], D)
        for cols in (c0, c1):
            if rank([list(r) for r in zip(*cols)]) != D + 1:
                raise PreconditionError("restriction to the overlap is not injective at precision")
        # (f, g) with f|overlap - g|overlap = 0
        A = [list(row) for row in zip(*(c0 + [[-x for x in col] for col in c1]))]
        kernel = nullspace(A)
        basis = tuple(tuple(v) for v in kernel)
        constants = len(kernel) == 1 and all(
            x == 0 for j, x in enumerate(kernel[0]) if j not in (0, D + 1)
        )
        desc = "constants" if constants else f"kernel of dimension {len(kernel)}"
        return SectionDescription("constants" if constants else "kernel", desc, len(kernel), basis)
    if fam.kind == "ascending_discs":
        return SectionDescription(
            "predicate", "entire power series (converge on every disc)", predicate=se_is_entire
        )
    if fam.kind == "ascending_open":
        return SectionDescription(
            "predicate", "series converging on the open unit disc", predicate=se_in_open_unit_disc
        )
    raise CatalogError(f"gluing is not implemented for {fam.kind} families")


def truncated_predicate(fam: PresentationFamily) -> Callable[[SeriesElement], bool]:
    """Membership in every listed piece (the finite stage of the limit)."""
    if fam.kind == "ascending_discs":
        return lambda f: all(se_in_restricted(f, int(pc.variables[0].weight)) for pc in fam.pieces)
    if fam.kind == "ascending_open":
        from .series import se_in_open_disc_sections

        return lambda f: all(se_in_open_disc_sections(f, n) for n in range(1, len(fam.pieces) + 1))
    raise CatalogError(f"no truncated predicate for {fam.kind}")
