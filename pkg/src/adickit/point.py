"""Points of the adic unit disc and affine line.

A point is a valuation on one-variable series in its chart variable:

* classical ``x_alpha``         f -> |f(alpha)|
* gauss ``x_{alpha,r}``        f -> max_i |b_i| r^i with f = sum b_i (T - alpha)^i
* gauss_signed ``x_{alpha,r-+}`` the same with the rank-2 radius (log r, -+1),
  i.e. r times an infinitesimal just below (minus) or above (plus) 1
* trivial                       |f| = 1 for f != 0 (not continuous on Q_p)
* residue_trivial               |f| = 1 if f mod p != 0 else 0

The second coordinate of a signed radius is measured in units of a chosen
infinitesimal ``eps2``.  Only the sign is stored; evaluation can be asked to
use another scale ``eps_scale`` to show that nothing depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .basefield import FieldElement, as_field_element, vp
from .errors import CatalogError, PreconditionError, UndecidableAtPrecision
from .series import SeriesElement, se_classical_abs, se_gauss_eval
from .valgroup import Ordering, ValueGroupElement, render_fraction, vg_cmp, vg_is_cofinal

POINT_KINDS = ("classical", "gauss", "gauss_signed", "gauss_irrational", "trivial", "residue_trivial")


@dataclass(frozen=True)
class DiscPoint:
    kind: str
    prime: int
    alpha: FieldElement = FieldElement(Fraction(0))
    r_log: Optional[Fraction] = None
    sign: int = 0
    chart: str = "T"

    def __post_init__(self):
        if self.kind not in POINT_KINDS:
            raise PreconditionError(f"unknown point kind {self.kind!r}")
        object.__setattr__(self, "alpha", as_field_element(self.alpha))
        if self.r_log is not None:
            object.__setattr__(self, "r_log", Fraction(self.r_log))
        if self.kind in ("gauss", "gauss_signed") and self.r_log is None:
            raise PreconditionError(f"{self.kind} point needs a radius")
        if self.kind == "gauss_signed" and self.sign not in (-1, 1):
            raise PreconditionError("signed Gauss point needs sign -1 (minus) or +1 (plus)")

    # constructors

    @classmethod
    def classical(cls, prime: int, alpha, chart: str = "T") -> "DiscPoint":
        return cls("classical", prime, as_field_element(alpha), chart=chart)

    @classmethod
    def gauss(cls, prime: int, alpha, r_log, chart: str = "T") -> "DiscPoint":
        return cls("gauss", prime, as_field_element(alpha), Fraction(r_log), chart=chart)

    @classmethod
    def gauss_signed(cls, prime: int, alpha, r_log, sign: int, chart: str = "T") -> "DiscPoint":
        return cls("gauss_signed", prime, as_field_element(alpha), Fraction(r_log), sign, chart)

    @classmethod
    def x_minus(cls, prime: int, chart: str = "T") -> "DiscPoint":
        """x_{0,1-}: the point just inside the unit circle."""
        return cls.gauss_signed(prime, 0, 0, -1, chart)

    @classmethod
    def x_plus(cls, prime: int, chart: str = "T") -> "DiscPoint":
        """x_{0,1+}: the point just outside the unit circle."""
        return cls.gauss_signed(prime, 0, 0, 1, chart)

    @property
    def rank(self) -> int:
        return 2 if self.kind == "gauss_signed" else 1

    def radius(self, eps_scale: Fraction = Fraction(1)) -> ValueGroupElement:
        if self.kind == "gauss":
            return ValueGroupElement((self.r_log,))
        if self.kind == "gauss_signed":
            return ValueGroupElement((self.r_log, self.sign * Fraction(eps_scale)))
        raise PreconditionError(f"{self.kind} point has no radius")

    def __str__(self) -> str:
        a = render_fraction(self.alpha.value)
        if self.kind == "classical":
            return f"x[{a}]"
        if self.kind == "gauss":
            return f"x[{a},g^({render_fraction(self.r_log)})]"
        if self.kind == "gauss_signed":
            s = "-" if self.sign < 0 else "+"
            return f"x[{a},g^({render_fraction(self.r_log)}){s}]"
        return f"x[{self.kind}]"


def _in_chart(x: DiscPoint, f: SeriesElement) -> SeriesElement:
    if f.prime != x.prime:
        raise PreconditionError(f"point over p={x.prime} cannot evaluate a series over p={f.prime}")
    used = f.support_variables()
    if any(v != x.chart for v in used):
        raise PreconditionError(
            f"series in {f.variables} does not live in chart {x.chart!r}"
        )
    if f.variables == (x.chart,):
        return f
    return f.with_variables((x.chart,) if used else ())


def _unnormalise(v: ValueGroupElement, scale: Fraction) -> ValueGroupElement:
    if v.logvec is None or len(v.logvec) < 2:
        return v
    return ValueGroupElement((v.logvec[0], v.logvec[1] / scale) + v.logvec[2:])


def pt_eval(x: DiscPoint, f: SeriesElement, eps_scale=None) -> ValueGroupElement:
    """|f(x)| in the value group of x.

    For signed points ``eps_scale`` picks the infinitesimal as eps2 = g2^scale.
    The result is expressed in units of eps2, so it does not depend on the
    choice; :func:`pt_eval_raw` shows the unnormalised value.
    """
    if eps_scale is None:
        return pt_eval_raw(x, f)
    scale = Fraction(eps_scale)
    return _unnormalise(pt_eval_raw(x, f, scale), scale)


def pt_eval_raw(x: DiscPoint, f: SeriesElement, eps_scale: Fraction = Fraction(1)) -> ValueGroupElement:
    if Fraction(eps_scale) <= 0:
        raise PreconditionError("eps scale must be positive")
    g = _in_chart(x, f)
    if x.kind == "classical":
        return _classical_abs(x, g)
    if x.kind in ("gauss", "gauss_signed"):
        return se_gauss_eval(g, x.alpha, x.radius(eps_scale))
    if x.kind == "trivial":
        return ValueGroupElement.zero() if g.is_zero() else ValueGroupElement.identity(1)
    if x.kind == "residue_trivial":
        if not g.is_integral():
            raise PreconditionError("residue valuation is only defined on integral series")
        if g.tail is not None or g.is_truncated:
            raise CatalogError("residue valuation of an infinite series")
        nonzero = any(vp(c, g.prime) == 0 for _, c in g.items())
        return ValueGroupElement.identity(1) if nonzero else ValueGroupElement.zero()
    raise PreconditionError("irrational Gauss radii are not representable")


def _classical_abs(x: DiscPoint, g: SeriesElement) -> ValueGroupElement:
    alpha = x.alpha
    if not alpha.is_rational():
        raise CatalogError("classical points at formal pi-powers are not supported")
    if g.variables and g.min_exponents()[0] < 0 and alpha.value == 0:
        raise PreconditionError("Laurent series has a pole at the classical point 0")
    p = g.prime
    if g.N is None:
        return se_classical_abs(g, alpha, 1)
    # finite p-adic precision: known only up to p^N (times |alpha|^(D+1) beyond D)
    if g.tail is not None:
        return se_classical_abs(g, alpha, 1)
    la = Fraction(0) if alpha.value == 0 else Fraction(-vp(alpha.value, p))
    if la > 0:
        raise UndecidableAtPrecision("classical point outside the unit disc at finite precision")
    total = g.evaluate({g.variables[0]: alpha.value}) if g.variables else g.constant_term()
    bound = Fraction(-g.N)
    if total != 0 and -vp(total, p) > bound:
        return ValueGroupElement((Fraction(-vp(total, p)),))
    if total == 0 or -vp(total, p) <= bound:
        return ValueGroupElement.zero(g.N)
    raise UndecidableAtPrecision("classical value hidden below the precision")


# ---------------------------------------------------------------------------
# support


@dataclass(frozen=True)
class SupportIdeal:
    kind: str  # "zero" | "principal" | "maximal"
    generators: Tuple[SeriesElement, ...] = ()

    def __str__(self) -> str:
        if self.kind == "zero":
            return "(0)"
        return "(" + ", ".join(str(g) for g in self.generators) + ")"


def pt_support(x: DiscPoint, chart: Optional[str] = None) -> SupportIdeal:
    chart = chart or x.chart
    if chart != x.chart:
        raise PreconditionError(f"point lives in chart {x.chart!r}, not {chart!r}")
    if x.kind == "classical":
        if not x.alpha.is_rational():
            raise CatalogError("support of a classical point at a formal pi-power")
        gen = SeriesElement(x.prime, (chart,), {(1,): 1, (0,): -x.alpha.value})
        return SupportIdeal("principal", (gen,))
    if x.kind == "residue_trivial":
        return SupportIdeal("principal", (SeriesElement.constant(x.prime, x.prime, (chart,)),))
    return SupportIdeal("zero")


# ---------------------------------------------------------------------------
# continuity


@dataclass(frozen=True)
class PairOfDefinition:
    """Generators of a ring of definition A_0 (over the integral scalars) and of I."""

    ideal_generators: Tuple[SeriesElement, ...]
    ring_generators: Tuple[SeriesElement, ...] = ()
    label: str = ""

    def squared(self) -> "PairOfDefinition":
        gens = self.ideal_generators
        prods = tuple(a * b for i, a in enumerate(gens) for b in gens[i:])
        return PairOfDefinition(prods, self.ring_generators, f"{self.label}^2")


def unit_ball_pod(prime: int, chart: str = "T") -> PairOfDefinition:
    """(k°<T>, (p)): ring generated over Z_p by T, ideal of definition (p)."""
    return PairOfDefinition(
        (SeriesElement.constant(prime, prime, (chart,)),),
        (SeriesElement.variable(prime, chart),),
        "Zp<T>,(p)",
    )


def _first_nonzero(vec: Sequence[Fraction]) -> Optional[int]:
    for k, c in enumerate(vec):
        if c != 0:
            return k
    return None


def continuity_condition(beta: ValueGroupElement, alphas: Sequence[ValueGroupElement]) -> bool:
    """|b * prod a_j^{e_j}| < 1 for every exponent vector e >= 0.

    With logvecs this asks beta + sum e_j alpha_j < 0 for all e.  Negative and
    zero alpha_j can only help; the positive ones with the earliest leading
    index J control the rest, and beta + n*alpha < 0 for all n holds exactly
    when beta leads before J with a negative entry.
    """
    if beta.is_zero:
        return True
    if beta.logvec >= tuple(Fraction(0) for _ in beta.logvec):
        return False
    positive = [a for a in alphas if not a.is_zero and _first_nonzero(a.logvec) is not None
                and a.logvec[_first_nonzero(a.logvec)] > 0]
    if not positive:
        return True
    J = min(_first_nonzero(a.logvec) for a in positive)
    return _first_nonzero(beta.logvec) < J


def pt_is_continuous(x: DiscPoint, pod: PairOfDefinition) -> bool:
    """|b(x)| cofinal for b in I and |a(x)| < 1 for all a in I*A_0."""
    if not pod.ideal_generators:
        raise PreconditionError("pair of definition has no ideal generators")
    betas = [pt_eval(x, b) for b in pod.ideal_generators]
    for v in betas:
        if not v.is_zero and not vg_is_cofinal(v):
            return False
    alphas = [pt_eval(x, a) for a in pod.ring_generators]
    return all(continuity_condition(b, alphas) for b in betas)


# ---------------------------------------------------------------------------
# equivalence and classification


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    structural: bool
    distinguishing_probe: Optional[Tuple[int, int]] = None


def _same_disc(x: DiscPoint, y: DiscPoint) -> bool:
    if x.alpha == y.alpha:
        return True
    d = x.alpha.value - y.alpha.value
    if not (x.alpha.is_rational() and y.alpha.is_rational()):
        return False
    dist = ValueGroupElement((Fraction(-vp(d, x.prime)),)).embed(x.rank)
    return vg_cmp(dist, x.radius()) is not Ordering.GT


def _structurally_equal(x: DiscPoint, y: DiscPoint) -> bool:
    if x.kind != y.kind or x.prime != y.prime:
        return False
    if x.kind in ("classical",):
        return x.alpha == y.alpha
    if x.kind in ("gauss", "gauss_signed"):
        return x.r_log == y.r_log and x.sign == y.sign and _same_disc(x, y)
    return True


def pt_equivalence_report(
    x: DiscPoint,
    y: DiscPoint,
    probe: Sequence[SeriesElement],
    eps_scales: Tuple[Fraction, Fraction] = (Fraction(1), Fraction(1)),
) -> EquivalenceReport:
    if x.chart != y.chart:
        raise PreconditionError(f"chart mismatch {x.chart!r} vs {y.chart!r}")
    structural = _structurally_equal(x, y)
    sx, sy = eps_scales
    vx = [pt_eval_raw(x, f, sx) for f in probe]
    vy = [pt_eval_raw(y, f, sy) for f in probe]
    one_x = ValueGroupElement.identity(x.rank)
    one_y = ValueGroupElement.identity(y.rank)
    # equivalent valuations induce the same order on values, including against 1
    for i in range(len(probe)):
        if vg_cmp(vx[i], one_x) != vg_cmp(vy[i], one_y):
            return EquivalenceReport(False, structural, (i, -1))
        for j in range(i + 1, len(probe)):
            if vg_cmp(vx[i], vx[j]) != vg_cmp(vy[i], vy[j]):
                return EquivalenceReport(False, structural, (i, j))
    return EquivalenceReport(structural, structural)


def pt_equivalent(x: DiscPoint, y: DiscPoint, probe: Sequence[SeriesElement] = ()) -> bool:
    return pt_equivalence_report(x, y, probe).equivalent


def pt_classify(x: DiscPoint) -> str:
    return {
        "classical": "classical",
        "gauss": "gauss-rational-radius",
        "gauss_signed": "rank2-signed",
        "gauss_irrational": "gauss-irrational-radius-unsupported",
        "trivial": "trivial-valuation",
        "residue_trivial": "residue-trivial",
    }[x.kind]


def point_from_json(obj: dict, prime: int, chart: str = "T") -> DiscPoint:
    """``{"kind": "gauss_signed", "alpha": "0", "r_log": "0", "sign": "-"}``."""
    if "point" in obj:
        obj = obj["point"]
    kind = obj.get("kind")
    chart = obj.get("chart", chart)
    alpha = Fraction(str(obj.get("alpha", "0")))
    if kind == "classical":
        return DiscPoint.classical(prime, alpha, chart)
    if kind == "gauss":
        r = str(obj.get("r_log", "0"))
        try:
            r_log = Fraction(r)
        except ValueError:
            return DiscPoint("gauss_irrational", prime, alpha, chart=chart)
        return DiscPoint.gauss(prime, alpha, r_log, chart)
    if kind == "gauss_signed":
        sign = {"-": -1, "minus": -1, "+": 1, "plus": 1}.get(str(obj.get("sign")))
        if sign is None:
            raise PreconditionError(f"sign must be '-' or '+', got {obj.get('sign')!r}")
        return DiscPoint.gauss_signed(prime, alpha, Fraction(str(obj.get("r_log", "0"))), sign, chart)
    if kind in ("trivial", "residue_trivial"):
        return DiscPoint(kind, prime, chart=chart)
    raise PreconditionError(f"unknown point kind {kind!r}")


# ---------------------------------------------------------------------------
# affinoid fields


@dataclass(frozen=True)
class AffinoidFieldCount:
    count: int
    chain: Tuple[str, ...]


def convex_subgroups(rank: int) -> List[Tuple[int, ...]]:
    """Convex subgroups of lexicographic Q^rank, as sets of basis indices.

    Brute force over all subsets S of basis vectors: span(S) is convex iff no
    basis vector outside S lies strictly between 0 and one inside it.
    """
    basis = [
        ValueGroupElement(tuple(Fraction(1 if k == j else 0) for k in range(rank)))
        for j in range(rank)
    ]
    zero = ValueGroupElement.identity(rank)
    found = []
    for mask in range(1 << rank):
        S = [j for j in range(rank) if mask >> j & 1]
        convex = True
        for i in S:
            for j in range(rank):
                if j in S:
                    continue
                if vg_cmp(zero, basis[j]) is Ordering.LT and vg_cmp(basis[j], basis[i]) is Ordering.LT:
                    convex = False
        if convex:
            found.append(tuple(S))
    return sorted(found, key=len, reverse=True)


def spa_affinoid_field_count(rank: int, discrete: bool) -> AffinoidFieldCount:
    """Points of Spa(k, k+) for a rank-``rank`` valuation ring k+.

    Points are valuation rings between k+ and k; continuity rules out k itself
    unless k is discrete.  They correspond to convex subgroups D of the value
    group (the point has value group Gamma/D); |pi| must survive in Gamma/D in
    the analytic case.
    """
    if rank < 0:
        raise PreconditionError("rank must be non-negative")
    if rank == 0 and not discrete:
        raise PreconditionError("an analytic affinoid field needs rank >= 1")
    if rank == 0:
        return AffinoidFieldCount(1, ("R_0 = k (trivial valuation)",))
    chain = []
    for S in convex_subgroups(rank):
        height = rank - len(S)
        if 0 in S and not discrete:
            continue  # |pi| dies: trivial valuation, not continuous on a Tate field
        if height == 0:
            label = f"R_0 = k: Delta = Q^{rank}, trivial valuation"
        elif height == rank:
            label = f"R_{height} = k+: Delta = 0, rank {height}"
        else:
            label = f"R_{height}: Delta = 0^{height} x Q^{rank - height}, rank {height}"
        chain.append((height, label))
    chain.sort(reverse=True)
    return AffinoidFieldCount(len(chain), tuple(lbl for _, lbl in chain))


def spa_count_closed_form(rank: int, discrete: bool) -> int:
    return rank + 1 if discrete else rank
