"""Finite-precision checks of the Cech sequence for simple Laurent coverings.

The rings handled here are *monomial lattice models*: A is spanned over Qp by
monomials T^n * Z^s (s in a fixed shape list) and the ring of definition is

    A_0 = completed sum of p^e(m) Zp * m,

for an exponent function e with values in Z, +inf (m not in A) or -inf
(Qp*m already lies in A_0).  Localising along t = c*T^j keeps this shape:
A_0[t] has e_-(m) = min_k e(m / T^(jk)) + k v(c), and after completion the
directions with e = -inf die (they are infinitely p-divisible).

On the window |n| <= D every map in

    0 -> O(W) -> O(W-) + O(W+) -> O(W- n W+) -> 0

is a 0/1 matrix on monomials; ranks over Q decide exactness and Smith forms
over Z/p^N measure the integral structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .basefield import vp
from .errors import CatalogError, PreconditionError
from .linalg import image_length, nullspace, rank
from .presentation import HuberPresentation, Var, make, normal_form
from .series import SeriesElement

INF = math.inf
Mono = Tuple[str, int]  # (shape, T-exponent)


@dataclass(frozen=True)
class LatticeModel:
    name: str
    shapes: Tuple[str, ...]
    e: Callable[[str, int], float]

    def exponent(self, m: Mono) -> float:
        return self.e(*m)


def _tate_disc(weight: Fraction) -> Callable[[str, int], float]:
    def e(shape: str, n: int) -> float:
        return math.ceil(weight * n) if n >= 0 else INF

    return e


def _annulus(shape: str, n: int) -> float:
    return 0


def _not_sheafy(shape: str, n: int) -> float:
    # A_0 spanned by p^|n| T^n and p^-|n| T^n Z
    return abs(n) if shape == "" else -abs(n)


def catalog_presentation(name: str, prime: int) -> HuberPresentation:
    if name == "not_sheafy":
        T = Var("T", "laurent")
        Zv = Var("Z", "poly")
        Zsq = SeriesElement(prime, ("T", "Z"), {(0, 2): 1})
        P = HuberPresentation(
            prime, "Zp", (T, Zv), (Zsq,), True, (SeriesElement.constant(prime, prime, ("T", "Z")),),
            "tate", plus_ring="A_0 = span(p^|n| T^n, p^-|n| T^n Z)", label="not_sheafy",
            completed=False,
        )
        return normal_form(P)
    return make(prime, name)


def lattice_model(P: HuberPresentation) -> LatticeModel:
    """Monomial lattice model of a catalog presentation."""
    if P.label == "not_sheafy":
        return LatticeModel("not_sheafy", ("", "Z"), _not_sheafy)
    if not P.p_inverted or P.relations or P.inverted or len(P.variables) != 1:
        raise CatalogError(
            f"{P.render_ring()} is outside the sheaf-check catalog "
            "(one-variable Qp discs, weighted discs, annuli, not_sheafy)"
        )
    (v,) = P.variables
    if v.kind == "restricted":
        return LatticeModel(P.render_ring(), ("",), _tate_disc(v.weight))
    if v.kind == "laurent":
        return LatticeModel(P.render_ring(), ("",), _annulus)
    raise CatalogError(f"variable kind {v.kind} is outside the sheaf-check catalog")


def _monomial_t(P: HuberPresentation, t: SeriesElement) -> Tuple[Fraction, int]:
    t = P.element(t)
    items = list(t.items())
    if len(items) != 1:
        raise CatalogError(f"t = {t} must be a single monomial c*T^j")
    exp, c = items[0]
    k = P.var_names.index("T") if "T" in P.var_names else 0
    if any(e for i, e in enumerate(exp) if i != k):
        raise CatalogError(f"t = {t} must be a monomial in T only")
    return c, exp[k]


def _localise(model: LatticeModel, j: int, vc: int, sign: int, K: int) -> Callable[[str, int], float]:
    """Exponent function of A_0[t^sign] (sign=+1) or A_0[t, 1/t] (sign=0)."""

    def e(shape: str, n: int) -> float:
        ks = range(-K, K + 1) if sign == 0 else range(0, K + 1)
        vals = []
        for k in ks:
            step = k if sign == 0 else sign * k
            vals.append(model.e(shape, n - j * step) + step * vc)
        best = min(vals)
        if best == INF:
            return INF
        # a strictly decreasing run at an end of the range means the minimum is unbounded
        if len(vals) >= 2 and (vals[-1] < vals[-2] or (sign == 0 and vals[0] < vals[1])):
            return -INF
        return best

    return e


@dataclass
class ExactnessReport:
    covering: str
    precision: Tuple[int, int]
    injective: bool
    middle_exact: bool
    surjective: bool
    kernel_witness: Optional[str] = None
    witness_verified: Optional[bool] = None
    defect_witness: Optional[str] = None
    ranks: Dict[str, int] = field(default_factory=dict)
    lengths: Dict[str, int] = field(default_factory=dict)
    degenerate: bool = False

    @property
    def exact(self) -> bool:
        return self.injective and self.middle_exact and self.surjective

    @property
    def verdict(self) -> str:
        if self.kernel_witness is not None and self.witness_verified:
            return "not sheafy: definitive kernel witness"
        N, D = self.precision
        if self.exact:
            return f"exactness evidence at ({N},{D})"
        return f"exactness fails at ({N},{D})"


def _render_mono(m: Mono, coeff: Fraction = Fraction(1)) -> str:
    shape, n = m
    parts = []
    if n:
        parts.append("T" if n == 1 else f"T^{n}")
    if shape:
        parts.append(shape)
    core = "*".join(parts) or "1"
    return core if coeff == 1 else f"{coeff}*{core}"


def _finite(x: float) -> bool:
    return x not in (INF, -INF)


@dataclass(frozen=True)
class LocalisedModels:
    A: Callable[[str, int], float]
    minus: Callable[[str, int], float]
    plus: Callable[[str, int], float]
    overlap: Callable[[str, int], float]
    window: Tuple[Mono, ...]


def localised_models(model: LatticeModel, c: Fraction, j: int, prime: int, D: int) -> LocalisedModels:
    vc = vp(c, prime)
    K = 2 * D + 4
    window = tuple((s, n) for s in model.shapes for n in range(-D, D + 1))
    return LocalisedModels(
        model.e,
        _localise(model, j, vc, +1, K),
        _localise(model, -j, -vc, +1, K),
        _localise(model, j, vc, 0, K),
        window,
    )


def sc_simple_laurent(P: HuberPresentation, t, precision=(8, 32)) -> ExactnessReport:
    N, D = precision
    model = lattice_model(P)
    c, j = _monomial_t(P, t)
    if c == 0:
        raise PreconditionError("t must be nonzero")
    L = localised_models(model, c, j, P.prime, D)
    eA, eM, eP, eO = ({m: e(*m) for m in L.window} for e in (L.A, L.minus, L.plus, L.overlap))
    bA, bM, bP, bO = ([m for m in L.window if _finite(e[m])] for e in (eA, eM, eP, eO))
    cols_eps = bA
    rows_eps = [("-", m) for m in bM] + [("+", m) for m in bP]
    side_e = {"-": eM, "+": eP}
    sign = {"-": 1, "+": -1}
    # every map is diagonal on monomials; entries are 0 off the diagonal
    col_of = {m: i for i, m in enumerate(cols_eps)}
    row_of = {m: i for i, m in enumerate(bO)}
    eps = [[Fraction(0)] * len(cols_eps) for _ in rows_eps]
    eps_int = [[0] * len(cols_eps) for _ in rows_eps]
    delta = [[Fraction(0)] * len(rows_eps) for _ in bO]
    delta_int = [[0] * len(rows_eps) for _ in bO]
    for r, (side, m) in enumerate(rows_eps):
        # epsilon: a -> (a|W-, a|W+)
        if m in col_of:
            eps[r][col_of[m]] = Fraction(1)
            eps_int[r][col_of[m]] = P.prime ** int(eA[m] - side_e[side][m])
        # delta: (a, b) -> a|overlap - b|overlap
        if m in row_of:
            delta[row_of[m]][r] = Fraction(sign[side])
            delta_int[row_of[m]][r] = sign[side] * P.prime ** int(side_e[side][m] - eO[m])
    r_eps = rank(eps) if eps and cols_eps else 0
    r_delta = rank(delta) if delta and rows_eps else 0
    injective = r_eps == len(cols_eps)
    ker_delta = len(rows_eps) - r_delta
    middle = ker_delta == r_eps
    surjective = r_delta == len(bO)
    report = ExactnessReport(
        covering=f"W- = {{|t| <= 1}}, W+ = {{|t| >= 1}}, t = {_render_mono(('', j), c)}",
        precision=(N, D),
        injective=injective,
        middle_exact=middle,
        surjective=surjective,
        ranks={
            "dim_W": len(bA), "dim_W-": len(bM), "dim_W+": len(bP), "dim_overlap": len(bO),
            "rank_eps": r_eps, "rank_delta": r_delta,
        },
        degenerate=(j == 0 and vp(c, P.prime) == 0),
    )
    if eps_int and cols_eps:
        report.lengths["eps_image"] = image_length(eps_int, P.prime, N)
        report.lengths["W"] = N * len(cols_eps)
    if delta_int and rows_eps:
        report.lengths["delta_image"] = image_length(delta_int, P.prime, N)
        report.lengths["overlap"] = N * len(bO)
    if not injective:
        kernel = nullspace(eps, len(cols_eps)) if eps else nullspace([], len(cols_eps))
        candidates = []
        for vec in kernel:
            support = [cols_eps[i] for i, x in enumerate(vec) if x != 0]
            candidates.append((max(abs(n) for _, n in support), len(support), support, vec))
        candidates.sort(key=lambda x: (x[0], x[1]))
        _, _, support, vec = candidates[0]
        if len(support) == 1:
            m = support[0]
            report.kernel_witness = _render_mono(m)
            report.witness_verified = verify_kernel_witness(model, m, c, j, P.prime, N)
        else:
            report.kernel_witness = " + ".join(
                _render_mono(cols_eps[i], x) for i, x in enumerate(vec) if x
            )
            report.witness_verified = False
    if not middle:
        report.defect_witness = f"dim ker delta = {ker_delta} but rank eps = {r_eps}"
    return report


def verify_kernel_witness(model: LatticeModel, m: Mono, c: Fraction, j: int, prime: int, N: int) -> bool:
    """Re-check a monomial kernel witness by explicit factorisations.

    m must be a nonzero element of A_0, and p^(-N) m must factor as a * t^k
    and as a' * t^-k' with a, a' in A_0, so that m vanishes in both completed
    localisations to precision N.
    """
    e_m = model.exponent(m)
    if not _finite(e_m) or e_m > 0:
        # m must be a nonzero element of A_0 itself
        return False
    vc = vp(c, prime)
    shape, n = m
    for sign in (+1, -1):
        ok = False
        for k in range(0, 4 * N + 4 * abs(n) + 8):
            # p^-N m = (p^-N c^(-sign k) m / T^(sign j k)) * t^(sign k)
            rest = (shape, n - sign * j * k)
            coeff_val = -N - sign * k * vc
            if coeff_val >= model.exponent(rest):
                ok = True
                break
        if not ok:
            return False
    return True


# ---------------------------------------------------------------------------
# the non-sheafy ring, by hand


@dataclass(frozen=True)
class BuzverRow:
    n: int
    in_A0_T: str
    in_A0_Tinv: str
    not_in_pnA0: str
    ok: bool


def _in_A0(p_exp: int, shape: str, n: int) -> bool:
    return p_exp >= _not_sheafy(shape, n)


def _mono_text(p_exp: int, t_exp: int, z: bool) -> str:
    parts = []
    if p_exp:
        parts.append("p" if p_exp == 1 else f"p^{p_exp}")
    if t_exp:
        parts.append("T" if t_exp == 1 else f"T^{t_exp}")
    if z:
        parts.append("Z")
    return "*".join(parts) or "1"


def sc_buzver_witness(n_max: int) -> List[BuzverRow]:
    """For n <= n_max: p^-n Z lies in A_0[T] and A_0[1/T] but Z is not in p^n A_0."""
    if n_max < 1:
        raise PreconditionError(f"n_max must be at least 1, got {n_max}")
    rows = []
    for n in range(0, n_max + 1):
        # (a) p^-n Z = (p^-n T^-n Z) * T^n with the first factor a generator of A_0
        a_ok = _in_A0(-n, "Z", -n)
        a = f"({_mono_text(-n, -n, True)})*{_mono_text(0, n, False)}"
        # (b) p^-n Z = (p^-n T^n Z) * T^-n
        b_ok = _in_A0(-n, "Z", n)
        b = f"({_mono_text(-n, n, True)})*{_mono_text(0, -n, False)}"
        if n == 0:
            rows.append(BuzverRow(0, "Z = p^0*T^0*Z in A_0", "Z in A_0", "n/a (n = 0)", a_ok and b_ok))
            continue
        # (c) Z = p^n (p^-n Z) and p^-n Z is in A_0 iff -n >= e(Z) = 0
        c_ok = not _in_A0(-n, "Z", 0)
        c = f"p^-{n}*Z not in A_0 since v = -{n} < e(Z) = 0"
        rows.append(BuzverRow(n, a, b, c, a_ok and b_ok and c_ok))
    return rows


# ---------------------------------------------------------------------------
# strictness


@dataclass(frozen=True)
class StrictnessReport:
    found: bool
    m: Optional[int]
    unbounded: Tuple[str, ...] = ()
    m_max: int = 32


def sc_stably_uniform_strictness(P: HuberPresentation, t, precision=(8, 32), m_max: int = 32) -> StrictnessReport:
    """Smallest m with p^m (A_-0 n A_+0) inside A_0 on the truncated model."""
    N, D = precision
    model = lattice_model(P)
    c, j = _monomial_t(P, t)
    L = localised_models(model, c, j, P.prime, D)
    needed = 0
    unbounded = []
    for m in L.window:
        eA = L.A(*m)
        if not _finite(eA):
            continue
        eS = max(L.minus(*m), L.plus(*m))
        if eS == -INF:
            unbounded.append(_render_mono(m))
            continue
        if eS == INF:
            continue
        needed = max(needed, int(eA - eS))
    if unbounded or needed > m_max:
        return StrictnessReport(False, None, tuple(unbounded), m_max)
    return StrictnessReport(True, needed, (), m_max)
