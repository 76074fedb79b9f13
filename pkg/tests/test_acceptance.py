"""The ten acceptance criteria, one check each.

Every check prints a single ``criterion k: PASS|FAIL  <title>`` line (shown
even without ``-s``) and then asserts.  Tolerances are exact throughout; the
only numeric threshold is the one-second budget of criterion 4.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction
from typing import Callable, Dict, Tuple

import pytest
import sympy

from adickit.basefield import vp
from adickit.point import (
    DiscPoint,
    PairOfDefinition,
    pt_eval,
    pt_is_continuous,
    spa_affinoid_field_count,
    unit_ball_pod,
)
from adickit.presentation import (
    make,
    p1_family,
    pres_analytify,
    pres_complete,
    pres_equal,
    pres_fiber_product,
    pres_generic_fiber,
    pres_glue_sections,
    pres_localize,
    pres_quotient,
    pres_special_fiber,
    witness_p_inverse,
)
from adickit.series import (
    SeriesElement,
    WeightDescriptor,
    geometric,
    se_gauss_eval,
    se_in_weighted,
    supergeometric,
)
from adickit.sheafcheck import (
    INF,
    catalog_presentation,
    lattice_model,
    localised_models,
    sc_buzver_witness,
    sc_simple_laurent,
    verify_kernel_witness,
)
from adickit.subset import RationalSubset, analytic_locus, rs_member
from adickit.valgroup import ValueGroupElement as V
from adickit.valgroup import power_search_cofinal, vg_is_cofinal
from test_series import gauss_oracle

P = 5
PRECISION = (8, 32)
TIME_BUDGET_S = 1.0
CASES = 1000
T = SeriesElement.variable(P, "T")
PC = SeriesElement.constant(P, P, ("T",))
XM = DiscPoint.x_minus(P)
XP = DiscPoint.x_plus(P)

CRITERIA: Dict[int, Tuple[str, Callable[[], None]]] = {}


def criterion(number: int, title: str):
    def register(fn):
        CRITERIA[number] = (title, fn)
        return fn

    return register


def poly(coeffs) -> SeriesElement:
    return SeriesElement(P, ("T",), {(i,): Fraction(c) for i, c in enumerate(coeffs)})


def random_fraction(rng: random.Random, num: int, den: int) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_poly(rng: random.Random, max_len: int = 6, num: int = 60, den: int = 10) -> SeriesElement:
    return poly([random_fraction(rng, num, den) for _ in range(rng.randint(1, max_len))])


def lex_key(v: V):
    # zero is below everything; otherwise compare coordinates left to right
    return (0,) if v.is_zero else (1,) + tuple(v.logvec)


# ---------------------------------------------------------------------------


def chains_by_enumeration(rank: int, discrete: bool) -> int:
    """Count convex subgroups of lex Q^rank by checking convexity on a grid.

    A subgroup spanned by basis indices S is convex iff every grid element g
    with 0 <= g <= h for some h in the subgroup lies in it as well.  The
    analytic case drops subgroups containing the value of p.
    """
    grid = list(itertools.product((-1, 0, 1), repeat=rank))
    zero = (0,) * rank
    count = 0
    for mask in range(1 << rank):
        S = {j for j in range(rank) if mask >> j & 1}
        inside = lambda g: all(g[k] == 0 for k in range(rank) if k not in S)
        convex = all(
            inside(g) for h in grid if inside(h) for g in grid if zero <= g <= h
        )
        if not convex:
            continue
        p_value = (-1,) + (0,) * (rank - 1)
        if not discrete and inside(p_value):
            continue
        count += 1
    return count


@criterion(1, "affinoid-field point counts")
def check_point_counts():
    assert spa_affinoid_field_count(1, discrete=False).count == 1  # Qp model
    assert spa_affinoid_field_count(1, discrete=True).count == 2  # Zp model
    for n in range(1, 5):
        analytic = spa_affinoid_field_count(n, discrete=False).count
        discrete = spa_affinoid_field_count(n, discrete=True).count
        assert analytic == n == chains_by_enumeration(n, False)
        assert discrete == n + 1 == chains_by_enumeration(n, True)


@criterion(2, "x_{0,1-} suite")
def check_x_minus():
    assert pt_is_continuous(XM, unit_ball_pod(P))
    assert rs_member(XM, RationalSubset.whole(P))
    assert not rs_member(XM, RationalSubset.circle(P))
    for m in range(1, 21):
        assert not rs_member(XM, RationalSubset.disc(P, Fraction(-1, m)))
    rng = random.Random(2)
    scales = [Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(2), Fraction(5, 7)]
    for _ in range(50):
        f = random_poly(rng, max_len=8)
        values = {pt_eval(XM, f, s) for s in scales}
        assert len(values) == 1


@criterion(3, "x_{0,1+} suite")
def check_x_plus():
    assert pt_eval(XP, T) > V.identity(2)
    assert pt_is_continuous(XP, unit_ball_pod(P))
    rng = random.Random(3)
    for _ in range(30):
        # |a_0| <= 1 and |a_i| < 1 for i >= 1
        a0 = Fraction(rng.randint(-50, 50), rng.choice([1, 2, 3, 4]))
        tail = [P * Fraction(rng.randint(-50, 50), rng.choice([1, 2, 3])) for _ in range(rng.randint(0, 6))]
        a = poly([a0] + tail)
        value = pt_eval(XP, a)
        # the value of a_i T^i at x_{0,1+} is (-v(a_i), i); take the lex max by hand
        terms = [(-vp(c, P), i) for i, c in enumerate([a0] + tail) if c != 0]
        expected = max(terms) if terms else None
        assert (value.is_zero and expected is None) or tuple(value.logvec) == expected
        assert value <= V.identity(2)


@criterion(4, "non-sheafy counterexample")
def check_not_sheafy():
    A = catalog_presentation("not_sheafy", P)
    sc_simple_laurent(A, "T", PRECISION)  # warm-up
    start = time.perf_counter()
    rows = sc_buzver_witness(16)
    report = sc_simple_laurent(A, "T", PRECISION)
    elapsed = time.perf_counter() - start
    assert [r.n for r in rows] == list(range(17))
    assert all(r.ok for r in rows)
    assert all(r.in_A0_T and r.in_A0_Tinv and r.not_in_pnA0 for r in rows)
    assert report.injective is False
    assert report.kernel_witness == "Z"
    assert report.witness_verified
    # independent restriction: Z has exponent -inf on both closed halves
    L = localised_models(lattice_model(A), Fraction(1), 1, P, PRECISION[1])
    assert L.minus("Z", 0) == L.plus("Z", 0) == -INF
    assert verify_kernel_witness(lattice_model(A), ("Z", 0), Fraction(1), 1, P, PRECISION[0])
    assert elapsed < TIME_BUDGET_S, f"{elapsed:.3f}s"


@criterion(5, "Tate acyclicity evidence")
def check_tate_acyclicity():
    N, D = PRECISION
    report = sc_simple_laurent(make(P, "Qp<T>"), "T", PRECISION)
    assert report.exact
    # rebuild the two maps on monomials by hand: W = {n >= 0}, W- = W, W+ = overlap = all n
    W = list(range(0, D + 1))
    circle = list(range(-D, D + 1))
    rows = [("-", n) for n in W] + [("+", n) for n in circle]
    eps = sympy.Matrix(len(rows), len(W), lambda r, c: int(rows[r][1] == W[c]))
    delta = sympy.Matrix(
        len(circle), len(rows),
        lambda r, c: (1 if rows[c][0] == "-" else -1) * int(rows[c][1] == circle[r]),
    )
    assert (delta * eps).is_zero_matrix
    r_eps, r_delta = eps.rank(), delta.rank()
    assert report.ranks["rank_eps"] == r_eps == len(W)
    assert report.ranks["rank_delta"] == r_delta == len(circle)
    assert len(rows) - r_delta == r_eps
    # integrally: both images are saturated lattices mod p^N
    assert report.lengths["eps_image"] == report.lengths["W"] == N * len(W)
    assert report.lengths["delta_image"] == report.lengths["overlap"] == N * len(circle)


@criterion(6, "presentation normal forms")
def check_normal_forms():
    A = make(P, "Zp[[T]]")
    for n in range(1, 6):
        U = RationalSubset.of([T ** n], PC)
        B = pres_complete(pres_localize(A, U), PRECISION)
        ring_of_definition = make(P, B.render_ring_of_definition())
        assert pres_equal(ring_of_definition, make(P, f"Zp<T,S>/(p*S - T^{n})"), PRECISION)
        assert pres_equal(B, make(P, f"Qp<T,S>/(p*S - T^{n})"), PRECISION)
    (gf,) = pres_generic_fiber(make(P, "Zp<T>")).pieces
    assert pres_equal(gf, make(P, "Qp<T>"), PRECISION)
    assert gf.plus_ring == "Zp<T>"
    sf_poly = pres_special_fiber(make(P, "Zp[T]"))
    sf_series = pres_special_fiber(make(P, "Zp[[T]]"))
    assert pres_equal(sf_poly, make(P, "Fp[T]"), PRECISION) and sf_poly.topology == "discrete"
    assert pres_equal(sf_series, make(P, "Fp[[T]]"), PRECISION)
    k = make(P, "Qp")
    prod = pres_fiber_product(make(P, "Qp<T>"), make(P, "Qp<S>"), k)
    assert pres_equal(prod, make(P, "Qp<T,S>"), PRECISION)


@criterion(7, "global sections")
def check_global_sections():
    sections = pres_glue_sections(p1_family(P), PRECISION)
    assert sections.kind == "constants"
    assert sections.dimension == 1
    line = pres_analytify(make(P, "Qp[T]", normalize=False))
    entire = pres_glue_sections(line, PRECISION).predicate
    assert entire(supergeometric(P))
    assert not entire(geometric(P, "T", 1, 1, 0))


@criterion(8, "weighted algebra")
def check_weighted():
    B = pres_quotient(make(P, "Zp<p*T>"), "p*T - 1")
    assert B.p_inverted
    e = witness_p_inverse(B)
    residue = PC.with_variables(e.variables) * e - SeriesElement.constant(P, 1, e.variables)
    for N in range(1, 13):
        assert residue.is_zero() or all(vp(c, P) >= N for _, c in residue.items())
    assert not se_in_weighted(geometric(P, "T", 1, 1, 0), WeightDescriptor.singleton(P))


@criterion(9, "property suites")
def check_property_suites():
    rng = random.Random(9)
    kinds = ["classical", "gauss", "gauss_signed", "trivial", "residue_trivial"]
    # valuation axioms over every point variant
    for _ in range(CASES):
        kind = rng.choice(kinds)
        alpha = random_fraction(rng, 30, 6)
        r = Fraction(rng.randint(-6, 2), 2)
        if kind == "classical":
            x = DiscPoint.classical(P, alpha)
        elif kind == "gauss":
            x = DiscPoint.gauss(P, alpha, r)
        elif kind == "gauss_signed":
            x = DiscPoint.gauss_signed(P, alpha, r, rng.choice([-1, 1]))
        else:
            x = DiscPoint(kind, P)
        if kind == "residue_trivial":
            f, g = (poly([rng.randint(-60, 60) for _ in range(rng.randint(1, 6))]) for _ in range(2))
        else:
            f, g = random_poly(rng), random_poly(rng)
        a, b, s = pt_eval(x, f), pt_eval(x, g), pt_eval(x, f + g)
        assert pt_eval(x, f * g) == a * b
        assert s <= max(a, b)
        if a != b:
            assert s == max(a, b)
    # lexicographic order: totality against a key oracle, and cofinality
    for _ in range(CASES):
        rank = rng.randint(1, 3)
        a, b = (V(tuple(random_fraction(rng, 12, 4) for _ in range(rank))) for _ in range(2))
        assert (a < b) + (a == b) + (a > b) == 1
        assert (a < b) == (lex_key(a) < lex_key(b))
        assert vg_is_cofinal(a) == power_search_cofinal(a, 10**6)
    # Gauss evaluation against max over Taylor coefficients
    for _ in range(CASES):
        coeffs = [random_fraction(rng, 60, 30) for _ in range(rng.randint(1, 7))]
        alpha = random_fraction(rng, 20, 5)
        if rng.random() < 0.5:
            log_r = (Fraction(rng.randint(-6, 3), 3),)
        else:
            log_r = (Fraction(rng.randint(-4, 1), 2), Fraction(rng.randint(-2, 2)))
        assert se_gauss_eval(poly(coeffs), alpha, V(log_r)) == gauss_oracle(coeffs, alpha, log_r, P)
    # Taylor shift round trip
    for _ in range(CASES):
        f = random_poly(rng, max_len=33, num=50, den=10)
        alpha = random_fraction(rng, 30, 7)
        assert f.taylor_shift(alpha).taylor_shift(-alpha) == f


@criterion(10, "analytic locus")
def check_analytic_locus():
    U, W = analytic_locus((PC, T))
    assert U.numerators == W.numerators == (PC, T)
    assert (U.denominator, W.denominator) == (PC, T)
    fam = pres_generic_fiber(make(P, "Zp[[T]]"), n_max=8)
    assert len(fam.pieces) == 8
    pod = PairOfDefinition((PC, T), (T,))
    samples = [DiscPoint.classical(P, Fraction(P * k)) for k in range(-40, 41)]
    samples += [DiscPoint.gauss(P, 0, Fraction(r, 8)) for r in range(-24, 0)]
    samples += [DiscPoint.gauss_signed(P, 0, Fraction(r, 8), s) for r in range(-24, 0) for s in (-1, 1)]
    checked = 0
    for x in samples:
        # the truncated family covers |T| <= p^(-1/8)
        if not pt_eval(x, T) <= V.of(Fraction(-1, 8)).embed(x.rank):
            continue
        assert pt_is_continuous(x, pod)
        assert any(rs_member(x, RationalSubset.of([T ** n], PC)) for n in range(1, 9))
        checked += 1
    assert checked == len(samples) - 1  # only x_{0,p^(-1/8)+} lies outside


# ---------------------------------------------------------------------------


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    title, check = CRITERIA[number]
    failure = None
    try:
        check()
    except AssertionError as exc:
        failure = exc
    with capsys.disabled():
        status = "PASS" if failure is None else "FAIL"
        print(f"\ncriterion {number}: {status}  {title}")
    if failure is not None:
        raise failure
