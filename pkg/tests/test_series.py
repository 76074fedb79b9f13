from __future__ import annotations

from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adickit.basefield import vp
from adickit.errors import CatalogError, ParseError, PreconditionError, UndecidableAtPrecision
from adickit.series import (
    SeriesElement,
    Tail,
    WeightDescriptor,
    geometric,
    parse_series,
    render_series,
    se_add,
    se_classical_abs,
    se_gauss_eval,
    se_in_open_disc_sections,
    se_in_open_unit_disc,
    se_in_restricted,
    se_in_weighted,
    se_is_entire,
    se_mul,
    series_from_json,
    supergeometric,
)
from adickit.valgroup import ValueGroupElement as V
from conftest import THOUSAND, rationals

P = 5
T = SeriesElement.variable(P, "T")
ONE = SeriesElement.constant(P, 1, ("T",))


def poly(coeffs, p=P):
    return SeriesElement(p, ("T",), {(i,): c for i, c in enumerate(coeffs)})


def gauss_oracle(coeffs, alpha: Fraction, log_r, p: int) -> V:
    """max_j |b_j| r^j with b_j = sum_i a_i C(i, j) alpha^(i-j), by direct enumeration."""
    best = None
    for j in range(len(coeffs)):
        b = sum((Fraction(coeffs[i]) * comb(i, j) * alpha ** (i - j) for i in range(j, len(coeffs))), Fraction(0))
        if b == 0:
            continue
        val = tuple(Fraction(-vp(b, p)) * (k == 0) + j * log_r[k] for k in range(len(log_r)))
        if best is None or val > best:
            best = val
    return V.zero() if best is None else V(best)


small_polys = st.lists(rationals(60, 30), min_size=1, max_size=7)
radii = st.one_of(
    st.builds(lambda a: (Fraction(a, 3),), st.integers(-6, 3)),
    st.builds(lambda a, b: (Fraction(a, 2), Fraction(b)), st.integers(-4, 1), st.integers(-2, 2)),
)


class TestArithmetic:
    def test_add(self):
        assert T + T * P == T * (1 + P)
        assert se_add(T, T * P).coefficient(1) == 1 + P

    def test_mul(self):
        assert se_mul(ONE + T, ONE - T) == ONE - T ** 2

    def test_telescoping_with_truncation(self):
        g = geometric(P, "T", 1, 1, 0).truncate(4)
        prod = se_mul(g, ONE - T * P)
        assert prod.equal_at(ONE, None, 4)
        assert prod.precision[1] == 4

    def test_geometric_times_polynomial_exact(self):
        # (sum p^i T^i) * (1 - pT) = 1 exactly, tail cancels
        assert se_mul(geometric(P, "T", 1, 1, 0), ONE - T * P) == ONE

    def test_variable_mismatch(self):
        S = SeriesElement.variable(P, "S")
        with pytest.raises(PreconditionError):
            se_add(T.with_variables(("T",)), S)

    def test_precision_is_minimum(self):
        a = poly([1, 2, 3]).reduce_mod(6)
        b = poly([1, 1]).reduce_mod(3)
        assert (a * b).precision[0] == 3


class TestGaussEval:
    def test_rank1_example(self):
        assert se_gauss_eval(parse_series("T^2 + p*T + p^3", P), 0, V.of(-1)) == V.of(-2)

    def test_constant(self):
        for alpha in (0, 3, Fraction(1, 2)):
            assert se_gauss_eval(ONE, alpha, V.of(0, -1)) == V.identity(2)

    def test_epsilon_radius(self):
        f = parse_series("p^3 + p*T + T^2", P)
        # max(|p^3|, |p| e, e^2) with e infinitesimally below 1
        assert se_gauss_eval(f, 0, V.of(0, -1)) == V.of(0, -2)

    def test_zero_radius_rejected(self):
        with pytest.raises(PreconditionError):
            se_gauss_eval(T, 0, V.zero())

    def test_zero_series(self):
        assert se_gauss_eval(SeriesElement.zero(P, ("T",)), 0, V.of(0)).is_zero

    def test_precision_zero_is_marked(self):
        f = poly([P ** 9, P ** 10]).reduce_mod(8)
        out = se_gauss_eval(f, 0, V.of(0))
        assert out.is_zero and out.is_approximate_zero

    def test_truncated_outside_unit_disc_undecidable(self):
        f = geometric(P, "T", 1, 1, 0).truncate(3).reduce_mod(8)
        with pytest.raises(UndecidableAtPrecision):
            se_gauss_eval(f, 0, V.of(1))

    def test_tail_dominated(self):
        # sum p^(i^2) T^i on the disc of radius p: max_i p^(i - i^2) = 1 at i = 0, 1
        assert se_gauss_eval(supergeometric(P), 0, V.of(1)) == V.of(0)

    def test_tail_not_dominated(self):
        with pytest.raises(UndecidableAtPrecision):
            se_gauss_eval(geometric(P, "T", 1, 0, 0), 0, V.of(1))

    @THOUSAND
    @given(small_polys, rationals(20, 5), radii)
    def test_against_bruteforce(self, coeffs, alpha, log_r):
        f = poly(coeffs)
        assert se_gauss_eval(f, alpha, V(log_r)) == gauss_oracle(coeffs, alpha, log_r, P)

    @THOUSAND
    @given(small_polys, small_polys, rationals(20, 5), radii)
    def test_valuation_axioms(self, a, b, alpha, log_r):
        f, g, r = poly(a), poly(b), V(log_r)
        ev = lambda h: se_gauss_eval(h, alpha, r)
        assert ev(f * g) == ev(f) * ev(g)
        s, x, y = ev(f + g), ev(f), ev(g)
        assert s <= max(x, y)
        if x != y:
            assert s == max(x, y)


class TestTaylorShift:
    @THOUSAND
    @given(st.lists(rationals(50, 10), min_size=1, max_size=33), rationals(30, 7))
    def test_round_trip(self, coeffs, alpha):
        f = poly(coeffs)
        assert f.taylor_shift(alpha).taylor_shift(-alpha) == f

    def test_binomial(self):
        assert (T ** 3).taylor_shift(1) == poly([1, 3, 3, 1])


class TestConvergence:
    def test_restricted(self):
        assert all(se_in_restricted(supergeometric(P), m) for m in range(-3, 12))
        assert not se_in_restricted(geometric(P, "T", 1, 0, 0), 1)
        assert all(se_in_restricted(poly([1, 2, 3]), m) for m in range(10))

    def test_entire(self):
        assert se_is_entire(supergeometric(P))
        assert not se_is_entire(geometric(P, "T", 1, 1, 0))
        assert se_is_entire(ONE)

    def test_entire_witness_m2(self):
        # sum p^i T^i leaves the disc of radius p^2
        assert not se_in_restricted(geometric(P, "T", 1, 1, 0), 2)

    def test_open_disc_sections(self):
        assert se_in_open_disc_sections(geometric(P, "T", 1, 0, 0), 1)
        assert not se_in_open_disc_sections(geometric(P, "T", 1, -1, 0), 2)
        assert se_in_open_disc_sections(SeriesElement.zero(P, ("T",)), 3)

    def test_open_unit_disc(self):
        assert se_in_open_unit_disc(geometric(P, "T", 1, 0, 0))
        assert not se_in_open_unit_disc(geometric(P, "T", 1, -1, 0))

    def test_weighted(self):
        M = WeightDescriptor.singleton(P)
        assert not se_in_weighted(geometric(P, "T", 1, 1, 0), M)
        assert se_in_weighted(geometric(P, "T", 1, 2, 0), M)
        assert se_in_weighted(ONE, M)

    def test_weighted_integral(self):
        M = WeightDescriptor.singleton(P)
        # p^(2i) = p^i * p^i lies in p^i Zp for every i
        assert se_in_weighted(geometric(P, "T", 1, 2, 0), M, integral=True)
        assert not se_in_weighted(geometric(P, "T", 1, 2, -1), M, integral=True)

    def test_truncated_input_rejected(self):
        with pytest.raises(CatalogError):
            se_in_restricted(geometric(P, "T", 1, 1, 0).truncate(4), 0)

    @given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 10))
    def test_entire_implies_each_disc(self, a, b, m):
        f = supergeometric(P, "T", 1, a) if a > 0 else geometric(P, "T", 1, a, b)
        if se_is_entire(f):
            assert se_in_restricted(f, m)

    @given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-6, 6), st.integers(-6, 6))
    def test_restricted_monotone(self, a, b, m, m2):
        f = geometric(P, "T", 1, a, b)
        lo, hi = sorted((m, m2))
        if se_in_restricted(f, hi):
            assert se_in_restricted(f, lo)


class TestParsing:
    def test_literal(self):
        f = parse_series("1 + 3*T + p^2*T^2", P)
        assert f == poly([1, 3, 25])

    def test_malformed_exponent(self):
        with pytest.raises(ParseError):
            parse_series("T^1.5", P)
        with pytest.raises(ParseError):
            parse_series("T^", P)

    def test_tail_json(self):
        f = series_from_json({"tail": {"kind": "supergeometric", "a": 1}}, P)
        assert f.tail == Tail("supergeometric", Fraction(1), Fraction(1), Fraction(0))
        assert f.coefficient(3) == Fraction(P) ** 9

    def test_variables_named_like_builtins(self):
        f = parse_series("S*T - 1", P, ("S", "T"))
        assert f.variables == ("S", "T")

    @given(st.lists(rationals(40, 9), min_size=1, max_size=6))
    def test_render_round_trip(self, coeffs):
        f = poly(coeffs)
        assert parse_series(render_series(f), P, ("T",)) == f


class TestClassical:
    def test_polynomial(self):
        assert se_classical_abs(T ** 2, P) == V.of(-2)

    def test_series(self):
        # sum T^i at T = p equals 1/(1 - p), a unit
        assert se_classical_abs(geometric(P, "T", 1, 0, 0), P) == V.of(0)
