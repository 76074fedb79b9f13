from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from adickit.basefield import vp
from adickit.errors import PreconditionError
from adickit.point import DiscPoint, PairOfDefinition, pt_eval, pt_is_continuous
from adickit.series import SeriesElement, parse_series
from adickit.valgroup import ValueGroupElement as V
from adickit.subset import (
    CoveringSpec,
    RationalSubset,
    analytic_locus,
    cov_pieces,
    cov_reduce_to_simple,
    cov_verify_on_samples,
    find_unit_certificate,
    generalized_rational_piece,
    rs_member,
    verify_unit_certificate,
)
from conftest import rationals

P = 5
T = SeriesElement.variable(P, "T")
ONE = SeriesElement.constant(P, 1, ("T",))
PC = SeriesElement.constant(P, P, ("T",))
XM = DiscPoint.x_minus(P)


def s(text):
    return parse_series(text, P, ("T",))


# points of the closed unit disc
disc_points = st.one_of(
    st.builds(lambda a: DiscPoint.classical(P, a), rationals(40, 7).filter(lambda a: a == 0 or vp(a, P) >= 0)),
    st.builds(
        lambda a, r: DiscPoint.gauss(P, a, Fraction(r, 3)),
        st.integers(-12, 12), st.integers(-9, 0),
    ),
    st.builds(
        lambda a, r, sg: DiscPoint.gauss_signed(P, a, Fraction(r, 2), sg),
        st.integers(-12, 12), st.integers(-6, -1), st.sampled_from([-1, 1]),
    ),
    st.just(XM),
)


class TestMembership:
    def test_x_minus_misses_circle(self):
        assert not rs_member(XM, RationalSubset.circle(P))

    def test_x_minus_misses_small_discs(self):
        assert not rs_member(XM, RationalSubset.disc(P, Fraction(-1, 7)))
        assert all(not rs_member(XM, RationalSubset.disc(P, Fraction(-1, m))) for m in range(1, 21))

    def test_whole_space(self):
        assert rs_member(XM, RationalSubset.whole(P))
        assert rs_member(DiscPoint.classical(P, 0), RationalSubset.whole(P))

    def test_tie_is_membership(self):
        # |T| = |p| at the classical point p: R(T/p) contains it
        assert rs_member(DiscPoint.classical(P, P), RationalSubset.of([T], PC))

    def test_zero_denominator(self):
        assert not rs_member(DiscPoint.classical(P, 0), RationalSubset.of([ONE], T))

    def test_intersection_formula(self):
        U = RationalSubset.of([T], PC)
        W = RationalSubset.of([PC], T)
        both = U.intersect(W)
        # the circle |T| = |p|
        assert rs_member(DiscPoint.gauss(P, 0, -1), both)
        assert not rs_member(DiscPoint.gauss(P, 0, -2), both)

    @given(disc_points, st.integers(-6, 0), st.integers(-6, 0))
    def test_intersection_pointwise(self, x, a, b):
        U, W = RationalSubset.disc(P, a), RationalSubset.of([PC ** 0 * ONE], SeriesElement.monomial(P, ("T",), (1,), Fraction(P) ** -b))
        assert rs_member(x, U.intersect(W)) == (rs_member(x, U) and rs_member(x, W))


class TestCertificates:
    def test_t_and_one_minus_t(self):
        gens = (T, ONE - T)
        cert = find_unit_certificate(gens)
        assert verify_unit_certificate(gens, cert)

    def test_none_for_proper_ideal(self):
        assert find_unit_certificate((T, T ** 2)) is None

    def test_missing_certificate_rejected(self):
        c = CoveringSpec("standard_rational", (T, T ** 2), None)
        with pytest.raises(PreconditionError):
            cov_pieces(c)


class TestPieces:
    def test_simple(self):
        pieces = cov_pieces(CoveringSpec("simple_laurent", (T,)))
        assert [pc.label for pc in pieces] == ["W-", "W+"]
        assert pieces[0].subset == RationalSubset.of([T], ONE)
        assert pieces[1].subset == RationalSubset.of([ONE], T)

    def test_standard_laurent_count(self):
        assert len(cov_pieces(CoveringSpec("standard_laurent", (T, ONE - T)))) == 4

    def test_standard_rational(self):
        gens = (T, ONE - T)
        pieces = cov_pieces(CoveringSpec.standard_rational(gens))
        assert [pc.subset.denominator for pc in pieces] == [T, ONE - T]
        assert all(pc.subset.numerators == gens for pc in pieces)


class TestSamples:
    def test_simple_laurent(self):
        c = CoveringSpec("simple_laurent", (T,))
        pts = [XM, DiscPoint.classical(P, P), DiscPoint.gauss(P, 0, 0)]
        rep = cov_verify_on_samples(c, pts)
        assert [r.containing for r in rep.rows] == [("W-",), ("W-",), ("W-", "W+")]
        assert rep.covered

    def test_non_covering(self):
        family = [RationalSubset.circle(P)] + [RationalSubset.disc(P, Fraction(-1, m)) for m in range(1, 21)]
        rep = cov_verify_on_samples(family, [XM, DiscPoint.gauss(P, 0, 0), DiscPoint.classical(P, P)])
        assert rep.uncovered == [XM]

    def test_empty_samples(self):
        rep = cov_verify_on_samples(CoveringSpec("simple_laurent", (T,)), [])
        assert rep.covered and not rep.rows

    @given(st.lists(disc_points, max_size=6), st.sampled_from(["T", "1 - T", "p*T^2 + 1", "T - p"]),
           st.sampled_from(["T^2", "p", "1 + p*T"]))
    def test_laurent_sign_patterns_cover(self, pts, a, b):
        rep = cov_verify_on_samples(CoveringSpec("standard_laurent", (s(a), s(b))), pts)
        assert rep.covered
        for r in rep.rows:
            assert r.argument_piece in r.containing

    @given(st.lists(disc_points, min_size=50, max_size=50))
    def test_rational_max_index(self, pts):
        # 10 draws of 50 points: 500 sample points
        c = CoveringSpec.standard_rational((T, ONE - T, PC))
        rep = cov_verify_on_samples(c, pts)
        assert rep.covered


class TestReduction:
    def test_single(self):
        tree = cov_reduce_to_simple(CoveringSpec("standard_laurent", (T,)))
        assert tree.depth() == 1 and len(tree.leaves()) == 2

    def test_two(self):
        tree = cov_reduce_to_simple(CoveringSpec("standard_laurent", (T, ONE - T)))
        assert tree.split_index == 1
        assert tree.minus.split_index == tree.plus.split_index == 0
        assert len(tree.leaves()) == 4

    def test_three(self):
        tree = cov_reduce_to_simple(CoveringSpec("standard_laurent", (T, ONE - T, PC)))
        assert tree.depth() == 3 and len(tree.leaves()) == 8

    def test_rational_rejected(self):
        with pytest.raises(PreconditionError):
            cov_reduce_to_simple(CoveringSpec.standard_rational((T, ONE - T)))

    @given(disc_points, st.integers(1, 4))
    def test_leaves_refine_pieces(self, x, n):
        gens = tuple(s(t) for t in ("T", "1 - T", "T - p", "p*T + 1")[:n])
        c = CoveringSpec("standard_laurent", gens)
        pieces = {pc.pattern: pc.subset for pc in cov_pieces(c)}
        for leaf in cov_reduce_to_simple(c).leaves():
            pat = leaf.pattern(n)
            if rs_member(x, leaf.subset(gens)):
                assert rs_member(x, pieces[pat])


class TestAnalyticLocus:
    def test_power_series_ring(self):
        U, W = analytic_locus((PC, T))
        assert U.denominator == PC and W.denominator == T
        assert U.numerators == W.numerators == (PC, T)

    @given(disc_points)
    def test_matches_two_piece_union(self, x):
        U, W = analytic_locus((PC, T))
        expected = rs_member(x, RationalSubset.of([T], PC)) or rs_member(x, RationalSubset.of([PC], T))
        assert (rs_member(x, U) or rs_member(x, W)) == expected

    def test_tate(self):
        (U,) = analytic_locus((PC,))
        assert rs_member(XM, U)

    def test_empty(self):
        with pytest.raises(PreconditionError):
            analytic_locus(())

    @given(disc_points, st.integers(1, 4))
    def test_generalized_rational_expansion(self, x, n):
        U = RationalSubset.of([T ** n], PC)
        pieces = [generalized_rational_piece(U, (PC, T), r) for r in range(1, 9)]
        assert rs_member(x, U) == any(rs_member(x, V_) for V_ in pieces)

    @given(
        st.one_of(
            st.builds(lambda a: DiscPoint.classical(P, a), st.integers(-40, 40).map(lambda k: Fraction(P * k))),
            st.builds(lambda r: DiscPoint.gauss(P, 0, Fraction(r, 8)), st.integers(-24, -1)),
            st.builds(lambda r, sg: DiscPoint.gauss_signed(P, 0, Fraction(r, 8), sg),
                      st.integers(-24, -1), st.sampled_from([-1, 1])),
        )
    )
    def test_generic_fiber_points_in_some_piece(self, x):
        # points of Spa(Zp[[T]]) with |T(x)| <= p^(-1/8)
        assume(pt_eval(x, T) <= V.of(Fraction(-1, 8)).embed(x.rank))
        pod = PairOfDefinition((PC, T), (T,))
        assert pt_is_continuous(x, pod)
        assert any(rs_member(x, RationalSubset.of([T ** n], PC)) for n in range(1, 9))

    def test_x_minus_not_in_power_series_spectrum(self):
        # |T| = eps is not topologically nilpotent
        assert not pt_is_continuous(XM, PairOfDefinition((PC, T), (T,)))
