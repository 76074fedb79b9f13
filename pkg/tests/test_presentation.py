from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adickit.errors import CatalogError, ParseError, PreconditionError
from adickit.presentation import (
    HuberPresentation,
    compose_scales,
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
    presentation_from_json,
    truncated_predicate,
    witness_p_inverse,
)
from adickit.series import SeriesElement, geometric, parse_series, supergeometric
from adickit.subset import RationalSubset

P = 5


def rational(A, nums, den):
    names = A.var_names
    return RationalSubset.of(
        [parse_series(n, P, names) for n in nums], parse_series(den, P, names)
    )


# --- construction and rendering


@pytest.mark.parametrize(
    "text",
    ["Zp[[T]]", "Zp<T>", "Qp<T>", "Qp<T,T^-1>", "Zp[T]", "Fp[T]", "Fp[[T]]", "Qp<S,T>/(T^3 - p*S)"],
)
def test_make_roundtrips_through_its_render(text):
    A = make(P, text)
    assert make(P, A.render_ring()).render_ring() == A.render_ring()


def test_power_series_ring_is_adic_with_ideal_p_T():
    A = make(P, "Zp[[T]]")
    assert A.topology == "adic"
    assert set(map(str, A.ideal)) == {"p", "T"}


def test_tate_algebra_has_ring_of_definition_and_plus_ring():
    d = make(P, "Qp<T>").describe()
    assert d["ring_of_definition"] == "Zp<T>"
    assert d["plus_ring"] == "Zp<T>"


def test_unparseable_text_raises():
    with pytest.raises(ParseError):
        make(P, "Rp<T>")


def test_too_many_variables_is_a_catalog_error():
    with pytest.raises(CatalogError):
        make(P, "Zp<A,B,C,D>")


def test_characteristic_p_cannot_invert_p():
    with pytest.raises(CatalogError):
        HuberPresentation(P, "Fp", p_inverted=True)


def test_json_catalog_names():
    A = presentation_from_json("not_sheafy", P)
    assert A.label == "not_sheafy"
    assert presentation_from_json({"catalog": "Qp<T>"}, P).render_ring() == "Qp<T>"


# --- localization and completion


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_completed_localization_of_power_series_at_T_n_over_p(n):
    A = make(P, "Zp[[T]]")
    B = pres_complete(pres_localize(A, rational(A, [f"T^{n}"], "p")))
    assert pres_equal(B, make(P, f"Qp<T,S>/(p*S - T^{n})"))
    if n == 1:
        assert B.render_ring() == "Qp<S>"
    else:
        assert B.render_ring() == f"Qp<S,T>/(T^{n} - p*S)"
        assert B.render_ring_of_definition() == f"Zp<S,T>/(T^{n} - p*S)"


def test_localizing_the_disc_at_a_smaller_disc():
    A = make(P, "Qp<T>")
    B = pres_localize(A, rational(A, ["T^3"], "p"))
    assert B.render_ring() == "Qp<S,T>/(T^3 - p*S)"


def test_localizing_at_the_unit_disc_gives_a_disc_with_plus_ring():
    A = make(P, "Qp<T>")
    B = pres_localize(A, rational(A, ["T"], "1"))
    assert B.render_ring() == "Qp<S>"
    assert B.plus_ring == "Zp<S>"


def test_localizing_at_the_whole_space_changes_nothing():
    A = make(P, "Qp<T>")
    B = pres_localize(A, RationalSubset.whole(P))
    assert pres_equal(A, B)


def test_localization_needs_nonzero_denominator():
    A = make(P, "Qp<T>")
    with pytest.raises(PreconditionError):
        pres_localize(A, rational(A, ["T"], "0"))


def test_completion_of_polynomials():
    assert pres_complete(make(P, "Zp[T]")).render_ring() == "Zp<T>"
    F = make(P, "Fp[T]")
    assert pres_complete(F).render_ring() == "Fp[T]"
    assert pres_complete(F).topology == "discrete"


# --- quotients


def test_quotient_by_pT_minus_one_inverts_p():
    A = make(P, "Zp<p*T>")
    B = pres_quotient(A, "p*T - 1")
    assert B.render_ring() == "Qp"
    assert str(witness_p_inverse(B)) == "p^-1"


def test_quotient_by_zero_changes_nothing():
    A = make(P, "Qp<T>")
    assert pres_quotient(A, "0").render_ring() == "Qp<T>"


def test_quotient_by_ST_minus_one_is_the_circle():
    B = pres_quotient(make(P, "Qp<T,S>"), "S*T - 1")
    assert B.render_ring() == "Qp<T,T^-1>"


# --- fibers


def test_generic_fiber_of_the_integral_disc():
    fam = pres_generic_fiber(make(P, "Zp<T>"))
    assert fam.kind == "single"
    (B,) = fam.pieces
    assert B.render_ring() == "Qp<T>"
    assert B.plus_ring == "Zp<T>"


def test_generic_fiber_of_Zp_is_Qp():
    assert pres_generic_fiber(make(P, "Zp")).pieces[0].render_ring() == "Qp"


def test_generic_fiber_of_power_series_is_an_ascending_union():
    fam = pres_generic_fiber(make(P, "Zp[[T]]"), n_max=4)
    assert fam.kind == "ascending_open"
    assert fam.truncated
    assert len(fam.pieces) == 4
    assert fam.pieces[0].render_ring() == "Qp<S>"
    assert fam.pieces[2].render_ring() == "Qp<S,T>/(T^3 - p*S)"


def test_generic_fiber_rejects_p_in_a_unit_ideal_model():
    with pytest.raises(PreconditionError):
        pres_generic_fiber(make(P, "Qp<T>"))


def test_generic_fiber_pseudouniformizer_must_be_p():
    with pytest.raises(CatalogError):
        pres_generic_fiber(make(P, "Zp<T>"), pi=Fraction(1, P))


@pytest.mark.parametrize(
    "text, ring, topology",
    [("Zp[T]", "Fp[T]", "discrete"), ("Zp[[T]]", "Fp[[T]]", "adic"), ("Zp", "Fp", "discrete")],
)
def test_special_fibers(text, ring, topology):
    F = pres_special_fiber(make(P, text))
    assert F.render_ring() == ring
    assert F.topology == topology


def test_special_fiber_of_power_series_keeps_T_in_the_ideal():
    F = pres_special_fiber(make(P, "Zp[[T]]"))
    assert [str(x) for x in F.ideal] == ["T"]


# --- fiber products


def test_product_of_two_discs():
    D = make(P, "Qp<T>")
    E = make(P, "Qp<S>")
    Q = make(P, "Qp")
    X = pres_fiber_product(D, E, Q)
    assert X.render_ring() == "Qp<S,T>"
    assert X.plus_ring == "Zp<S,T>"
    assert pres_equal(X, pres_fiber_product(E, D, Q))


def test_product_of_a_disc_with_itself_renames_apart():
    D = make(P, "Qp<T>")
    X = pres_fiber_product(D, D, make(P, "Qp"))
    assert len(X.variables) == 2


def test_product_of_points():
    Q = make(P, "Qp")
    assert pres_fiber_product(Q, Q, Q).render_ring() == "Qp"


def test_ascending_base_change_of_power_series():
    fam = pres_fiber_product(make(P, "Zp[[T]]"), make(P, "Qp"), make(P, "Zp"), mode="ascending", i_max=3)
    assert len(fam.pieces) == 3
    assert all(lbl.startswith(f"M_(L,{i}) = ") for i, lbl in enumerate(fam.labels, 1))


def test_fiber_product_bad_mode():
    Q = make(P, "Qp")
    with pytest.raises(PreconditionError):
        pres_fiber_product(Q, Q, Q, mode="sideways")


# --- analytification and gluing


def test_analytification_of_the_affine_line():
    fam = pres_analytify(make(P, "Qp[T]", normalize=False), k_max=3)
    assert fam.kind == "ascending_discs"
    assert [B.render_ring() for B in fam.pieces] == ["Qp<T>", "Qp<p*T>", "Qp<p^2*T>"]
    assert all(dict(t.scale_exp) == {"T": 1} for t in fam.transitions)
    assert compose_scales(fam.transitions) == {"T": 2}


def test_analytification_of_a_point():
    fam = pres_analytify(make(P, "Qp"))
    assert fam.kind == "single"
    assert len(fam.pieces) == 1


def test_analytification_needs_polynomials():
    with pytest.raises(PreconditionError):
        pres_analytify(make(P, "Qp<T>"))


def test_projective_line_has_only_constant_sections():
    S = pres_glue_sections(p1_family(P), precision=(4, 8))
    assert S.kind == "constants"
    assert S.dimension == 1


def test_affine_line_sections_are_entire_series():
    fam = pres_analytify(make(P, "Qp[T]", normalize=False))
    S = pres_glue_sections(fam)
    assert S.kind == "predicate"
    assert S.predicate(supergeometric(P))
    assert not S.predicate(geometric(P))


def test_generic_fiber_of_integral_disc_glues_to_one_ring():
    S = pres_glue_sections(pres_generic_fiber(make(P, "Zp<T>")))
    assert S.kind == "ring"
    assert S.description == "Qp<T>"


def test_open_disc_sections():
    fam = pres_generic_fiber(make(P, "Zp[[T]]"), n_max=4)
    S = pres_glue_sections(fam)
    assert S.description == "series converging on the open unit disc"
    one = SeriesElement.constant(P, 1, ("T",))
    assert truncated_predicate(fam)(one)


# --- normal forms agree with the oracle pres_equal


@given(st.integers(1, 6))
def test_localizations_at_discs_of_radius_p_minus_one_over_n(n):
    A = make(P, "Qp<T>")
    B = pres_localize(A, rational(A, [f"T^{n}"], "p"))
    assert pres_equal(B, make(P, f"Qp<T,S>/(p*S - T^{n})"), precision=(4, 16))
