"""Exact computations with adic spaces over Qp.

Points of the unit disc with rank-1 and rank-2 values, rational subsets and
coverings, Huber presentations with normal forms, and finite-precision sheaf
checks.  All arithmetic is exact over the rationals.
"""

from __future__ import annotations

from .basefield import BaseField, FieldElement
from .errors import (
    AdicError,
    CatalogError,
    ParseError,
    PreconditionError,
    RankMismatch,
    UndecidableAtPrecision,
)
from .point import DiscPoint, pt_classify, pt_eval, pt_is_continuous, spa_affinoid_field_count
from .presentation import HuberPresentation, make, normal_form, pres_equal
from .series import SeriesElement, WeightDescriptor, parse_series
from .sheafcheck import sc_buzver_witness, sc_simple_laurent, sc_stably_uniform_strictness
from .subset import CoveringSpec, RationalSubset, rs_member
from .valgroup import ValueGroupElement

__all__ = [
    "AdicError",
    "BaseField",
    "CatalogError",
    "CoveringSpec",
    "DiscPoint",
    "FieldElement",
    "HuberPresentation",
    "ParseError",
    "PreconditionError",
    "RankMismatch",
    "RationalSubset",
    "SeriesElement",
    "UndecidableAtPrecision",
    "ValueGroupElement",
    "WeightDescriptor",
    "make",
    "normal_form",
    "parse_series",
    "pres_equal",
    "pt_classify",
    "pt_eval",
    "pt_is_continuous",
    "rs_member",
    "sc_buzver_witness",
    "sc_simple_laurent",
    "sc_stably_uniform_strictness",
    "spa_affinoid_field_count",
]
