"""Exact arithmetic: rationals, real radical tower fields, continued fractions,
and norm-based lower bounds for linear forms."""

from .rationals import BACKEND, Q, qify
from .fields import (
    FieldElement,
    Generator,
    TowerError,
    TowerSpec,
    approx,
    decimal_text,
    dist_nearest_int,
    expr_text,
    multiplication_matrix,
    sign,
    tower,
)
from .cf import (
    BadApproxCounterexample,
    BadApproxReport,
    ContinuedFraction,
    PreconditionError,
    cf_digits,
    cf_value,
    check_bad_approx_bound,
)
from .diophantine import (
    CertifiedFormConstant,
    DegenerateFormError,
    EmpiricalFormMinimum,
    certified_form_constant,
    char_poly,
    denominator_clearing_constant,
    empirical_c5,
    field_norm,
    linear_form_bound_details,
    linear_form_lower_bound,
    linear_form_soundness_sweep,
)

__all__ = [
    "BACKEND",
    "Q",
    "qify",
    "FieldElement",
    "Generator",
    "TowerError",
    "TowerSpec",
    "tower",
    "approx",
    "sign",
    "dist_nearest_int",
    "expr_text",
    "decimal_text",
    "multiplication_matrix",
    "ContinuedFraction",
    "cf_digits",
    "cf_value",
    "check_bad_approx_bound",
    "BadApproxReport",
    "BadApproxCounterexample",
    "PreconditionError",
    "field_norm",
    "char_poly",
    "linear_form_lower_bound",
    "linear_form_bound_details",
    "linear_form_soundness_sweep",
    "certified_form_constant",
    "CertifiedFormConstant",
    "empirical_c5",
    "EmpiricalFormMinimum",
    "denominator_clearing_constant",
    "DegenerateFormError",
]
