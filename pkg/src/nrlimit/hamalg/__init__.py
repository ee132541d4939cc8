"""Exact symbolic algebra for gauge normal forms."""
from .algebra import (
    MAX_ORDER,
    DispersionCoeffs,
    NormalForm,
    binomial,
    dispersion_coeffs,
    expand_dispersion,
    expand_nonlinearity,
    gauge_average,
    h0,
    normal_form,
    poisson_bracket,
    solve_homological,
)
from .gaussian import QI, I, as_qi
from .poly import PHI, PHIBAR, PSI, PSIBAR, Factor, HamPoly, Monomial, grade

__all__ = [
    "MAX_ORDER",
    "DispersionCoeffs",
    "NormalForm",
    "binomial",
    "dispersion_coeffs",
    "expand_dispersion",
    "expand_nonlinearity",
    "gauge_average",
    "h0",
    "normal_form",
    "poisson_bracket",
    "solve_homological",
    "QI",
    "I",
    "as_qi",
    "PHI",
    "PHIBAR",
    "PSI",
    "PSIBAR",
    "Factor",
    "HamPoly",
    "Monomial",
    "grade",
]
