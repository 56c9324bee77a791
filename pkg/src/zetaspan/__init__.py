"""Exact-arithmetic linear forms in odd zeta values.

Construction and verification of rational-function linear forms in 1 and
odd zeta values, extraction of their common prime factor, certified
computation of the growth constants feeding linear-independence criteria,
and a reproducible search over the parameter space.
"""

__version__ = "0.1.0"

from .exact import ApproxReal, ExactRational, digamma, lcm_upto, p_adic_valuation, primes_in, zeta_value
from .params import ParamSet, constant_C, default_r, validate
from .stepphi import FloorTerm, StepFunction, build_step_function, phi_at, phi_terms, varpi

__all__ = [
    "ApproxReal", "ExactRational", "digamma", "lcm_upto", "p_adic_valuation",
    "primes_in", "zeta_value", "ParamSet", "constant_C", "default_r",
    "validate", "FloorTerm", "StepFunction", "build_step_function", "phi_at",
    "phi_terms", "varpi", "__version__",
]
