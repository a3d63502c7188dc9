"""
Modeling Module

Polynomial throughput models fitted per session group.
"""

from .polynomial import MAX_DEGREE, monomial_exponents, term_names, design_matrix
from .regression import solve_coefficients, r_squared
from .fit import (
    DEGREES,
    R2_GATE,
    ThroughputModel,
    RejectedGroup,
    evaluate,
    stratified_split,
    fit_group,
)
from .accuracy import projected_validation_accuracy, estimation_accuracy

__all__ = [
    'MAX_DEGREE',
    'monomial_exponents',
    'term_names',
    'design_matrix',
    'solve_coefficients',
    'r_squared',
    'DEGREES',
    'R2_GATE',
    'ThroughputModel',
    'RejectedGroup',
    'evaluate',
    'stratified_split',
    'fit_group',
    'projected_validation_accuracy',
    'estimation_accuracy',
]
