"""
Polynomial basis over (cc, p, pp).
"""

from functools import lru_cache

import numpy as np


MAX_DEGREE = 4


@lru_cache(maxsize=None)
def monomial_exponents(degree):
    """
    Exponent triples (a, b, c) of every monomial cc^a p^b pp^c with
    a + b + c <= degree, constant term first, then by total degree.
    Degrees 1..4 give 4, 10, 20 and 35 terms.
    """
    terms = []
    for total in range(degree + 1):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                terms.append((a, b, total - a - b))
    return tuple(terms)


def exponent_array(degree) -> np.ndarray:
    return np.array(monomial_exponents(degree), dtype=float)


def term_names(degree):
    names = []
    for a, b, c in monomial_exponents(degree):
        parts = [f"{var}^{e}" if e > 1 else var
                 for var, e in (('cc', a), ('p', b), ('pp', c)) if e]
        names.append('*'.join(parts) or '1')
    return names


def design_matrix(X, degree) -> np.ndarray:
    """(n, terms) matrix of monomial values at the rows of X"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    E = exponent_array(degree)
    return np.prod(X[:, None, :] ** E[None, :, :], axis=2)


def evaluate_polynomial(coefficients, degree, X) -> np.ndarray:
    return design_matrix(X, degree) @ np.asarray(coefficients, dtype=float)


def polynomial_gradient(coefficients, degree, x) -> np.ndarray:
    """Analytic gradient at one point"""
    x = np.asarray(x, dtype=float)
    E = exponent_array(degree)
    coef = np.asarray(coefficients, dtype=float)
    grad = np.zeros(3)
    for k in range(3):
        lowered = E.copy()
        lowered[:, k] = np.maximum(E[:, k] - 1, 0)
        values = np.prod(x[None, :] ** lowered, axis=1)
        grad[k] = np.sum(coef * E[:, k] * values)
    return grad
