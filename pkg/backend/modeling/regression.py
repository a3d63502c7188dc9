"""
Least Squares

Normal-equation solve of polynomial coefficients. Parameters are scaled to
(0, 1] and columns equilibrated before solving; a tiny ridge keeps
correlated power-of-two sweeps solvable and two refinement steps recover
the precision the ridge and the scaling cost. Coefficients come back in
the raw (cc, p, pp) domain.
"""

import numpy as np

from .polynomial import design_matrix, exponent_array

PARAM_SCALE = 32.0
RIDGE = 1e-9
REFINEMENT_STEPS = 2


def solve_coefficients(X, y, degree):
    """
    Fit a degree-`degree` polynomial to (X, y).

    Args:
        X: (n, 3) array of (cc, p, pp)
        y: (n,) throughputs
        degree: Polynomial degree

    Returns:
        Raw-domain coefficient array, or None when the design matrix is
        rank deficient for this degree
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)

    D = design_matrix(X / PARAM_SCALE, degree)
    n_rows, n_terms = D.shape
    if n_rows < n_terms:
        return None

    norms = np.linalg.norm(D, axis=0)
    norms[norms == 0] = 1.0
    De = D / norms
    if np.linalg.matrix_rank(De) < n_terms:
        return None

    A = De.T @ De + RIDGE * np.eye(n_terms)
    b = De.T @ y
    coef = np.linalg.solve(A, b)
    for _ in range(REFINEMENT_STEPS):
        coef += np.linalg.solve(A, b - A @ coef)

    total_degree = exponent_array(degree).sum(axis=1)
    return coef / norms / PARAM_SCALE ** total_degree


def r_squared(y, predicted) -> float:
    """
    Coefficient of determination clamped to [0, 1].

    A target without variance scores 1 when it is reproduced exactly and 0
    otherwise.
    """
    y = np.asarray(y, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    ss_res = float(np.sum((y - predicted) ** 2))
    if len(y) == 0:
        return 0.0
    if np.ptp(y) == 0:
        scale = max(1.0, float(np.sum(y ** 2)))
        return 1.0 if ss_res <= 1e-12 * scale else 0.0
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
