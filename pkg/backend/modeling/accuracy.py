"""
Model accuracy metrics.
"""

import logging

import numpy as np

from core.types import DEFAULT_BOUNDS

from .fit import RejectedGroup, ThroughputModel, fit_group, group_arrays, stratified_split
from .regression import solve_coefficients

logger = logging.getLogger(__name__)


def _fit_part(X, y, degree, group_id):
    """Model on a subset, stepping the degree down until the subset supports it"""
    for d in range(degree, 0, -1):
        coefficients = solve_coefficients(X, y, d)
        if coefficients is not None:
            return ThroughputModel(group_id, d, tuple(coefficients), sample_count=len(y))
    return None


def projected_validation_accuracy(group, split_seed, bounds=DEFAULT_BOUNDS):
    """
    How well the training part's optimum transfers to the held-out part.

    Separate models are fitted on the 70% and 30% parts at the group's
    accepted degree. The held-out model is maximised (Thr_test) and also
    evaluated at the training model's optimum (Thr_projected). Comparing at
    the same model keeps traffic drift between the parts out of the score.

    Returns:
        1 - |Thr_test - Thr_projected| / Thr_projected, or None if the
        group is rejected or a part cannot be fitted
    """
    from engine.optimizer import maximize

    accepted = fit_group(group, split_seed)
    if isinstance(accepted, RejectedGroup):
        return None

    X, y = group_arrays(group)
    train, test = stratified_split(X[:, 0], split_seed)
    if len(test) == 0:
        return None

    train_model = _fit_part(X[train], y[train], accepted.degree, group.group_id)
    test_model = _fit_part(X[test], y[test], accepted.degree, group.group_id)
    if train_model is None or test_model is None:
        return None

    _, train_params = maximize(train_model, bounds)
    thr_test, _ = maximize(test_model, bounds)
    thr_projected = test_model.evaluate(train_params)
    if thr_projected <= 0:
        return 0.0
    accuracy = 1.0 - abs(thr_test - thr_projected) / thr_projected
    logger.debug("%s: projected validation accuracy %.3f", group.group_id, accuracy)
    return float(np.clip(accuracy, 0.0, 1.0))


def estimation_accuracy(estimated, actual) -> float:
    """Closeness of an estimated throughput to the achieved one, in [0, 1]"""
    if actual <= 0:
        raise ValueError("actual throughput must be positive")
    return float(max(0.0, 1.0 - abs(actual - estimated) / actual))
