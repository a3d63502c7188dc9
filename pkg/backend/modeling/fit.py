"""
Per-Group Throughput Models

Fits T = f(cc, p, pp) for one session group, escalating the polynomial
degree until both the training and the validation R² clear the gate.
Groups that never do are rejected as outliers.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from core.errors import InvalidParameterError
from core.types import ParamTriple

from .polynomial import (
    MAX_DEGREE,
    evaluate_polynomial,
    monomial_exponents,
    polynomial_gradient,
    term_names,
)
from .regression import r_squared, solve_coefficients

logger = logging.getLogger(__name__)


DEGREES = (1, 2, 3, 4)
R2_GATE = 0.7
TRAIN_FRACTION = 0.7


def _point(params):
    if isinstance(params, ParamTriple):
        return np.array(params.as_tuple(), dtype=float)
    return np.asarray(params, dtype=float)


@dataclass(frozen=True)
class ThroughputModel:
    """A fitted polynomial plus the residual and weight the optimizer assigns"""

    group_id: str
    degree: int
    coefficients: Tuple[float, ...]
    r2_train: float = 1.0
    r2_validation: float = 1.0
    epsilon: Optional[float] = None
    weight: Optional[int] = None
    sample_count: int = 0

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_DEGREE:
            raise InvalidParameterError(f"degree must be within [1, {MAX_DEGREE}], got {self.degree}")
        coefficients = tuple(float(c) for c in self.coefficients)
        expected = len(monomial_exponents(self.degree))
        if len(coefficients) != expected:
            raise InvalidParameterError(
                f"degree {self.degree} needs {expected} coefficients, got {len(coefficients)}"
            )
        object.__setattr__(self, 'coefficients', coefficients)

    def evaluate(self, params) -> float:
        return float(evaluate_polynomial(self.coefficients, self.degree, _point(params))[0])

    def evaluate_many(self, X) -> np.ndarray:
        return evaluate_polynomial(self.coefficients, self.degree, X)

    def gradient(self, x) -> np.ndarray:
        return polynomial_gradient(self.coefficients, self.degree, x)

    def with_residual(self, epsilon) -> 'ThroughputModel':
        return dataclasses.replace(self, epsilon=float(epsilon))

    def with_weight(self, weight) -> 'ThroughputModel':
        return dataclasses.replace(self, weight=int(weight))

    def to_record(self) -> dict:
        return {
            'group_id': self.group_id,
            'degree': self.degree,
            'r2_train': self.r2_train,
            'r2_validation': self.r2_validation,
            'epsilon': self.epsilon,
            'weight': self.weight,
            'sample_count': self.sample_count,
            'terms': term_names(self.degree),
            'coefficients': list(self.coefficients),
        }

    def to_line(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, record) -> 'ThroughputModel':
        try:
            return cls(
                group_id=str(record['group_id']),
                degree=int(record['degree']),
                coefficients=tuple(record['coefficients']),
                r2_train=float(record.get('r2_train', 1.0)),
                r2_validation=float(record.get('r2_validation', 1.0)),
                epsilon=record.get('epsilon'),
                weight=record.get('weight'),
                sample_count=int(record.get('sample_count', 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"malformed model record: {exc}") from None


@dataclass(frozen=True)
class RejectedGroup:
    """A group no degree could model; r2_by_degree holds (degree, train, validation)"""

    group_id: str
    reason: str
    r2_by_degree: Tuple[Tuple[int, Optional[float], Optional[float]], ...] = ()


def evaluate(model: ThroughputModel, params) -> float:
    """Raw polynomial value; may be negative"""
    return model.evaluate(params)


def group_arrays(group):
    X = np.array([m.params.as_tuple() for m in group.members], dtype=float)
    y = np.array([m.throughput for m in group.members], dtype=float)
    return X, y


def stratified_split(cc_values, seed, train_fraction=TRAIN_FRACTION):
    """
    Seeded train/validation split that keeps every concurrency value on
    both sides whenever it has at least two samples.

    Returns:
        (train_indices, validation_indices), both sorted
    """
    cc_values = np.asarray(cc_values)
    rng = np.random.default_rng(seed)
    train, validation = [], []
    for value in np.unique(cc_values):
        members = rng.permutation(np.flatnonzero(cc_values == value))
        n_train = int(round(len(members) * train_fraction))
        if len(members) > 1:
            n_train = min(max(n_train, 1), len(members) - 1)
        else:
            n_train = len(members)
        train.extend(members[:n_train].tolist())
        validation.extend(members[n_train:].tolist())
    return np.array(sorted(train), dtype=int), np.array(sorted(validation), dtype=int)


def fit_group(
    group,
    split_seed,
    degrees=DEGREES,
    r2_gate=R2_GATE,
) -> Union[ThroughputModel, RejectedGroup]:
    """
    Fit one group, trying degrees in order.

    Args:
        group: EntryGroup to model
        split_seed: Seed of the stratified 70/30 split
        degrees: Degrees to try, lowest first
        r2_gate: Both R² values must exceed this

    Returns:
        ThroughputModel for the first passing degree, else RejectedGroup
    """
    X, y = group_arrays(group)
    train, validation = stratified_split(X[:, 0], split_seed)
    if len(validation) == 0:
        validation = train

    scores = []
    for degree in degrees:
        coefficients = solve_coefficients(X[train], y[train], degree)
        if coefficients is None:
            logger.debug("%s: degree %d infeasible", group.group_id, degree)
            scores.append((degree, None, None))
            continue

        r2_train = r_squared(y[train], evaluate_polynomial(coefficients, degree, X[train]))
        r2_val = r_squared(y[validation], evaluate_polynomial(coefficients, degree, X[validation]))
        scores.append((degree, r2_train, r2_val))
        logger.debug("%s: degree %d R2 train %.4f validation %.4f",
                     group.group_id, degree, r2_train, r2_val)

        if r2_train > r2_gate and r2_val > r2_gate:
            return ThroughputModel(
                group_id=group.group_id,
                degree=degree,
                coefficients=tuple(coefficients),
                r2_train=r2_train,
                r2_validation=r2_val,
                sample_count=len(y),
            )

    feasible = [s for s in scores if s[1] is not None]
    reason = "no feasible degree" if not feasible else f"R2 never exceeded {r2_gate}"
    logger.warning("Rejected group %s: %s", group.group_id, reason)
    return RejectedGroup(group.group_id, reason, tuple(scores))
