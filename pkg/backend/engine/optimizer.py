"""
Parameter Optimizer

Turns fitted throughput models and one probe measurement into a parameter
triple: residuals against the probe, density clustering of the residuals
into 2^j weights, per-model bounded maximisation, relaxation of each
optimum, and a weighted average of the relaxed triples.
"""

import itertools
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from sklearn.cluster import DBSCAN

from core.errors import InvalidParameterError, OptimizerError
from core.types import DEFAULT_BOUNDS, ParameterBounds, ParamTriple
from modeling.fit import RejectedGroup, ThroughputModel, fit_group
from similarity.features import query_features
from similarity.filtering import filter_similar
from similarity.grouping import MIN_GROUP, group_by_session

logger = logging.getLogger(__name__)


DEFAULT_RELAXATION = (0.7, 0.7, 0.99)
DBSCAN_EPS_FRACTION = 0.10


@dataclass(frozen=True)
class OptimizerRequest:
    probe_params: ParamTriple
    probe_throughput: float
    models: Tuple[ThroughputModel, ...]
    bounds: ParameterBounds = DEFAULT_BOUNDS
    relaxation: Tuple[float, float, float] = DEFAULT_RELAXATION
    eps_fraction: float = DBSCAN_EPS_FRACTION

    def __post_init__(self):
        object.__setattr__(self, 'models', tuple(self.models))
        if not self.models:
            raise OptimizerError("an optimizer request needs at least one model")
        if not self.probe_throughput > 0:
            raise InvalidParameterError("probe throughput must be positive")
        if len(self.relaxation) != 3 or not all(0 < r <= 1 for r in self.relaxation):
            raise InvalidParameterError(f"relaxation ratios must be in (0, 1], got {self.relaxation}")
        if not self.bounds.contains(self.probe_params):
            raise InvalidParameterError(f"probe {self.probe_params} is outside the bounds")


@dataclass(frozen=True)
class ModelOutcome:
    """One model's contribution to the combined answer"""

    model: ThroughputModel
    tmax: float
    optimum: ParamTriple
    relaxed: ParamTriple
    weight: int
    epsilon: float

    def to_dict(self):
        return {
            'groupId': self.model.group_id,
            'degree': self.model.degree,
            'tmax': self.tmax,
            'optimum': list(self.optimum.as_tuple()),
            'relaxed': list(self.relaxed.as_tuple()),
            'weight': self.weight,
            'epsilon': self.epsilon,
        }


@dataclass(frozen=True)
class OptimizerResult:
    params: ParamTriple
    estimated_throughput: float
    unit_throughput: float
    per_model: Tuple[ModelOutcome, ...] = field(default=(), compare=False)

    @property
    def total_weight(self):
        return sum(outcome.weight for outcome in self.per_model)

    def to_dict(self):
        return {
            'params': list(self.params.as_tuple()),
            'estimatedThroughput': self.estimated_throughput,
            'unitThroughput': self.unit_throughput,
            'models': [outcome.to_dict() for outcome in self.per_model],
        }


# Steps of the optimisation

def residuals(models: Sequence[ThroughputModel], probe_params, probe_throughput):
    """Signed probe errors; positive means the model underestimates"""
    return [probe_throughput - model.evaluate(probe_params) for model in models]


def weight_models(models: Sequence[ThroughputModel], probe_throughput, eps_fraction=DBSCAN_EPS_FRACTION):
    """
    Weight models by how well they predicted the probe.

    Residual magnitudes are clustered with DBSCAN (eps = eps_fraction x
    probe throughput, single points form clusters). Clusters ordered from
    the largest mean error to the smallest get weights 1, 2, 4, ... so the
    most accurate cluster counts most.

    Models must already carry their epsilon.
    """
    if not models:
        return []
    if any(model.epsilon is None for model in models):
        raise OptimizerError("weight_models needs residuals on every model")

    errors = np.abs(np.array([model.epsilon for model in models], dtype=float)).reshape(-1, 1)
    labels = DBSCAN(eps=eps_fraction * probe_throughput, min_samples=1).fit(errors).labels_

    means = {label: errors[labels == label].mean() for label in set(labels.tolist())}
    ranked = sorted(means, key=lambda label: means[label], reverse=True)
    weight_of = {label: 2 ** rank for rank, label in enumerate(ranked)}

    logger.debug("Residual clusters (mean |eps| -> weight): %s",
                 [(round(float(means[label])), weight_of[label]) for label in ranked])
    return [model.with_weight(weight_of[label]) for model, label in zip(models, labels.tolist())]


def _integer_neighbours(x, bounds):
    ranges = []
    for value, limit in zip(x, bounds.as_tuple()):
        low = min(max(int(math.floor(value)), 1), limit)
        high = min(max(int(math.ceil(value)), 1), limit)
        ranges.append(sorted({low, high}))
    return [ParamTriple(*combo) for combo in itertools.product(*ranges)]


def grid_maximum(model: ThroughputModel, bounds=DEFAULT_BOUNDS):
    """Exhaustive search over every integer triple in the box"""
    axes = [np.arange(1, limit + 1) for limit in bounds.as_tuple()]
    grid = np.array(list(itertools.product(*axes)), dtype=float)
    with np.errstate(all='ignore'):
        values = model.evaluate_many(grid)
    values = np.where(np.isfinite(values), values, -np.inf)
    best = int(np.argmax(values))
    if not np.isfinite(values[best]):
        raise OptimizerError(f"model {model.group_id} is not finite anywhere in the box")
    return float(values[best]), ParamTriple(*(int(v) for v in grid[best]))


def _start_points(bounds, probe):
    box = bounds.box()
    starts = [np.array(corner, dtype=float) for corner in itertools.product(*box)]
    starts.append(np.array([(low + high) / 2 for low, high in box]))
    if probe is not None:
        starts.append(np.array(probe.as_tuple(), dtype=float))
    return starts


def maximize(model: ThroughputModel, bounds=DEFAULT_BOUNDS, probe: Optional[ParamTriple] = None):
    """
    Bounded maximisation of one model.

    L-BFGS-B with the analytic gradient runs from the eight box corners,
    the centre and the probe point. Each local optimum is snapped to its
    best surrounding integer triple; non-finite values fall back to a full
    grid search.

    Returns:
        (Tmax, ParamTriple) where Tmax is the model value at that triple
    """
    box = bounds.box()

    def objective(x):
        return -model.evaluate(x), -model.gradient(x)

    best_value, best_params = -math.inf, None
    try:
        for x0 in _start_points(bounds, probe):
            if not math.isfinite(model.evaluate(x0)):
                raise FloatingPointError("non-finite model value at a start point")
            result = minimize(objective, x0, jac=True, method='L-BFGS-B', bounds=box)
            if not (np.all(np.isfinite(result.x)) and np.isfinite(result.fun)):
                raise FloatingPointError("non-finite optimum")
            candidates = _integer_neighbours(np.clip(result.x, 1, bounds.as_tuple()), bounds)
            candidates += _integer_neighbours(x0, bounds)
            for params in candidates:
                value = model.evaluate(params)
                if not math.isfinite(value):
                    raise FloatingPointError("non-finite model value")
                if value > best_value:
                    best_value, best_params = value, params
    except (FloatingPointError, ValueError) as exc:
        logger.warning("Model %s: %s, falling back to grid search", model.group_id, exc)
        return grid_maximum(model, bounds)

    return best_value, best_params


def relax(model: ThroughputModel, optimum, rho=DEFAULT_RELAXATION) -> ParamTriple:
    """
    Lower each parameter on its own, the other two held at the optimum,
    while the model keeps at least rho x Tmax. Nothing is relaxed when
    Tmax is not positive.
    """
    tmax, params = optimum
    if tmax <= 0:
        return params

    best = list(params.as_tuple())
    relaxed = list(best)
    for index, ratio in enumerate(rho):
        value = best[index]
        while value > 1:
            trial = list(best)
            trial[index] = value - 1
            if model.evaluate(trial) >= ratio * tmax:
                value -= 1
            else:
                break
        relaxed[index] = value
    return ParamTriple(*relaxed)


def _round_half_up(value):
    return max(1, int(math.floor(value + 0.5)))


def combine(outcomes: Sequence[ModelOutcome]) -> OptimizerResult:
    """Weighted average of the relaxed triples (rounded half up, floor 1)"""
    total = sum(outcome.weight for outcome in outcomes)
    if total <= 0:
        raise OptimizerError("combined weight must be positive")

    averaged = [
        sum(outcome.relaxed.as_tuple()[k] * outcome.weight for outcome in outcomes) / total
        for k in range(3)
    ]
    cc, p, pp = (_round_half_up(value) for value in averaged)
    params = ParamTriple(cc, p, pp)

    estimated = sum(outcome.tmax * outcome.weight for outcome in outcomes) / total
    unit = sum(outcome.model.evaluate((1, p, pp)) * outcome.weight for outcome in outcomes) / total
    return OptimizerResult(params, estimated, unit, tuple(outcomes))


def optimize(request: OptimizerRequest, cache=None) -> OptimizerResult:
    """
    Run the whole optimisation for one probe.

    Args:
        request: Models, probe and knobs
        cache: Optional dict reused across calls for per-model
            maximise/relax results, keyed by model, box, ratios and the
            probe point that seeds one of the starts
    """
    eps = residuals(request.models, request.probe_params, request.probe_throughput)
    models = [model.with_residual(e) for model, e in zip(request.models, eps)]
    weighted = weight_models(models, request.probe_throughput, request.eps_fraction)

    outcomes = []
    for model in weighted:
        key = (model.group_id, model.coefficients, request.bounds, request.relaxation,
               request.probe_params)
        cached = cache.get(key) if cache is not None else None
        if cached is None:
            tmax, optimum = maximize(model, request.bounds, request.probe_params)
            cached = (tmax, optimum, relax(model, (tmax, optimum), request.relaxation))
            if cache is not None:
                cache[key] = cached
        tmax, optimum, relaxed = cached
        outcomes.append(ModelOutcome(model, tmax, optimum, relaxed, model.weight, model.epsilon))

    result = combine(outcomes)
    logger.debug("Probe %s @ %.0f bps -> %s (est %.0f, UT %.0f)",
                 request.probe_params, request.probe_throughput, result.params,
                 result.estimated_throughput, result.unit_throughput)
    return result


# Stateful front end

@dataclass(frozen=True)
class ModelSet:
    """Models prepared for one kind of chunk"""

    models: Tuple[ThroughputModel, ...]
    rejected: Tuple[RejectedGroup, ...]
    entries_used: int
    threshold: float
    warning: bool

    def to_dict(self):
        return {
            'groupsKept': len(self.models),
            'groupsRejected': len(self.rejected),
            'entriesUsed': self.entries_used,
            'threshold': self.threshold,
            'filterWarning': self.warning,
            'degrees': [model.degree for model in self.models],
        }


class HarpOptimizer:
    """
    History-backed optimizer.

    Models are built once per chunk description (filter, group, fit) and
    cached; each probe then only costs residuals, clustering and the
    weighted average.
    """

    def __init__(
        self,
        store,
        bounds=DEFAULT_BOUNDS,
        relaxation=DEFAULT_RELAXATION,
        min_entries=432,
        min_group=MIN_GROUP,
        eps_fraction=DBSCAN_EPS_FRACTION,
        split_seed=0,
    ):
        self.store = store
        self.bounds = bounds
        self.relaxation = tuple(relaxation)
        self.min_entries = min_entries
        self.min_group = min_group
        self.eps_fraction = eps_fraction
        self.split_seed = split_seed
        self._lock = threading.Lock()
        self._model_sets = {}
        self._outcomes = {}

    @classmethod
    def from_settings(cls, store, settings, split_seed=0):
        return cls(
            store,
            bounds=settings.bounds,
            relaxation=settings.relaxation,
            min_entries=settings.min_entries,
            min_group=settings.min_group,
            eps_fraction=settings.dbscan_eps_fraction,
            split_seed=split_seed,
        )

    def models_for(self, chunk, network) -> ModelSet:
        query = query_features(network, chunk)
        key = tuple(query.tolist())
        with self._lock:
            if key in self._model_sets:
                return self._model_sets[key]

        filtered = filter_similar(self.store, query, self.min_entries)
        groups = group_by_session(filtered.entries, self.min_group)
        models, rejected = [], []
        for group in groups:
            outcome = fit_group(group, self.split_seed)
            if isinstance(outcome, RejectedGroup):
                rejected.append(outcome)
            else:
                models.append(outcome)

        model_set = ModelSet(tuple(models), tuple(rejected), len(filtered),
                             filtered.threshold, filtered.warning)
        logger.info("%s chunk: %d entries -> %d groups kept, %d rejected",
                    chunk.chunk_type.value, len(filtered), len(models), len(rejected))
        with self._lock:
            self._model_sets[key] = model_set
        return model_set

    def optimize(self, chunk, network, probe_params, probe_throughput) -> OptimizerResult:
        model_set = self.models_for(chunk, network)
        if not model_set.models:
            raise OptimizerError(
                f"no usable models for the {chunk.chunk_type.value} chunk "
                f"({len(model_set.rejected)} groups rejected)"
            )
        request = OptimizerRequest(
            probe_params=probe_params,
            probe_throughput=probe_throughput,
            models=model_set.models,
            bounds=self.bounds,
            relaxation=self.relaxation,
            eps_fraction=self.eps_fraction,
        )
        return optimize(request, cache=self._outcomes)

    def suggester(self, chunk, network):
        """Callable (params, observed) -> OptimizerResult for online tuning"""
        def suggest(params, observed):
            return self.optimize(chunk, network, params, observed)
        return suggest
