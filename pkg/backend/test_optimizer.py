"""
Tests for the Parameter Optimizer

Run with: python -m pytest backend/test_optimizer.py -v
"""

import pytest
import itertools
import os
import sys

import numpy as np

# Add backend directory to path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)))
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

from core.errors import InvalidParameterError, OptimizerError
from core.types import Chunk, ChunkType, FileInfo, HistoryEntry, NetworkProfile, ParameterBounds, ParamTriple
from core.units import MB
from engine.optimizer import (
    HarpOptimizer,
    ModelOutcome,
    OptimizerRequest,
    combine,
    grid_maximum,
    maximize,
    optimize,
    relax,
    residuals,
    weight_models,
)
from history.store import HistoryStore
from modeling import ThroughputModel, monomial_exponents
from simnet.history_generator import generate_history, uniform_dataset
from simnet.scenario import default_scenario
from simnet.simulator import simulate_transfer


NETWORK = NetworkProfile(bandwidth=10e9, rtt=0.04, buffer_size=32 * MB)
GRID = [ParamTriple(*combo) for combo in itertools.product((1, 2, 4, 8, 16, 32), repeat=3)]


def polynomial(degree, terms, group_id='g'):
    """Model from an {(a, b, c): coefficient} mapping"""
    coefficients = tuple(terms.get(exponents, 0.0) for exponents in monomial_exponents(degree))
    return ThroughputModel(group_id, degree, coefficients)


def constant(value, group_id='g'):
    return polynomial(1, {(0, 0, 0): value}, group_id)


# 100 - (cc-10)^2 - (p-5)^2 - (pp-2)^2
SEPARABLE = polynomial(2, {
    (0, 0, 0): -29.0,
    (1, 0, 0): 20.0, (0, 1, 0): 10.0, (0, 0, 1): 4.0,
    (2, 0, 0): -1.0, (0, 2, 0): -1.0, (0, 0, 2): -1.0,
})


def bowl(params):
    cc, p, pp = params.as_tuple()
    return 1e10 - 1e7 * ((cc - 16) ** 2 + (p - 16) ** 2 + (pp - 16) ** 2)


@pytest.fixture
def bowl_store():
    """Two full sweeps of an exact concave surface"""
    entries = []
    for session, start in (('sweep-a', 0), ('sweep-b', 5_000)):
        entries += [
            HistoryEntry('A', 'B', NETWORK, ChunkType.SMALL, 16 * MB, 64, params,
                         bowl(params), start + i, session)
            for i, params in enumerate(GRID)
        ]
    return HistoryStore(entries)


@pytest.fixture
def small_chunk():
    return Chunk(ChunkType.SMALL, tuple(FileInfo(f"f{i}", 16 * MB) for i in range(64)))


# Residuals and weights

def test_residual_sign():
    """Test that an underestimating model has a positive residual"""
    probe = ParamTriple(2, 2, 2)
    assert residuals([constant(900e6), constant(1000e6)], probe, 1000e6) == pytest.approx([100e6, 0.0])


def test_identical_residuals_share_weight():
    """Test a single cluster weighs 1"""
    models = [constant(1e9, f"g{i}").with_residual(5e7) for i in range(3)]
    assert [m.weight for m in weight_models(models, 1e9)] == [1, 1, 1]


def test_accurate_cluster_weighs_more():
    """Test that the cluster with smaller errors gets the higher weight"""
    eps = (0.0, 1e6, 9.5e8, 1e9)
    models = [constant(1e9, f"g{i}").with_residual(e) for i, e in enumerate(eps)]
    assert [m.weight for m in weight_models(models, 1e9)] == [2, 2, 1, 1]


def test_five_clusters_get_powers_of_two():
    """Test weights 1..16 across five separated clusters"""
    eps = (0.0, 2e8, 4e8, 6e8, 8e8)
    models = [constant(1e9, f"g{i}").with_residual(e) for i, e in enumerate(eps)]
    assert [m.weight for m in weight_models(models, 1e9)] == [16, 8, 4, 2, 1]


def test_weights_need_residuals():
    """Test that weighting unscored models is an error"""
    with pytest.raises(OptimizerError):
        weight_models([constant(1e9)], 1e9)


# Maximisation

def test_maximize_separable_concave():
    """Test the interior optimum"""
    tmax, params = maximize(SEPARABLE)
    assert params == ParamTriple(10, 5, 2)
    assert tmax == pytest.approx(100.0)


def test_maximize_increasing_model_hits_bounds():
    """Test that a linear increasing model peaks at the box corner"""
    model = polynomial(1, {(1, 0, 0): 1.0, (0, 1, 0): 2.0, (0, 0, 1): 3.0})
    assert maximize(model)[1] == ParamTriple(32, 32, 32)
    assert maximize(model, ParameterBounds(10, 8, 16))[1] == ParamTriple(10, 8, 16)


def test_maximize_matches_grid_search():
    """Test agreement with the exhaustive integer search on a cubic"""
    model = polynomial(3, {
        (0, 0, 0): 50.0, (1, 0, 0): 6.0, (0, 1, 0): 3.0, (0, 0, 1): 1.0,
        (2, 0, 0): -0.3, (1, 1, 0): 0.05, (0, 2, 0): -0.2, (0, 0, 2): -0.05,
        (3, 0, 0): 0.002,
    })
    best, _ = maximize(model)
    exhaustive, _ = grid_maximum(model)
    assert best >= exhaustive * 0.98


# Relaxation and combination

def test_relax_flat_model():
    """Test that a constant model relaxes everything to 1"""
    model = constant(100.0)
    assert relax(model, (100.0, ParamTriple(20, 8, 16))) == ParamTriple(1, 1, 1)


def test_relax_stops_at_ratio():
    """Test the concurrency walk stops where the model drops below 0.7 Tmax"""
    # 100 - 3.2 (cc - 20)^2: 71.2 at cc=17, 48.8 at cc=16
    model = polynomial(2, {(0, 0, 0): -1180.0, (1, 0, 0): 128.0, (2, 0, 0): -3.2})
    relaxed = relax(model, (100.0, ParamTriple(20, 1, 1)), (0.7, 0.7, 0.99))

    assert relaxed == ParamTriple(17, 1, 1)
    assert model.evaluate(relaxed) >= 0.7 * 100.0


def test_relax_keeps_non_positive_optimum():
    """Test that nothing moves when Tmax is not positive"""
    assert relax(constant(-5.0), (-5.0, ParamTriple(8, 8, 8))) == ParamTriple(8, 8, 8)


def _outcome(cc, weight):
    model = constant(1e9)
    params = ParamTriple(cc, 1, 1)
    return ModelOutcome(model, 1e9, params, params, weight, 0.0)


def test_combine_rounds_half_up():
    """Test the weighted average of relaxed triples"""
    result = combine([_outcome(10, 3), _outcome(20, 1)])
    assert result.params.cc == 13
    assert result.estimated_throughput == pytest.approx(1e9)


def test_combine_single_model():
    """Test one model passes through unchanged"""
    assert combine([_outcome(7, 1)]).params == ParamTriple(7, 1, 1)


def test_request_validation():
    """Test that requests without models or with a bad probe fail"""
    with pytest.raises(OptimizerError):
        OptimizerRequest(ParamTriple(1, 1, 1), 1e9, ())
    with pytest.raises(InvalidParameterError):
        OptimizerRequest(ParamTriple(1, 1, 1), 0.0, (constant(1e9),))


def test_optimize_pipeline():
    """Test the whole request path on the separable model"""
    request = OptimizerRequest(ParamTriple(4, 4, 4), 80.0, (SEPARABLE,), relaxation=(1.0, 1.0, 1.0))
    result = optimize(request)
    assert result.params == ParamTriple(10, 5, 2)
    assert result.estimated_throughput == pytest.approx(100.0)
    assert result.unit_throughput == pytest.approx(SEPARABLE.evaluate((1, 5, 2)))


def test_cache_separates_starting_points():
    """Test cached optima are reused only for the same starting point"""
    cache = {}
    first = OptimizerRequest(ParamTriple(4, 4, 4), 80.0, (SEPARABLE,))
    second = OptimizerRequest(ParamTriple(20, 2, 2), 80.0, (SEPARABLE,))

    optimize(first, cache=cache)
    assert len(cache) == 1
    optimize(second, cache=cache)
    assert len(cache) == 2
    assert optimize(first, cache=cache).params == optimize(first).params
    assert len(cache) == 2


# History-backed optimizer

def test_history_optimizer(bowl_store, small_chunk):
    """Test filter, group, fit and optimise from a store"""
    optimizer = HarpOptimizer(bowl_store)
    model_set = optimizer.models_for(small_chunk, NETWORK)

    assert len(model_set.models) == 2
    assert model_set.entries_used == 432
    assert all(model.degree == 2 for model in model_set.models)

    result = optimizer.optimize(small_chunk, NETWORK, ParamTriple(4, 2, 4), 8e9)
    # cc and p relax to 1 at 0.7; pp stops at 13 under 0.99
    assert result.params == ParamTriple(1, 1, 13)
    assert result.estimated_throughput == pytest.approx(1e10, rel=1e-3)
    assert result.unit_throughput == pytest.approx(bowl(ParamTriple(1, 1, 13)), rel=1e-3)
    assert result.total_weight == 2


def test_history_optimizer_caches_models(bowl_store, small_chunk):
    """Test that the model set is built once per chunk description"""
    optimizer = HarpOptimizer(bowl_store)
    assert optimizer.models_for(small_chunk, NETWORK) is optimizer.models_for(small_chunk, NETWORK)


def test_history_optimizer_without_history(small_chunk):
    """Test an empty store has nothing to offer"""
    with pytest.raises(OptimizerError):
        HarpOptimizer(HistoryStore()).optimize(small_chunk, NETWORK, ParamTriple(1, 1, 1), 1e9)


def test_suggester_calls_optimize(bowl_store, small_chunk):
    """Test the online callable"""
    suggest = HarpOptimizer(bowl_store).suggester(small_chunk, NETWORK)
    assert suggest(ParamTriple(4, 2, 4), 8e9).params == ParamTriple(1, 1, 13)


def test_relaxation_keeps_ratio_on_random_models():
    """Test relaxed values stay at or below the optimum and above rho x Tmax"""
    rng = np.random.default_rng(2024)
    rho = (0.7, 0.7, 0.99)
    for _ in range(1000):
        centre = rng.uniform(1, 32, size=3)
        curvature = rng.uniform(1e5, 1e8, size=3)
        peak = rng.uniform(1e9, 1e10)
        # peak - sum a (x - c)^2
        terms = {(0, 0, 0): peak - float(np.sum(curvature * centre ** 2))}
        for axis, exponents in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
            terms[exponents] = 2 * curvature[axis] * centre[axis]
            terms[tuple(2 * e for e in exponents)] = -curvature[axis]
        model = polynomial(2, terms)

        tmax, best = maximize(model)
        relaxed = relax(model, (tmax, best), rho)
        for axis in range(3):
            assert relaxed.as_tuple()[axis] <= best.as_tuple()[axis]
            trial = list(best.as_tuple())
            trial[axis] = relaxed.as_tuple()[axis]
            assert model.evaluate(trial) >= rho[axis] * tmax


def test_matching_traffic_models_weigh_more():
    """Test that sweeps collected under the current load outweigh stale ones"""
    light, heavy = default_scenario('light', seed=11), default_scenario('heavy', seed=11)
    dataset = uniform_dataset(8, 1000 * MB, light.network)
    grid = [ParamTriple(cc, p, pp) for cc in (1, 2, 4, 8, 16) for p in (1, 2, 4, 8, 16) for pp in (1, 2)]
    store = HistoryStore(generate_history([light, heavy], [dataset], grid))
    optimizer = HarpOptimizer(store)

    start = ParamTriple(4, 4, 1)
    observed = simulate_transfer([(dataset, start)], light.with_seed(99)).aggregate_throughput
    result = optimizer.optimize(dataset, light.network, start, observed)

    weights = {outcome.model.group_id.split('-')[1]: outcome.weight for outcome in result.per_model}
    assert set(weights) == {'00', '01'}
    assert weights['00'] > weights['01']
