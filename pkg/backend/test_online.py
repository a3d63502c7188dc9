"""
Tests for the Online Tuning Controller and Driver

Run with: python -m pytest backend/test_online.py -v
"""

import pytest
import os
import sys

# Add backend directory to path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)))
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

from core.errors import InvalidParameterError, OptimizerError
from core.types import Chunk, ChunkType, FileInfo, ParamTriple
from core.units import MB
from online import (
    DECISION_COLUMNS,
    OnlineConfig,
    OnlineState,
    consider,
    on_interval,
    run_online_transfer,
    transition_cost,
)
from simnet.scenario import default_scenario, step_traffic
from simnet.simulator import simulate_transfer


CURRENT = ParamTriple(4, 2, 4)


def _feed(suggested_cc, current=CURRENT, k=4, min_diff=2):
    state = OnlineState(current, k=k, min_diff=min_diff)
    decision = None
    for cc in suggested_cc:
        decision = consider(state, current.replace(cc=cc), current)
    return state, decision


class StubOptimizer:
    """Suggests a fixed concurrency and leaves p and pp alone"""

    def __init__(self, cc=8, fail=False):
        self.cc = cc
        self.fail = fail
        self.calls = 0

    def suggester(self, chunk, network):
        def suggest(params, observed):
            self.calls += 1
            if self.fail:
                raise OptimizerError("no models")
            return params.replace(cc=self.cc)
        return suggest


@pytest.fixture
def long_chunk():
    return Chunk(ChunkType.LARGE, tuple(FileInfo(f"f{i}", 100 * MB) for i in range(400)))


# Consistency rules

def test_small_consistent_change_is_ignored():
    """Test that a one-channel difference is below the minimum"""
    _, decision = _feed([5, 5, 5, 5])
    assert decision.action == 'keep'


def test_consistent_change_is_applied():
    """Test that k same-sided suggestions move cc to their low median"""
    state, decision = _feed([8, 9, 8, 8])
    assert decision.updated
    assert decision.params == ParamTriple(8, 2, 4)
    assert decision.changed == ('cc',)
    assert all(len(ring) == 0 for ring in state.rings.values())


def test_alternating_suggestions_are_ignored():
    """Test that mixed signs keep the current value"""
    _, decision = _feed([8, 3, 8, 3])
    assert decision.action == 'keep'


def test_ring_must_fill_first():
    """Test that fewer than k suggestions never update"""
    _, decision = _feed([16, 16, 16])
    assert decision.action == 'keep'
    assert decision.reason == 'ring not full'


def test_pipelining_skips_distance_check():
    """Test that pp moves on any consistent change"""
    state = OnlineState(CURRENT, k=2, min_diff=2)
    consider(state, CURRENT.replace(pp=5), CURRENT)
    decision = consider(state, CURRENT.replace(pp=5), CURRENT)
    assert decision.params == ParamTriple(4, 2, 5)


def test_optimizer_failure_keeps_ring():
    """Test that a failed call leaves state untouched"""
    state = OnlineState(CURRENT, k=4)

    def failing(params, observed):
        raise OptimizerError("no models")

    on_interval(state, 1e9, CURRENT, failing)
    decision = on_interval(state, 1e9, CURRENT, failing)
    assert decision.action == 'keep'
    assert decision.reason == 'no suggestion'
    assert all(len(ring) == 0 for ring in state.rings.values())


def test_non_positive_observation_is_skipped():
    """Test that an idle interval does not reach the optimizer"""
    calls = []
    state = OnlineState(CURRENT, k=2)
    decision = on_interval(state, 0.0, CURRENT, lambda p, o: calls.append(1) or p)
    assert decision.action == 'keep'
    assert calls == []


def test_config_validation():
    """Test that a ring of one is refused"""
    with pytest.raises(InvalidParameterError):
        OnlineConfig(k=1)


def test_first_reading_only_sets_baseline():
    """Test the reading after channels open never reaches the optimizer"""
    calls = []
    state = OnlineState(CURRENT, k=2)
    decision = on_interval(state, 5e9, CURRENT, lambda p, o: calls.append(o) or p)
    assert decision.reason == 'settling'
    on_interval(state, 5e9, CURRENT, lambda p, o: calls.append(o) or p)
    assert calls == [5e9]


def test_throughput_shift_clears_ring():
    """Test that a jump past shift_pct drops suggestions made before it"""
    state = OnlineState(CURRENT, k=4, shift_pct=0.2)
    assert state.observe(8e9) == 'settling'
    assert state.observe(8.5e9) == 'steady'
    for _ in range(3):
        consider(state, CURRENT.replace(cc=8), CURRENT)
    assert state.observe(2.5e9) == 'shift'
    assert all(len(ring) == 0 for ring in state.rings.values())
    assert state.observe(2.6e9) == 'steady'


def test_update_skips_next_reading():
    """Test that a retune makes the following reading a settling one"""
    state = OnlineState(CURRENT, k=4)
    state.observe(1e9)
    assert state.observe(1e9) == 'steady'
    decisions = [consider(state, CURRENT.replace(cc=8), CURRENT) for _ in range(4)]
    assert decisions[-1].updated
    assert state.observe(1e9) == 'settling'


def test_config_rejects_bad_shift():
    """Test that a zero shift threshold is refused"""
    with pytest.raises(InvalidParameterError):
        OnlineConfig(shift_pct=0.0)


# Transition cost

def test_transition_costs():
    """Test setup seconds for pp, cc and p changes"""
    assert transition_cost(ParamTriple(4, 2, 4), ParamTriple(4, 2, 16), 2.0) == 0.0
    assert transition_cost(ParamTriple(4, 2, 4), ParamTriple(6, 2, 4), 2.0) == 4.0
    assert transition_cost(ParamTriple(4, 2, 4), ParamTriple(4, 4, 4), 2.0) == 8.0
    assert transition_cost(ParamTriple(4, 2, 4), ParamTriple(2, 2, 4), 2.0) == 0.0
    assert transition_cost(CURRENT, CURRENT, 2.0) == 0.0


# Driver

def test_online_transfer_updates_after_k_intervals(long_chunk):
    """Test the first update lands k intervals after the first measured reading"""
    scenario = default_scenario(traffic='light', seed=5)
    config = OnlineConfig(k=4, min_diff=2, monitor_interval=3.0, conn_setup=2.0)

    report = run_online_transfer([(long_chunk, ParamTriple(4, 2, 1))], scenario, StubOptimizer(cc=8), config)

    updates = report.updates
    assert len(updates) == 1
    first = updates[0]
    assert first.interval == 6
    assert first.t == pytest.approx(18.0)
    assert first.params == ParamTriple(8, 2, 1)
    assert first.cost == pytest.approx(8.0)
    assert report.final_params == {'Large': ParamTriple(8, 2, 1)}
    assert report.result.total_bytes == pytest.approx(long_chunk.total_size)


def test_online_transfer_without_optimizer_keeps_params(long_chunk):
    """Test that failing suggestions never change the transfer"""
    scenario = default_scenario(traffic='light', seed=5)
    report = run_online_transfer([(long_chunk, ParamTriple(4, 2, 1))], scenario, StubOptimizer(fail=True))

    assert report.updates == []
    assert report.final_params['Large'] == ParamTriple(4, 2, 1)
    assert all(row[7] == 'keep' for row in report.decision_rows())
    assert len(DECISION_COLUMNS) == len(report.decision_rows()[0])


LIGHT_PARAMS = ParamTriple(12, 2, 1)
HEAVY_PARAMS = ParamTriple(16, 16, 1)


class LoadAwareOptimizer:
    """Estimates background flows from fair share and picks a triple for the load"""

    def suggester(self, chunk, network):
        def suggest(params, observed):
            background = params.cc * params.p * (network.bandwidth / observed - 1)
            return HEAVY_PARAMS if background > 24 else LIGHT_PARAMS
        return suggest


@pytest.fixture
def longer_chunk():
    return Chunk(ChunkType.LARGE, tuple(FileInfo(f"f{i}", 100 * MB) for i in range(1000)))


def test_update_waits_for_readings_after_traffic_step(longer_chunk):
    """Test that suggestions from before a load step never drive the retune"""
    scenario = default_scenario(step_traffic('light', 'heavy', 9.0), seed=5)
    config = OnlineConfig(k=4, min_diff=2, monitor_interval=3.0, conn_setup=2.0)

    report = run_online_transfer([(longer_chunk, ParamTriple(8, 2, 1))], scenario, LoadAwareOptimizer(), config)

    updates = report.updates
    assert len(updates) == 1
    assert updates[0].t >= 9.0 + config.k * config.monitor_interval - 1e-9
    assert updates[0].params == HEAVY_PARAMS
    assert report.final_params['Large'] == HEAVY_PARAMS


def test_online_tuning_recovers_from_heavier_traffic(longer_chunk):
    """Test online tuning against the same start kept fixed through a load step"""
    scenario = default_scenario(step_traffic('light', 'heavy', 30.0), seed=5)

    report = run_online_transfer([(longer_chunk, LIGHT_PARAMS)], scenario, LoadAwareOptimizer())
    fixed = simulate_transfer([(longer_chunk, LIGHT_PARAMS)], scenario)

    assert [u.params for u in report.updates] == [HEAVY_PARAMS]
    assert report.result.aggregate_throughput >= 1.15 * fixed.aggregate_throughput


def test_online_tuning_sheds_flows_when_traffic_clears(longer_chunk):
    """Test that lighter background load brings the flow count down"""
    scenario = default_scenario(step_traffic('heavy', 'light', 30.0), seed=5)

    report = run_online_transfer([(longer_chunk, HEAVY_PARAMS)], scenario, LoadAwareOptimizer())

    updates = report.updates
    assert len(updates) == 1
    update = updates[0]
    assert update.t == pytest.approx(45.0)
    assert update.params == LIGHT_PARAMS
    assert update.flows == 256
    after = [d for d in report.decisions if d.t > update.t]
    assert max(d.flows for d in after) <= 32
    assert any(d.flows == 24 for d in after)
