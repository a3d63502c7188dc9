"""
Tests for Similarity Filtering, Session Grouping and Throughput Models

Run with: python -m pytest backend/test_modeling.py -v
"""

import pytest
import itertools
import math
import os
import sys

import numpy as np

# Add backend directory to path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)))
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

from core.errors import ZeroVectorError
from history.features import entry_features
from core.types import Chunk, ChunkType, FileInfo, HistoryEntry, NetworkProfile, ParamTriple
from core.units import GB, MB
from history.store import HistoryStore
from modeling import (
    RejectedGroup,
    ThroughputModel,
    estimation_accuracy,
    projected_validation_accuracy,
    evaluate,
    fit_group,
    monomial_exponents,
    stratified_split,
)
from similarity import (
    cosine_similarity,
    filter_similar,
    group_by_session,
    normalize,
    query_features,
    similarity_scores,
)


NETWORK = NetworkProfile(bandwidth=10e9, rtt=0.04, buffer_size=32 * MB)
GRID = [ParamTriple(*combo) for combo in itertools.product((1, 2, 4, 8, 16, 32), repeat=3)]


def bowl(params):
    """Concave surface peaking at (16, 16, 16)"""
    cc, p, pp = params.as_tuple()
    return 1e10 - 1e7 * ((cc - 16) ** 2 + (p - 16) ** 2 + (pp - 16) ** 2)


def make_entries(throughput_fn, session_id='s1', file_count=64, chunk_type=ChunkType.SMALL,
                 avg_file_size=16 * MB, grid=GRID, start=0):
    return [
        HistoryEntry('A', 'B', NETWORK, chunk_type, avg_file_size, file_count, params,
                     throughput_fn(params), start + i, session_id)
        for i, params in enumerate(grid)
    ]


def single_group(entries):
    groups = group_by_session(entries, min_group=27)
    assert len(groups) == 1
    return groups[0]


# Cosine similarity

def test_cosine_identity_and_orthogonality():
    """Test the two extremes"""
    assert cosine_similarity([1, 2, 3, 0, 0, 1], [1, 2, 3, 0, 0, 1]) == pytest.approx(1.0)
    assert cosine_similarity([1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]) == 0.0


def test_cosine_hand_computed():
    """Test against sum(ab) / (|a| |b|)"""
    assert cosine_similarity([1, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0]) == pytest.approx(1 / math.sqrt(2))


def test_cosine_zero_vector():
    """Test that an all-zero vector is an error"""
    with pytest.raises(ZeroVectorError):
        cosine_similarity([0] * 6, [1] * 6)


def test_cosine_ignores_vector_length():
    """Test that scaling either vector leaves the similarity unchanged"""
    a = np.array([0.3, 1.2, 5.0, 0.0, 2.0, 0.4])
    b = np.array([1.0, 0.2, 4.0, 3.0, 0.5, 0.9])
    base = cosine_similarity(a, b)
    assert cosine_similarity(2.5 * a, b) == pytest.approx(base)
    assert cosine_similarity(a, 1e-3 * b) == pytest.approx(base)
    assert similarity_scores(np.vstack([a, 7 * a]), b) == pytest.approx([base, base])


# Filtering

def test_filter_keeps_matching_entries_at_first_threshold():
    """Test that enough exact matches stop the threshold at 0.99"""
    matching = make_entries(bowl, session_id='near', file_count=128)
    matching += make_entries(bowl, session_id='near-2', file_count=128, start=10_000)
    distant = make_entries(bowl, session_id='far', file_count=64, chunk_type=ChunkType.LARGE,
                           avg_file_size=1 * GB)[:100]
    store = HistoryStore(matching + distant)

    chunk = Chunk(ChunkType.SMALL, tuple(FileInfo(f"f{i}", 16 * MB) for i in range(128)))
    result = filter_similar(store, query_features(NETWORK, chunk), min_entries=432)

    assert result.threshold == pytest.approx(0.99)
    assert len(result) == 432
    assert not result.warning
    assert all(e.session_id.startswith('near') for e in result.entries)


def test_filter_small_store_returns_everything():
    """Test the warning when the store is smaller than wanted"""
    store = HistoryStore(make_entries(bowl)[:150])
    chunk = Chunk(ChunkType.SMALL, tuple(FileInfo(f"f{i}", 16 * MB) for i in range(64)))
    result = filter_similar(store, query_features(NETWORK, chunk), min_entries=432)

    assert len(result) == 150
    assert result.warning


def test_filter_empty_store():
    """Test that an empty store yields nothing with a warning"""
    chunk = Chunk(ChunkType.SMALL, (FileInfo('f', 16 * MB),))
    result = filter_similar(HistoryStore(), query_features(NETWORK, chunk), min_entries=10)
    assert len(result) == 0
    assert result.warning


def _graded_store():
    """Four sessions drifting away from 512 x 32 MB"""
    entries = []
    for index, (count, size) in enumerate(((512, 32), (256, 24), (128, 12), (64, 4))):
        entries += make_entries(bowl, session_id=f"d{index}", file_count=count,
                                avg_file_size=size * MB, grid=GRID[:50], start=index * 10_000)
    return HistoryStore(entries)


GRADED_QUERY_CHUNK = Chunk(ChunkType.SMALL, tuple(FileInfo(f"f{i}", 32 * MB) for i in range(512)))


def test_filter_widens_as_more_entries_are_wanted():
    """Test that asking for more survivors never raises the threshold or drops entries"""
    store = _graded_store()
    query = query_features(NETWORK, GRADED_QUERY_CHUNK)

    results = [filter_similar(store, query, min_entries=n) for n in (50, 100, 150, 200)]
    thresholds = [r.threshold for r in results]
    assert thresholds == sorted(thresholds, reverse=True)
    for narrower, wider in zip(results, results[1:]):
        assert set(narrower.entries) <= set(wider.entries)
    assert results[0].threshold == pytest.approx(0.99)
    assert [len(r) for r in results] == sorted(len(r) for r in results)


def test_filter_matches_brute_force():
    """Test the vectorised filter against a loop over single comparisons"""
    store = _graded_store()
    query = query_features(NETWORK, GRADED_QUERY_CHUNK)
    result = filter_similar(store, query, min_entries=120)

    stats = store.feature_stats.extended(query)
    q = normalize(query, stats)[0]
    expected = []
    for entry in store.entries:
        v = normalize(entry_features(entry), stats)[0]
        score = cosine_similarity(v, q) if np.linalg.norm(v) > 0 else 0.0
        if score >= result.threshold - 1e-12:
            expected.append((entry, score))

    assert list(result.entries) == [entry for entry, _ in expected]
    assert list(result.similarities) == pytest.approx([score for _, score in expected])


# Grouping

def test_group_by_session_drops_small_groups():
    """Test that strays below the minimum group size are dropped"""
    entries = make_entries(bowl, session_id='full') + make_entries(bowl, session_id='stray')[:10]
    groups = group_by_session(entries, min_group=27)

    assert [g.session_id for g in groups] == ['full']
    assert len(groups[0]) == 216
    assert group_by_session([]) == []


def test_group_by_session_two_sweeps():
    """Test two full sweeps become two groups"""
    entries = make_entries(bowl, session_id='a') + make_entries(bowl, session_id='b', start=5_000)
    assert [len(g) for g in group_by_session(entries)] == [216, 216]


# Models

def test_split_keeps_every_concurrency_on_both_sides():
    """Test the stratified split"""
    cc = np.array([p.cc for p in GRID])
    train, validation = stratified_split(cc, seed=3)

    assert len(train) + len(validation) == len(GRID)
    assert set(cc[train]) == set(cc[validation]) == {1, 2, 4, 8, 16, 32}


def test_fit_recovers_quadratic():
    """Test that an exact quadratic is accepted at degree 2"""
    model = fit_group(single_group(make_entries(bowl)), split_seed=0)

    assert isinstance(model, ThroughputModel)
    assert model.degree == 2
    assert model.r2_train >= 0.999
    assert model.evaluate(ParamTriple(10, 5, 3)) == pytest.approx(bowl(ParamTriple(10, 5, 3)), rel=0.01)


def test_fit_is_deterministic():
    """Test that the same seed gives the same coefficients"""
    group = single_group(make_entries(bowl))
    assert fit_group(group, split_seed=4).coefficients == fit_group(group, split_seed=4).coefficients


def test_fit_rejects_noise():
    """Test that throughput unrelated to the parameters is rejected"""
    rng = np.random.default_rng(12)
    values = iter(rng.uniform(1e9, 2e9, size=len(GRID)))
    rejected = fit_group(single_group(make_entries(lambda _: float(next(values)))), split_seed=0)

    assert isinstance(rejected, RejectedGroup)
    assert len(rejected.r2_by_degree) == 4


def test_fit_constant_throughput():
    """Test that zero variance is a perfect degree 1 fit"""
    model = fit_group(single_group(make_entries(lambda _: 5e9)), split_seed=0)
    assert model.degree == 1
    assert model.r2_train == 1.0


def test_evaluate_simple_models():
    """Test evaluation of hand-written coefficients"""
    zero = ThroughputModel('g', 1, (0.0, 0.0, 0.0, 0.0))
    linear_cc = ThroughputModel('g', 1, (0.0, 3.0, 0.0, 0.0))
    assert evaluate(zero, ParamTriple(5, 6, 7)) == 0.0
    assert evaluate(linear_cc, ParamTriple(5, 6, 7)) == pytest.approx(15.0)
    assert len(monomial_exponents(4)) == 35


def test_model_record_round_trip():
    """Test the model export record"""
    model = ThroughputModel('g', 1, (1.0, 2.0, 3.0, 4.0), sample_count=10)
    record = model.to_record()
    assert record['terms'] == ['1', 'cc', 'p', 'pp']
    assert ThroughputModel.from_record(record) == model


def test_estimation_accuracy():
    """Test closeness of an estimate to the achieved throughput"""
    assert estimation_accuracy(9e9, 10e9) == pytest.approx(0.9)
    assert estimation_accuracy(30e9, 10e9) == 0.0


def test_training_fit_improves_with_degree():
    """Test that a higher degree never fits the training part worse"""
    rng = np.random.default_rng(8)

    def rough(params):
        cc, p, pp = params.as_tuple()
        return 6e9 + 2e8 * math.log2(cc * p) - 1e6 * pp ** 2 + rng.normal(0, 2e8)

    group = single_group(make_entries(rough))
    rejected = fit_group(group, split_seed=1, r2_gate=1.01)

    assert isinstance(rejected, RejectedGroup)
    r2_train = [score[1] for score in rejected.r2_by_degree]
    assert all(later >= earlier - 1e-6 for earlier, later in zip(r2_train, r2_train[1:]))


def test_projected_validation_accuracy():
    """Test the optimum of one part judged by the other part's model"""
    group = single_group(make_entries(bowl))
    assert projected_validation_accuracy(group, split_seed=0) == pytest.approx(1.0, abs=1e-6)

    rng = np.random.default_rng(12)
    values = iter(rng.uniform(1e9, 2e9, size=len(GRID)))
    noise = single_group(make_entries(lambda _: float(next(values))))
    assert projected_validation_accuracy(noise, split_seed=0) is None
