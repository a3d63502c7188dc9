"""
Tests for the Command Line

Run with: python -m pytest backend/test_cli.py -v
"""

import pytest
import itertools
import json
import os
import sys

from click.testing import CliRunner

# Add backend and project directories to path
backend_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)))
project_dir = os.path.dirname(backend_dir)
for path in (backend_dir, project_dir):
    if path not in sys.path:
        sys.path.insert(0, path)

from cli import main
from core.types import ChunkType, HistoryEntry, NetworkProfile, ParamTriple
from core.units import MB
from history.store import HistoryStore

DATA_DIR = os.path.join(project_dir, 'data')
SCENARIO = os.path.join(DATA_DIR, 'scenario_default.json')
MANIFEST = os.path.join(DATA_DIR, 'manifest_small.txt')
NETWORK_CONFIG = os.path.join(DATA_DIR, 'network.json')

NETWORK = NetworkProfile(bandwidth=10e9, rtt=0.04, buffer_size=32 * MB)
GRID = [ParamTriple(*combo) for combo in itertools.product((1, 2, 4, 8, 16, 32), repeat=3)]


def bowl(params):
    cc, p, pp = params.as_tuple()
    return 1e10 - 1e7 * ((cc - 16) ** 2 + (p - 16) ** 2 + (pp - 16) ** 2)


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def env(tmp_path):
    return {
        'HARP_DATA_DIR': str(tmp_path),
        'HARP_HISTORY_PATH': str(tmp_path / 'history.jsonl'),
    }


@pytest.fixture
def bowl_history(tmp_path):
    """History of two sweeps over the 64 x 16 MB manifest"""
    entries = []
    for session, start in (('sweep-a', 0), ('sweep-b', 5_000)):
        entries += [
            HistoryEntry('A', 'B', NETWORK, ChunkType.SMALL, 16 * MB, 64, params,
                         bowl(params), start + i, session)
            for i, params in enumerate(GRID)
        ]
    return HistoryStore(entries).save(str(tmp_path / 'bowl.jsonl'))


def invoke(runner, env, *args):
    return runner.invoke(main, ['--log-level', 'ERROR', *args], env=env)


# cost-table

def test_cost_table(runner, env):
    """Test the nine rows of the default table"""
    result = invoke(runner, env, 'cost-table')

    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert len(lines) == 10
    assert lines[1].split() == ['10', '50', '90']
    assert lines[-1].split() == ['50', '10', '18']


def test_cost_table_with_latency(runner, env):
    """Test that optimizer latency raises the minimum size"""
    result = invoke(runner, env, 'cost-table', '--latency', '3')
    assert result.exit_code == 0
    assert result.output.strip().splitlines()[1].split()[-1] == '123'


# generate-history

def test_generate_history(runner, env, tmp_path):
    """Test one line per grid point"""
    out = tmp_path / 'gen.jsonl'
    result = invoke(runner, env, 'generate-history', SCENARIO, '--out', str(out),
                    '--dataset', '8x16000000', '--grid', '1,4')

    assert result.exit_code == 0, result.output
    assert result.output.startswith('8 entries written')
    lines = out.read_text(encoding='utf-8').splitlines()
    assert len(lines) == 8
    assert json.loads(lines[0])['file_count'] == 8


def test_generate_history_is_deterministic(runner, env, tmp_path):
    """Test that two runs write identical files"""
    first, second = tmp_path / 'a.jsonl', tmp_path / 'b.jsonl'
    for out in (first, second):
        invoke(runner, env, 'generate-history', SCENARIO, '--out', str(out),
               '--dataset', '8x16000000', '--grid', '1,4')
    assert first.read_text(encoding='utf-8') == second.read_text(encoding='utf-8')


def test_generate_history_append(runner, env, tmp_path):
    """Test that --append extends an existing file"""
    out = tmp_path / 'gen.jsonl'
    args = ('generate-history', SCENARIO, '--out', str(out), '--dataset', '8x16000000', '--grid', '1,4')
    invoke(runner, env, *args)
    result = invoke(runner, env, *args, '--append')

    assert result.exit_code == 0
    assert len(out.read_text(encoding='utf-8').splitlines()) == 16


@pytest.mark.parametrize('extra', [
    ('--dataset', 'lots'),
    ('--grid', 'one,two'),
    ('--grid', ','),
])
def test_generate_history_bad_options(runner, env, tmp_path, extra):
    """Test that malformed options are usage errors"""
    result = invoke(runner, env, 'generate-history', SCENARIO, '--out', str(tmp_path / 'x.jsonl'), *extra)
    assert result.exit_code == 2


def test_generate_history_missing_scenario(runner, env, tmp_path):
    """Test that an unreadable scenario exits with 2"""
    result = invoke(runner, env, 'generate-history', str(tmp_path / 'none.json'),
                    '--out', str(tmp_path / 'x.jsonl'))
    assert result.exit_code == 2


# simulate

def test_simulate_fixed_params(runner, env, tmp_path):
    """Test a fixed plan and the timeline export"""
    timeline = tmp_path / 'timeline.csv'
    result = invoke(runner, env, 'simulate', SCENARIO, MANIFEST, '--params', 'Small=4,2,8',
                    '--timeline', str(timeline))

    assert result.exit_code == 0, result.output
    assert result.output.startswith('fixed:')
    assert timeline.read_text(encoding='utf-8').splitlines()[0] == 't_s,throughput_bps,flows'


def test_simulate_fixed_params_must_cover_chunks(runner, env):
    """Test that a plan without the Small chunk is refused"""
    result = invoke(runner, env, 'simulate', SCENARIO, MANIFEST, '--params', 'Large=4,2,8')
    assert result.exit_code == 2


def test_simulate_baseline(runner, env):
    """Test a baseline strategy run"""
    result = invoke(runner, env, 'simulate', SCENARIO, MANIFEST, '--strategy', 'go')
    assert result.exit_code == 0, result.output
    assert result.output.startswith('go:')
    assert result.output.strip().endswith(' s')
    assert 'bps over' in result.output


def test_simulate_harp_without_history(runner, env, tmp_path):
    """Test that a missing history file exits with 2"""
    result = invoke(runner, env, 'simulate', SCENARIO, MANIFEST, '--history', str(tmp_path / 'none.jsonl'))
    assert result.exit_code == 2


# compare

def test_compare(runner, env):
    """Test the comparison table"""
    result = invoke(runner, env, 'compare', SCENARIO, MANIFEST, '--strategies', 'go,sc', '--baseline', 'go')

    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0].split() == ['strategy', 'Gbps', 'seconds', 'ratio']
    assert [line.split()[0] for line in lines[1:]] == ['go', 'sc']
    assert lines[1].split()[-1] == '1.00'


def test_compare_is_repeatable(runner, env):
    """Test that the same scenario and seed print the same table"""
    args = ('compare', SCENARIO, MANIFEST, '--strategies', 'go,sc', '--baseline', 'go')
    first = invoke(runner, env, *args)
    second = invoke(runner, env, *args)

    assert first.exit_code == 0, first.output
    assert first.output == second.output


def test_compare_unknown_strategy(runner, env):
    """Test that unknown strategy names are usage errors"""
    result = invoke(runner, env, 'compare', SCENARIO, MANIFEST, '--strategies', 'go,warp')
    assert result.exit_code == 2


# optimize

def test_optimize_given_probe(runner, env, bowl_history):
    """Test the text report from a given probe"""
    result = invoke(runner, env, 'optimize', bowl_history, MANIFEST, NETWORK_CONFIG,
                    '--probe', 'given:4,2,4=8e9')

    assert result.exit_code == 0, result.output
    assert 'params=(1,1,13)' in result.output
    assert 'plan maxCC=1' in result.output


def test_optimize_json(runner, env, bowl_history):
    """Test the JSON report"""
    result = invoke(runner, env, 'optimize', bowl_history, MANIFEST, NETWORK_CONFIG,
                    '--probe', 'given:4,2,4=8e9', '--json')

    assert result.exit_code == 0, result.output
    outcome = json.loads(result.output)
    assert outcome['chunks'][0]['params'] == [1, 1, 13]
    assert outcome['chunks'][0]['chunkType'] == 'Small'
    assert outcome['plan']['maxCc'] == 1


def test_optimize_bad_probe(runner, env, bowl_history):
    """Test that a probe without the given: prefix is a usage error"""
    result = invoke(runner, env, 'optimize', bowl_history, MANIFEST, NETWORK_CONFIG, '--probe', '4,2,4=8e9')
    assert result.exit_code == 2


def test_optimize_malformed_history(runner, env, tmp_path):
    """Test that a malformed history line exits with 2"""
    history = tmp_path / 'bad.jsonl'
    history.write_text('{"source": "A"}\n', encoding='utf-8')
    result = invoke(runner, env, 'optimize', str(history), MANIFEST, NETWORK_CONFIG,
                    '--probe', 'given:4,2,4=8e9')

    assert result.exit_code == 2
    assert 'line 1' in result.stderr


def test_optimize_empty_history(runner, env, tmp_path):
    """Test that an empty history is a domain error"""
    history = tmp_path / 'empty.jsonl'
    history.write_text('', encoding='utf-8')
    result = invoke(runner, env, 'optimize', str(history), MANIFEST, NETWORK_CONFIG,
                    '--probe', 'given:4,2,4=8e9')
    assert result.exit_code == 1


# inspect

def test_inspect(runner, env, bowl_history):
    """Test the model listing"""
    result = invoke(runner, env, 'inspect', bowl_history, MANIFEST, NETWORK_CONFIG)

    assert result.exit_code == 0, result.output
    assert result.output.startswith('Small: 432 entries')
    assert result.output.count('degree=2') == 2


def test_bad_environment_exits_with_2(runner, env):
    """Test that invalid settings stop the command line early"""
    result = invoke(runner, {**env, 'HARP_ONLINE_K': '1'}, 'cost-table')
    assert result.exit_code == 2
