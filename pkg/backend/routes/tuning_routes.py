"""
Tuning API Routes

Flask routes for optimisation, simulation, strategy comparison and the
cost table.
"""

import logging

from flask import Blueprint, jsonify, request

from core.errors import InvalidParameterError
from core.partition import partition_files
from core.types import ChunkType, ParamTriple
from engine.cost_model import SAMPLE_TIME, cost_table
from engine.experiments import compare_strategies, optimize_dataset, parse_probe, run_strategy
from simnet.simulator import simulate_transfer

from .common import (
    error_response,
    files_from_payload,
    get_context,
    network_from_payload,
    read_json,
    scenario_from_payload,
)

logger = logging.getLogger(__name__)

# Create blueprint
tuning_bp = Blueprint('tuning', __name__, url_prefix='/api')


def _probe_from_payload(data):
    probe = data.get('probe')
    if probe is None:
        return None
    if isinstance(probe, str):
        return parse_probe(probe)
    try:
        cc, p, pp = probe['params']
        throughput = float(probe['throughput'])
    except (KeyError, TypeError, ValueError):
        raise InvalidParameterError("probe needs 'params' [cc, p, pp] and 'throughput'") from None
    return ParamTriple(cc, p, pp), throughput


@tuning_bp.route('/health', methods=['GET'])
def health():
    context = get_context()
    return jsonify({
        'success': True,
        'status': 'ok',
        'historyEntries': len(context.store),
    }), 200


@tuning_bp.route('/optimize', methods=['POST'])
def optimize():
    """
    Optimize parameters for every chunk of a dataset.

    Request:
    {
        "network": {"bandwidth_bps", "rtt_s", "buffer_bytes"},
        "files": [{"path", "size"}] | "manifest": "path size\\n...",
        "probe": "cc,p,pp=bps" | {"params": [cc,p,pp], "throughput": bps},
        "scenario": {...}   (used for adaptive probes when no probe is given)
    }
    """
    try:
        data = read_json()
        context = get_context()
        network = network_from_payload(data)
        files = files_from_payload(data)
        outcome = optimize_dataset(
            files,
            network,
            context.optimizer,
            probe=_probe_from_payload(data),
            scenario=scenario_from_payload(data, required=False),
            settings=context.settings,
        )
        return jsonify({'success': True, **outcome}), 200
    except Exception as e:
        return error_response(e)


@tuning_bp.route('/simulate', methods=['POST'])
def simulate():
    """
    Simulate a transfer.

    Request:
    {
        "scenario": {...}, "seed": int,
        "files" | "manifest",
        "strategy": "harp" | "go" | "sc" | "promc" | "pcp" | "oracle",
        "online": bool,
        "params": {"Tiny": [cc,p,pp], ...}   (fixed plan, overrides strategy),
        "includeTimeline": bool
    }
    """
    try:
        data = read_json()
        context = get_context()
        scenario = scenario_from_payload(data)
        files = files_from_payload(data)
        chunks = partition_files(files, scenario.network, context.settings.thresholds)
        include_timeline = bool(data.get('includeTimeline', False))

        if data.get('params'):
            fixed = {ChunkType.from_label(k): ParamTriple(*v) for k, v in data['params'].items()}
            missing = [c.chunk_type.value for c in chunks if c.chunk_type not in fixed]
            if missing:
                raise InvalidParameterError(f"no parameters given for chunk(s): {', '.join(missing)}")
            result = simulate_transfer([(c, fixed[c.chunk_type]) for c in chunks], scenario)
            return jsonify({
                'success': True,
                'strategy': 'fixed',
                **result.to_dict(include_timeline),
            }), 200

        strategy = str(data.get('strategy', 'harp')).lower()
        if data.get('online'):
            if strategy != 'harp':
                raise InvalidParameterError("online tuning is only available for the harp strategy")
            strategy = 'harp-ot'
        needs_history = strategy in ('harp', 'harp-ot')
        outcome = run_strategy(
            strategy,
            chunks,
            scenario,
            optimizer=context.optimizer if needs_history else None,
            settings=context.settings,
        )
        return jsonify({'success': True, **outcome.to_dict(include_timeline)}), 200
    except Exception as e:
        return error_response(e)


@tuning_bp.route('/compare', methods=['POST'])
def compare():
    """
    Compare strategies on one scenario.

    Request:
    {"scenario": {...}, "files" | "manifest", "strategies": [...],
     "traffic": "light" | "medium" | "heavy", "seed": int}
    """
    try:
        data = read_json()
        context = get_context()
        scenario = scenario_from_payload(data)
        files = files_from_payload(data)
        strategies = data.get('strategies') or ['go', 'sc', 'promc', 'pcp']
        if not isinstance(strategies, list):
            raise InvalidParameterError("'strategies' must be a list")
        chunks = partition_files(files, scenario.network, context.settings.thresholds)
        needs_history = any(str(s).lower() in ('harp', 'harp-ot') for s in strategies)
        outcomes = compare_strategies(
            strategies,
            chunks,
            scenario,
            optimizer=context.optimizer if needs_history else None,
            settings=context.settings,
        )
        return jsonify({
            'success': True,
            'results': [outcome.to_dict() for outcome in outcomes],
        }), 200
    except Exception as e:
        return error_response(e)


@tuning_bp.route('/cost-table', methods=['GET'])
def get_cost_table():
    """
    Minimum chunk sizes for tuning to pay off.

    Query params:
        sampleTime: Seconds spent sampling (default: 15)
        c: Optimizer latency in seconds (default: 0)
    """
    try:
        try:
            sample_time = float(request.args.get('sampleTime', SAMPLE_TIME))
            latency = float(request.args.get('c', 0.0))
        except ValueError:
            raise InvalidParameterError("sampleTime and c must be numbers") from None
        return jsonify({'success': True, 'rows': cost_table(sample_time, latency)}), 200
    except Exception as e:
        return error_response(e)
